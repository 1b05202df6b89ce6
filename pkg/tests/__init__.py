"""Tests for symseg."""
