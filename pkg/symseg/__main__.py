"""Run the symseg command line with ``python -m symseg``."""

import sys

from .cli import main

sys.exit(main())
