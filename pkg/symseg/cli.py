"""Command-line front end.

Subcommands: segment, evaluate, baseline, sweep and plotdata. Batch
commands process every input they can and report failures per file on
stderr. Exit status is 0 when every file succeeded, 2 when some failed
and 1 when nothing succeeded.
"""

from __future__ import annotations

import argparse
from collections.abc import Callable, Iterable, Sequence
from fractions import Fraction
import logging
from pathlib import Path
import sys
from typing import Any

import colorlog

from .changepoint import KernelCost, SelectionRule, discrepancy, window_detect
from .config import Config, load_config
from .const import (
    BASELINE_K_BY_LEVEL,
    BASELINE_K_SWD,
    CONF_ALPHA,
    CONF_ALPHA1,
    CONF_BETA,
    CONF_CACHE_DIR,
    CONF_CAPACITY,
    CONF_COMBINE,
    CONF_JOBS,
    CONF_METHOD,
    CONF_NORM_STAGE,
    CONF_OUTPUT,
    CONF_PENALTY,
    CONF_TAU1,
    CONF_TAU2,
    CONF_TICK_TOLERANCE,
    CONF_TICKS_PER_QUARTER,
    CONF_TOLERANCE,
    CONF_W2,
    CSV_SUFFIXES,
    DEFAULT_ALPHA,
    DEFAULT_ALPHA1,
    DEFAULT_BETA,
    DEFAULT_CAPACITY_LIMIT,
    DEFAULT_HISTOGRAM_BIN_BEATS,
    DEFAULT_PENALTY,
    DEFAULT_TAU1,
    DEFAULT_TAU2,
    DEFAULT_TICKS_PER_QUARTER,
    DEFAULT_W2,
    DOMAIN,
    METHOD_G_PELT,
    METHOD_G_WINDOW,
    METHOD_NORM,
    MIDI_SUFFIXES,
    NORM_STAGE_CANDIDATES,
    NORM_STAGE_REFINED,
    PRESETS,
    TOLERANCE_ONE_BAR,
    TOLERANCE_ONE_BEAT,
)
from .evaluation import corpus_error_histogram, evaluate_corpus
from .exceptions import SymsegError, TooFewCandidatesError, UnpairedFileError
from .graph import adjacency, build_graph
from .models.evaluation import Annotation, Level, ToleranceKind
from .models.note import Piece
from .models.segmentation import Method, NormParams, Segmentation
from .norm_method import COMBINE_CONCAT, COMBINE_SUM, norm_analyze
from .parsers import load_annotation, load_piece, read_segmentation
from .parsers.export import (
    histogram_to_csv,
    matrix_to_csv,
    segmentation_to_json,
    signal_to_csv,
    write_report,
    write_segmentation,
    write_text,
)
from .pipeline import (
    baseline_segmentation,
    graph_novelty,
    run_method,
    window_size,
)
from .sweep import SweepPlan, SweepRow, best_params, run_sweep, segment_files

_LOGGER = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_PARTIAL = 2

PLOT_NOVELTY = "novelty"
PLOT_XHAT = "xhat"
PLOT_SSM = "ssm"
PLOT_ADJACENCY = "adjacency"
PLOT_DISCREPANCY = "discrepancy"
PLOT_KINDS = (PLOT_NOVELTY, PLOT_XHAT, PLOT_SSM, PLOT_ADJACENCY, PLOT_DISCREPANCY)

ANNOTATION_SUFFIXES = (".csv", ".json")

LOG_FORMAT = "%(log_color)s%(levelname)-8s%(reset)s %(name)s: %(message)s"


# ---------------------------------------------------------------------------
# Setup helpers
# ---------------------------------------------------------------------------


def setup_logging(verbosity: int) -> None:
    """Install a coloured stderr handler on the package logger."""
    handler = colorlog.StreamHandler(sys.stderr)
    handler.setFormatter(colorlog.ColoredFormatter(LOG_FORMAT))
    logger = logging.getLogger(DOMAIN)
    logger.handlers[:] = [handler]
    if verbosity > 0:
        logger.setLevel(logging.DEBUG)
    elif verbosity < 0:
        logger.setLevel(logging.WARNING)
    else:
        logger.setLevel(logging.INFO)


def discover_inputs(
    paths: Iterable[Path], suffixes: Sequence[str] = MIDI_SUFFIXES + CSV_SUFFIXES
) -> list[Path]:
    """Expand directories recursively into matching files, sorted.

    Explicit file paths are kept as given, even when missing, so the
    failure is reported for that file.
    """
    found: set[Path] = set()
    for path in paths:
        if path.is_dir():
            found.update(
                p
                for p in path.rglob("*")
                if p.is_file() and p.suffix.lower() in suffixes
            )
        else:
            found.add(path)
    return sorted(found)


def exit_code(succeeded: int, failed: int) -> int:
    """0 on full success, 2 on partial success, 1 when nothing succeeded."""
    if succeeded == 0:
        return EXIT_FAILURE
    return EXIT_PARTIAL if failed else EXIT_OK


def _report_failure(path: Path | str, err: Exception) -> None:
    _LOGGER.warning("%s: %s", path, err)


def _parse_list(cast: Callable[[str], Any]) -> Callable[[str], tuple[Any, ...]]:
    def parse(text: str) -> tuple[Any, ...]:
        try:
            return tuple(cast(item) for item in text.split(",") if item.strip())
        except ValueError as err:
            raise argparse.ArgumentTypeError(f"invalid list {text!r}: {err}") from err

    return parse


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"invalid number {text!r}") from err
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return value


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    group = common.add_argument_group("configuration")
    group.add_argument("--config", type=Path, help="flat key = value config file")
    group.add_argument(
        "--preset",
        choices=sorted(PRESETS),
        help="load the optimal parameters of a dataset and level",
    )
    group.add_argument(
        "--capacity-limit",
        type=int,
        dest=CONF_CAPACITY,
        help=f"maximum notes per piece (default: {DEFAULT_CAPACITY_LIMIT})",
    )
    group.add_argument(
        "--ticks-per-quarter",
        type=int,
        dest=CONF_TICKS_PER_QUARTER,
        help=f"tick resolution for CSV input (default: {DEFAULT_TICKS_PER_QUARTER})",
    )
    group.add_argument(
        "--jobs", type=int, dest=CONF_JOBS, help="worker processes (default: 1)"
    )
    group.add_argument(
        "-v", "--verbose", action="store_const", const=1, dest="verbosity"
    )
    group.add_argument(
        "-q", "--quiet", action="store_const", const=-1, dest="verbosity"
    )
    return common


def _add_method_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("method")
    group.add_argument(
        "--method",
        choices=(METHOD_G_PELT, METHOD_G_WINDOW, METHOD_NORM),
        dest=CONF_METHOD,
        help=f"segmentation method (default: {METHOD_G_PELT})",
    )
    for flag, key, cast, default, text in (
        ("--alpha", CONF_ALPHA, float, DEFAULT_ALPHA, "window scale"),
        ("--beta", CONF_BETA, float, DEFAULT_BETA, "PELT jump scale"),
        ("--penalty", CONF_PENALTY, float, DEFAULT_PENALTY, "PELT/window penalty"),
        ("--alpha1", CONF_ALPHA1, float, DEFAULT_ALPHA1, "Norm stage-one scale"),
        ("--tau1", CONF_TAU1, float, DEFAULT_TAU1, "Norm stage-one threshold"),
        ("--w2", CONF_W2, int, DEFAULT_W2, "Norm stage-two window"),
        ("--tau2", CONF_TAU2, float, DEFAULT_TAU2, "Norm stage-two threshold"),
    ):
        group.add_argument(
            flag, type=cast, dest=key, help=f"{text} (default: {default})"
        )
    group.add_argument(
        "--tick-tolerance",
        type=int,
        dest=CONF_TICK_TOLERANCE,
        help="slack in ticks for consecutive-note edges (default: 0)",
    )
    group.add_argument(
        "--combine",
        choices=(COMBINE_SUM, COMBINE_CONCAT),
        dest=CONF_COMBINE,
        help=f"Norm span feature combination (default: {COMBINE_SUM})",
    )


def _add_annotation_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--level",
        choices=[level.value for level in Level],
        default=Level.MID.value,
        help="annotation structure level (default: mid)",
    )
    parser.add_argument(
        "--patches", type=Path, help="JSON corrections for span annotations"
    )
    parser.add_argument(
        "--norm-stage",
        choices=(NORM_STAGE_CANDIDATES, NORM_STAGE_REFINED),
        dest=CONF_NORM_STAGE,
        help=f"Norm boundaries to score (default: {NORM_STAGE_REFINED})",
    )


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with every subcommand."""
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog=DOMAIN, description="Graph-based segmentation of symbolic music."
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    segment = subparsers.add_parser(
        "segment", parents=[common], help="segment MIDI or note CSV files"
    )
    segment.add_argument("inputs", nargs="+", type=Path)
    _add_method_flags(segment)
    segment.add_argument(
        "-o",
        "--output",
        type=Path,
        dest=CONF_OUTPUT,
        help="directory for <stem>.json results (default: print JSON)",
    )
    segment.set_defaults(handler=cmd_segment)

    evaluate = subparsers.add_parser(
        "evaluate", parents=[common], help="score segmentations against annotations"
    )
    evaluate.add_argument("estimates", type=Path, help="segmentation JSON dir or file")
    evaluate.add_argument("annotations", type=Path, help="annotation dir or file")
    evaluate.add_argument(
        "--tolerance",
        choices=(TOLERANCE_ONE_BEAT, TOLERANCE_ONE_BAR),
        dest=CONF_TOLERANCE,
        help=f"matching window (default: {TOLERANCE_ONE_BAR})",
    )
    _add_annotation_flags(evaluate)
    evaluate.add_argument(
        "-o",
        "--output",
        type=Path,
        dest=CONF_OUTPUT,
        help="report path prefix; writes <prefix>.json and <prefix>.csv",
    )
    evaluate.add_argument(
        "--histogram",
        type=Path,
        help="also write the pooled beat error histogram to this CSV",
    )
    evaluate.add_argument(
        "--bin-width",
        type=_positive_float,
        default=DEFAULT_HISTOGRAM_BIN_BEATS,
        help=f"histogram bin width in beats (default: {DEFAULT_HISTOGRAM_BIN_BEATS})",
    )
    evaluate.set_defaults(handler=cmd_evaluate)

    baseline = subparsers.add_parser(
        "baseline", parents=[common], help="equidistant baseline segmentations"
    )
    baseline.add_argument("inputs", nargs="+", type=Path)
    choice = baseline.add_mutually_exclusive_group()
    choice.add_argument(
        "--k", type=int, help=f"boundaries per piece (default: {BASELINE_K_SWD})"
    )
    choice.add_argument(
        "--level",
        choices=sorted(BASELINE_K_BY_LEVEL),
        help="use the boundary count of a structure level",
    )
    baseline.add_argument("-o", "--output", type=Path, dest=CONF_OUTPUT)
    baseline.set_defaults(handler=cmd_baseline)

    sweep = subparsers.add_parser(
        "sweep", parents=[common], help="parameter grid sweep"
    )
    sweep.add_argument("inputs", nargs="+", type=Path)
    sweep.add_argument(
        "--annotations", type=Path, required=True, help="annotation dir or file"
    )
    sweep.add_argument(
        "--method",
        choices=(METHOD_G_PELT, METHOD_G_WINDOW, METHOD_NORM),
        dest=CONF_METHOD,
        help=f"method to sweep (default: {METHOD_G_PELT})",
    )
    floats = _parse_list(float)
    for name in ("alpha", "beta", "penalty", "alpha1", "tau1", "tau2"):
        sweep.add_argument(
            f"--{name}", type=floats, dest=f"grid_{name}", help="comma list"
        )
    sweep.add_argument("--w2", type=_parse_list(int), dest="grid_w2", help="comma list")
    sweep.add_argument(
        "--tolerance",
        choices=(TOLERANCE_ONE_BEAT, TOLERANCE_ONE_BAR),
        dest="sweep_tolerance",
        help="score one tolerance only (default: both)",
    )
    _add_annotation_flags(sweep)
    sweep.add_argument(
        "--cache-dir", type=Path, dest=CONF_CACHE_DIR, help="segmentation cache"
    )
    sweep.add_argument(
        "-o",
        "--output",
        type=Path,
        dest=CONF_OUTPUT,
        help="table path; .json writes JSON, anything else CSV",
    )
    sweep.set_defaults(handler=cmd_sweep)

    plotdata = subparsers.add_parser(
        "plotdata", parents=[common], help="export curves and matrices as CSV"
    )
    plotdata.add_argument("input", type=Path)
    plotdata.add_argument(
        "--what", choices=PLOT_KINDS, default=PLOT_NOVELTY, help="data to export"
    )
    _add_method_flags(plotdata)
    plotdata.add_argument("-o", "--output", type=Path, dest=CONF_OUTPUT)
    plotdata.set_defaults(handler=cmd_plotdata)

    return parser


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


_CONFIG_KEYS = (
    CONF_METHOD,
    CONF_ALPHA,
    CONF_BETA,
    CONF_PENALTY,
    CONF_ALPHA1,
    CONF_TAU1,
    CONF_W2,
    CONF_TAU2,
    CONF_CAPACITY,
    CONF_TICKS_PER_QUARTER,
    CONF_TICK_TOLERANCE,
    CONF_TOLERANCE,
    CONF_NORM_STAGE,
    CONF_COMBINE,
    CONF_JOBS,
    CONF_OUTPUT,
    CONF_CACHE_DIR,
)


def config_from_args(args: argparse.Namespace) -> Config:
    """Merge flags over preset, config file and environment."""
    overrides = {key: getattr(args, key, None) for key in _CONFIG_KEYS}
    return load_config(args.config, args.preset, overrides)


def _emit(output: Path | None, default_name: str, text: str) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        write_text(output / default_name if output.is_dir() else output, text)


def _write_results(
    results: list[tuple[Path, Segmentation]], output: Path | None
) -> None:
    if output is None:
        for _, segmentation in results:
            sys.stdout.write(segmentation_to_json(segmentation))
        return
    for path, segmentation in results:
        write_segmentation(output / f"{path.stem}.json", segmentation)


def cmd_segment(args: argparse.Namespace, config: Config) -> int:
    """Segment every input on --jobs workers, one JSON result per file."""
    results: list[tuple[Path, Segmentation]] = []
    failed = 0
    outcomes = segment_files(
        discover_inputs(args.inputs),
        config.method_params,
        config.run_options,
        jobs=config.jobs,
        cache_dir=config.cache_dir,
    )
    for path, outcome in outcomes:
        if isinstance(outcome, SymsegError):
            _report_failure(path, outcome)
            failed += 1
        elif isinstance(outcome, BaseException):
            raise outcome
        else:
            results.append((path, outcome))
    _write_results(results, config.output)
    _LOGGER.info("Segmented %d files, %d failed", len(results), failed)
    return exit_code(len(results), failed)


def cmd_baseline(args: argparse.Namespace, config: Config) -> int:
    """Write equidistant baseline segmentations."""
    if args.level is not None:
        k = BASELINE_K_BY_LEVEL[args.level]
    else:
        k = args.k if args.k is not None else BASELINE_K_SWD
    results: list[tuple[Path, Segmentation]] = []
    failed = 0
    for path in discover_inputs(args.inputs):
        try:
            piece = load_piece(path, config.ticks_per_quarter)
            results.append((path, baseline_segmentation(piece, k)))
        except SymsegError as err:
            _report_failure(path, err)
            failed += 1
    _write_results(results, config.output)
    return exit_code(len(results), failed)


def load_annotations(
    root: Path, level: Level, patches: Path | None = None
) -> tuple[list[Annotation], int]:
    """Load every annotation under root; returns (annotations, failures)."""
    annotations = []
    failed = 0
    for path in discover_inputs([root], ANNOTATION_SUFFIXES):
        try:
            annotations.append(load_annotation(path, level, patches, Fraction(0)))
        except SymsegError as err:
            _report_failure(path, err)
            failed += 1
    return annotations, failed


def cmd_evaluate(args: argparse.Namespace, config: Config) -> int:
    """Score saved segmentations and print the aggregate line."""
    segmentations = []
    failed = 0
    for path in discover_inputs([args.estimates], (".json",)):
        try:
            segmentations.append(read_segmentation(path))
        except SymsegError as err:
            _report_failure(path, err)
            failed += 1
    if not segmentations:
        _LOGGER.error("No segmentations found in %s", args.estimates)
        return EXIT_FAILURE

    annotations, bad = load_annotations(
        args.annotations, Level(args.level), args.patches
    )
    failed += bad
    report = evaluate_corpus(
        annotations,
        segmentations,
        config.tolerance_kind,
        norm_stage=config.norm_stage,
        allow_unpaired=True,
    )
    if report.unpaired:
        _report_failure(args.estimates, UnpairedFileError(report.unpaired))
        failed += len(report.unpaired)

    if config.output is not None:
        prefix = config.output
        write_report(prefix.with_suffix(".json"), prefix.with_suffix(".csv"), report)
    if args.histogram is not None:
        histogram = corpus_error_histogram(
            annotations, segmentations, args.bin_width, config.norm_stage
        )
        write_text(args.histogram, histogram_to_csv(histogram))
        _LOGGER.info("Histogram of %d boundaries: %s", histogram.total, args.histogram)
    print(report.aggregate.summary)
    return exit_code(len(report.per_file), failed)


def _sweep_grid(args: argparse.Namespace) -> dict[str, tuple[float, ...]]:
    grid = {}
    for name in ("alpha", "beta", "penalty", "alpha1", "tau1", "w2", "tau2"):
        values = getattr(args, f"grid_{name}", None)
        if values:
            grid[name] = values
    return grid


def cmd_sweep(args: argparse.Namespace, config: Config) -> int:
    """Run a grid sweep and write the table."""
    method = Method(config.method)
    fixed = {
        key: float(value)
        for key, value in config.method_params.params_dict.items()
        if value is not None
    }
    files = discover_inputs(args.inputs)
    annotations, _ = load_annotations(
        args.annotations, Level(args.level), args.patches
    )
    tolerances = (
        (ToleranceKind(args.sweep_tolerance),)
        if args.sweep_tolerance
        else (ToleranceKind.ONE_BEAT, ToleranceKind.ONE_BAR)
    )
    grid = _sweep_grid(args) or {
        name: (value,) for name, value in fixed.items()
    }
    plan = SweepPlan(
        method=method,
        grid=grid,
        files=tuple(files),
        annotations=tuple(annotations),
        tolerances=tolerances,
        fixed=fixed,
        options=config.run_options,
        cache_dir=config.cache_dir,
        norm_stage=config.norm_stage,
    )
    result = run_sweep(plan, jobs=config.jobs, observers=[_ProgressLogger()])

    output = config.output
    text = result.to_json() if output and output.suffix == ".json" else result.to_csv()
    _emit(output, "sweep.csv", text)
    if result.rows:
        best = best_params(result.rows, tolerances[-1])
        _LOGGER.info("Best at %s: %s", tolerances[-1].value, best)

    failed_files = len(result.failures)
    return exit_code(len(files) - failed_files, failed_files)


class _ProgressLogger:
    """Logs sweep progress at debug level."""

    def on_file_done(self, combo: dict[str, float], file: str, ok: bool) -> None:
        _LOGGER.debug("%s %s: %s", combo, file, "ok" if ok else "failed")

    def on_row(self, row: SweepRow) -> None:
        _LOGGER.info(
            "%s %s: %s", row.params, row.tolerance.value, row.aggregate.summary
        )


def _gap_markers(segmentation: Segmentation, n_notes: int) -> list[int]:
    # boundary at note t + 1 is the change at novelty position t
    return [
        b.note_index - 1
        for b in segmentation.boundaries
        if b.note_index is not None and 0 < b.note_index < n_notes
    ]


def cmd_plotdata(args: argparse.Namespace, config: Config) -> int:
    """Export one curve or matrix of a single piece as CSV."""
    options = config.run_options
    try:
        piece = load_piece(args.input, options.ticks_per_quarter)
        text = plot_data(args.what, piece, config)
    except SymsegError as err:
        _report_failure(args.input, err)
        return EXIT_FAILURE
    _emit(config.output, f"{args.input.stem}.{args.what}.csv", text)
    return EXIT_OK


def plot_data(what: str, piece: Piece, config: Config) -> str:
    """CSV text for one plot kind."""
    options = config.run_options
    if what == PLOT_ADJACENCY:
        graph = build_graph(piece, options.tick_tolerance)
        return matrix_to_csv(adjacency(graph, options.capacity_limit).data)

    if what in (PLOT_XHAT, PLOT_SSM):
        norm = NormParams(
            alpha1=config.alpha1, tau1=config.tau1, w2=config.w2, tau2=config.tau2
        )
        result = norm_analyze(piece, norm, options.combine)
        if what == PLOT_XHAT:
            markers = [index - 1 for index in result.candidates]
            return signal_to_csv(result.features.normalized, markers)
        if result.ssm is None:
            raise TooFewCandidatesError(
                f"{len(result.candidates)} candidates, no SSM", source=piece.source_path
            )
        return matrix_to_csv(result.ssm.matrix)

    if what == PLOT_DISCREPANCY:
        cost = KernelCost.from_signal(graph_novelty(piece, options))
        window = window_size(config.alpha, piece.n_notes)
        positions, values = discrepancy(cost, window)
        found = window_detect(cost, window, SelectionRule(penalty=config.penalty))
        return signal_to_csv(values, found.interior, positions)

    values = graph_novelty(piece, options)
    segmentation = run_method(piece, config.method_params, options)
    return signal_to_csv(values, _gap_markers(segmentation, piece.n_notes))


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point of the symseg console script."""
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbosity or 0)
    try:
        config = config_from_args(args)
    except SymsegError as err:
        _LOGGER.error("%s", err)
        return EXIT_FAILURE
    handler: Callable[[argparse.Namespace, Config], int] = args.handler
    try:
        return handler(args, config)
    except SymsegError as err:
        _LOGGER.error("%s", err)
        return EXIT_FAILURE
