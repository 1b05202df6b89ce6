"""Parameter grid sweeps.

Every combination of the grid is run on every file of the corpus and
scored at each requested tolerance. Per-file segmentations are cached on
disk under a hash of the file content, the method and its parameters,
so a repeated or interrupted sweep only recomputes what is missing, and
one segmentation pass serves every tolerance.

segment_files runs a plain batch of files on the same kind of worker pool.
"""

from __future__ import annotations

import asyncio
from collections.abc import Iterable, Sequence
from concurrent.futures import Executor, ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
import hashlib
import itertools
import json
import logging
import os
from pathlib import Path
import tempfile
from typing import Any

from .const import NORM_STAGE_REFINED
from .evaluation import evaluate_corpus
from .exceptions import EmptyTableError, InvalidParamsError, MalformedFileError
from .models.evaluation import AggregateScore, Annotation, ToleranceKind
from .models.segmentation import Method, MethodParams, Segmentation
from .parsers import load_piece
from .parsers.export import dumps_json, format_table
from .pipeline import RunOptions, run_method
from .protocols.sweep import ISweepObserver

_LOGGER = logging.getLogger(__name__)

# Parameter names per method, in table column and sort order.
PARAM_NAMES: dict[Method, tuple[str, ...]] = {
    Method.G_PELT: ("alpha", "beta", "penalty"),
    Method.G_WINDOW: ("alpha", "penalty"),
    Method.NORM: ("alpha1", "tau1", "w2", "tau2"),
    Method.BASELINE: ("k",),
}

SCORE_COLUMNS = ("P_mean", "P_std", "R_mean", "R_std", "F1_mean", "F1_std")


@dataclass(frozen=True)
class SweepPlan:
    """What to sweep: one method, a value grid, a corpus and its references.

    Parameters not in the grid are taken from fixed.
    """

    method: Method
    grid: dict[str, tuple[float, ...]]
    files: tuple[Path, ...]
    annotations: tuple[Annotation, ...]
    tolerances: tuple[ToleranceKind, ...] = (
        ToleranceKind.ONE_BEAT,
        ToleranceKind.ONE_BAR,
    )
    fixed: dict[str, float] = field(default_factory=dict)
    options: RunOptions = field(default_factory=RunOptions)
    cache_dir: Path | None = None
    norm_stage: str = NORM_STAGE_REFINED

    @property
    def param_names(self) -> tuple[str, ...]:
        """Parameter names of the method, in canonical order."""
        return PARAM_NAMES[self.method]

    def combos(self) -> list[dict[str, float]]:
        """Cartesian grid, sorted lexicographically by parameter values."""
        names = [name for name in self.param_names if name in self.grid]
        axes = [sorted(set(self.grid[name])) for name in names]
        return [
            {**self.fixed, **dict(zip(names, values))}
            for values in itertools.product(*axes)
        ]

    def method_params(self, combo: dict[str, float]) -> MethodParams:
        """MethodParams for one grid point."""
        try:
            return MethodParams.from_dict(self.method.value, combo)
        except KeyError as err:
            raise InvalidParamsError(f"Missing parameter {err}") from err

    def validate(self) -> None:
        """Check the grid and every grid point.

        Raises:
            InvalidParamsError: Empty grid, unknown name or invalid value.
        """
        if not self.grid or any(not values for values in self.grid.values()):
            raise InvalidParamsError("Sweep grid is empty")
        unknown = set(self.grid) - set(self.param_names)
        if unknown:
            raise InvalidParamsError(
                f"Unknown {self.method.value} parameters: {sorted(unknown)}"
            )
        if not self.files:
            raise InvalidParamsError("Sweep corpus is empty")
        for combo in self.combos():
            self.method_params(combo).validate()


@dataclass(frozen=True)
class SweepRow:
    """Aggregate scores of one grid point at one tolerance."""

    params: dict[str, float]
    tolerance: ToleranceKind
    aggregate: AggregateScore
    n_files: int

    def as_dict(self) -> dict[str, Any]:
        """Flat dict: parameters, tolerance, scores, file count."""
        return {
            **self.params,
            "tolerance": self.tolerance.value,
            **self.aggregate.as_dict(),
            "n_files": self.n_files,
        }


@dataclass(frozen=True)
class SweepResult:
    """Sweep table plus the files that failed."""

    method: Method
    rows: tuple[SweepRow, ...]
    failures: tuple[tuple[str, str], ...] = ()
    cache_hits: int = 0
    computed: int = 0

    def to_csv(self) -> str:
        """One row per combination and tolerance; failures as # footer lines."""
        names = PARAM_NAMES[self.method]
        header = (*names, "tolerance", *SCORE_COLUMNS, "n_files")
        text = format_table(
            header,
            (
                (
                    *(row.params.get(name) for name in names),
                    row.tolerance.value,
                    *row.aggregate.as_dict().values(),
                    row.n_files,
                )
                for row in self.rows
            ),
        )
        footer = "".join(
            f"# failed: {file}: {error}\n" for file, error in self.failures
        )
        return text + footer

    def to_json(self) -> str:
        """Rows and failures as JSON."""
        return dumps_json(
            {
                "method": self.method.value,
                "rows": [row.as_dict() for row in self.rows],
                "failures": [
                    {"file": file, "error": error} for file, error in self.failures
                ],
            }
        )


class SegmentationCache:
    """Content-addressed store of per-file segmentations."""

    def __init__(self, directory: Path) -> None:
        """Initialize the cache under directory."""
        self._directory = directory

    @staticmethod
    def key(data: bytes, params: MethodParams, options: RunOptions) -> str:
        """Hash of file content, method, parameters and run options."""
        payload = json.dumps(
            {
                "content": hashlib.sha256(data).hexdigest(),
                "method": params.method.value,
                "params": params.params_dict,
                "options": asdict(options),
            },
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    def _path(self, key: str) -> Path:
        return self._directory / key[:2] / f"{key}.json"

    def get(self, key: str) -> Segmentation | None:
        """Cached segmentation, or None when missing or unreadable."""
        path = self._path(key)
        if not path.exists():
            return None
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
            return Segmentation.from_dict(data)
        except (OSError, ValueError, KeyError, TypeError) as err:
            _LOGGER.warning("Ignoring corrupt cache entry %s: %s", path, err)
            return None

    def put(self, key: str, segmentation: Segmentation) -> None:
        """Store a segmentation."""
        path = self._path(key)
        path.parent.mkdir(parents=True, exist_ok=True)
        # one temp file per writer; concurrent workers may store the same key
        with tempfile.NamedTemporaryFile(
            "w", encoding="utf-8", dir=path.parent, suffix=".tmp", delete=False
        ) as handle:
            handle.write(dumps_json(segmentation.as_dict()))
        os.replace(handle.name, path)


def segment_cached(
    path: Path,
    params: MethodParams,
    options: RunOptions,
    cache_dir: Path | None,
) -> tuple[Segmentation, bool]:
    """Segment one file, reusing a cached result when present.

    Runs in worker processes, so it only takes picklable arguments.

    Returns:
        (segmentation, True if it came from the cache).
    """
    if cache_dir is None:
        piece = load_piece(path, options.ticks_per_quarter)
        return run_method(piece, params, options), False

    cache = SegmentationCache(cache_dir)
    try:
        data = path.read_bytes()
    except OSError as err:
        raise MalformedFileError(f"Unreadable file: {err}", source=str(path)) from err
    key = SegmentationCache.key(data, params, options)
    cached = cache.get(key)
    if cached is not None:
        # identical content may live under another name
        return replace(cached, piece_ref=str(path)), True

    piece = load_piece(path, options.ticks_per_quarter)
    segmentation = run_method(piece, params, options)
    cache.put(key, segmentation)
    return segmentation, False


def pool_executor(jobs: int) -> Executor:
    """One worker thread for a single job, otherwise a process pool.

    Raises:
        InvalidParamsError: jobs < 1.
    """
    if jobs < 1:
        raise InvalidParamsError(f"jobs must be >= 1, got {jobs}")
    if jobs == 1:
        return ThreadPoolExecutor(max_workers=1)
    return ProcessPoolExecutor(max_workers=jobs)


async def async_segment_files(
    paths: Sequence[Path],
    params: MethodParams,
    options: RunOptions,
    jobs: int = 1,
    cache_dir: Path | None = None,
) -> list[Segmentation | BaseException]:
    """Segment files in parallel; one result or exception per path, in order."""
    loop = asyncio.get_running_loop()
    with pool_executor(jobs) as executor:
        tasks = [
            loop.run_in_executor(
                executor, segment_cached, path, params, options, cache_dir
            )
            for path in paths
        ]
        results = await asyncio.gather(*tasks, return_exceptions=True)
    return [
        result if isinstance(result, BaseException) else result[0]
        for result in results
    ]


def segment_files(
    paths: Iterable[Path],
    params: MethodParams,
    options: RunOptions,
    jobs: int = 1,
    cache_dir: Path | None = None,
) -> list[tuple[Path, Segmentation | BaseException]]:
    """Segment files from synchronous code, sorted by path."""
    ordered = sorted(paths)
    _LOGGER.info("Segmenting %d files (%d jobs)", len(ordered), jobs)
    results = asyncio.run(
        async_segment_files(ordered, params, options, jobs, cache_dir)
    )
    return list(zip(ordered, results))


class SweepRunner:
    """Runs a SweepPlan over a worker pool.

    Results are assembled in plan order, so the table does not depend on
    which worker finishes first.
    """

    def __init__(self, plan: SweepPlan, jobs: int = 1) -> None:
        """Initialize the runner.

        Args:
            plan: Sweep to run.
            jobs: Worker processes; 1 runs in a single worker thread.
        """
        if jobs < 1:
            raise InvalidParamsError(f"jobs must be >= 1, got {jobs}")
        self._plan = plan
        self._jobs = jobs
        self._observers: list[ISweepObserver] = []

    def register_observer(self, observer: ISweepObserver) -> None:
        """Register a progress observer."""
        if observer not in self._observers:
            self._observers.append(observer)

    def unregister_observer(self, observer: ISweepObserver) -> None:
        """Unregister a progress observer."""
        if observer in self._observers:
            self._observers.remove(observer)

    def _notify_file(self, combo: dict[str, float], file: str, ok: bool) -> None:
        for observer in self._observers:
            try:
                observer.on_file_done(combo, file, ok)
            except Exception as err:
                _LOGGER.warning("Observer notification failed: %s", err)

    def _notify_row(self, row: SweepRow) -> None:
        for observer in self._observers:
            try:
                observer.on_row(row)
            except Exception as err:
                _LOGGER.warning("Observer notification failed: %s", err)

    async def _run_one(
        self,
        executor: Executor,
        combo: dict[str, float],
        path: Path,
    ) -> tuple[Segmentation, bool]:
        loop = asyncio.get_running_loop()
        plan = self._plan
        try:
            result = await loop.run_in_executor(
                executor,
                segment_cached,
                path,
                plan.method_params(combo),
                plan.options,
                plan.cache_dir,
            )
        except Exception:
            self._notify_file(combo, str(path), False)
            raise
        self._notify_file(combo, str(path), True)
        return result

    async def async_run(self) -> SweepResult:
        """Run every grid point on every file (parallel) and score them."""
        plan = self._plan
        plan.validate()
        combos = plan.combos()
        referenced = {Path(a.source).stem for a in plan.annotations}
        files = [path for path in plan.files if path.stem in referenced]
        failures: dict[str, str] = {
            str(path): "no annotation"
            for path in plan.files
            if path.stem not in referenced
        }
        _LOGGER.info(
            "Sweeping %d combinations over %d files (%d jobs)",
            len(combos),
            len(files),
            self._jobs,
        )

        with pool_executor(self._jobs) as executor:
            tasks = [
                self._run_one(executor, combo, path)
                for combo in combos
                for path in files
            ]
            results = await asyncio.gather(*tasks, return_exceptions=True)

        rows: list[SweepRow] = []
        cache_hits = computed = 0
        per_combo = len(files)
        for index, combo in enumerate(combos):
            segmentations = []
            chunk = results[index * per_combo : (index + 1) * per_combo]
            for path, result in zip(files, chunk):
                if isinstance(result, BaseException):
                    _LOGGER.warning("%s failed: %s", path, result)
                    message = str(result) or type(result).__name__
                    failures.setdefault(str(path), message)
                    continue
                segmentation, from_cache = result
                segmentations.append(segmentation)
                cache_hits += from_cache
                computed += not from_cache

            stems = {Path(s.piece_ref).stem for s in segmentations}
            annotations = [
                a for a in plan.annotations if Path(a.source).stem in stems
            ]
            params = {name: combo[name] for name in plan.param_names if name in combo}
            for tolerance in plan.tolerances:
                report = evaluate_corpus(
                    annotations,
                    segmentations,
                    tolerance,
                    norm_stage=plan.norm_stage,
                    allow_unpaired=True,
                )
                row = SweepRow(
                    params=params,
                    tolerance=tolerance,
                    aggregate=report.aggregate,
                    n_files=len(report.per_file),
                )
                rows.append(row)
                self._notify_row(row)

        return SweepResult(
            method=plan.method,
            rows=tuple(rows),
            failures=tuple(sorted(failures.items())),
            cache_hits=cache_hits,
            computed=computed,
        )


def run_sweep(
    plan: SweepPlan, jobs: int = 1, observers: Iterable[ISweepObserver] = ()
) -> SweepResult:
    """Run a sweep to completion from synchronous code."""
    runner = SweepRunner(plan, jobs)
    for observer in observers:
        runner.register_observer(observer)
    return asyncio.run(runner.async_run())


def _tie_key(row: SweepRow) -> tuple[float, ...]:
    names = ("alpha", "beta", "penalty")
    rest = sorted(set(row.params) - set(names))
    values = [row.params.get(name, 0.0) for name in (*names, *rest)]
    return (-row.aggregate.f1_mean, *values)


def best_params(
    rows: Sequence[SweepRow], tolerance: ToleranceKind | None = None
) -> dict[str, float]:
    """Parameters of the row with the highest mean F1.

    Ties go to the smaller alpha, then beta, then penalty.

    Args:
        rows: Sweep table rows.
        tolerance: Only consider rows at this tolerance.

    Raises:
        EmptyTableError: No rows to choose from.
    """
    candidates = [
        row for row in rows if tolerance is None or row.tolerance is tolerance
    ]
    if not candidates:
        raise EmptyTableError()
    return dict(min(candidates, key=_tie_key).params)
