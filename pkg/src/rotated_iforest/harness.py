"""Experiment orchestration: score heatmaps, synthetic AUC runs, benchmarks.

Every unit of work (one algorithm on one dataset at one repetition seed) is
independent, so an optional thread pool may run them concurrently; results
are always assembled in submission order.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .datagen import BENCHMARK_PRESETS, LabeledDataset, SyntheticSpec, generate
from .eif import fit_eif
from .iforest import ForestParams, IsolationForest, fit_iforest
from .io import DatasetFile, DatasetManifest, ReportRow, load_csv
from .metrics import EvalReport, RunResult, evaluate_scores
from .rif import fit_rif
from .rng import RngState

logger = logging.getLogger(__name__)

ALGORITHMS = ("iforest", "eif", "rif")
DATA_STREAM = 99  # substream label for synthetic data, disjoint from tree indices in practice


def fit_model(algorithm: str, points, params: ForestParams, combine: str = "mean_path") -> IsolationForest:
    if algorithm == "iforest":
        return fit_iforest(points, params)
    if algorithm == "eif":
        return fit_eif(points, params)
    if algorithm == "rif":
        return fit_rif(points, params, combine=combine)
    raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}")


# --------------------------------------------------------------------------
# heatmaps


@dataclass
class HeatmapGrid:
    """Scores on a regular lattice of cell centres.

    ``scores[i, j]`` is the score at ``(xs[j], ys[i])``; row 0 is the lowest y.
    """

    xs: np.ndarray
    ys: np.ndarray
    scores: np.ndarray
    bounds: tuple[float, float, float, float]

    @property
    def shape(self) -> tuple[int, int]:
        return self.scores.shape

    def cells(self):
        """Yield ``(row, col, x, y, score)`` in row-major order."""
        for i, y in enumerate(self.ys):
            for j, x in enumerate(self.xs):
                yield i, j, float(x), float(y), float(self.scores[i, j])


def heatmap(
    scorer,
    rows: int,
    cols: int,
    bounds: tuple[float, float, float, float] = (0.0, 1.0, 0.0, 1.0),
) -> HeatmapGrid:
    """Evaluate a 2-D model on a ``rows x cols`` grid over ``(xmin, xmax, ymin, ymax)``.

    ``scorer`` is a fitted forest or any callable mapping ``(m, 2)`` points to
    ``m`` scores.
    """
    if rows < 1 or cols < 1:
        raise ValueError(f"grid must be at least 1x1, got {rows}x{cols}")
    xmin, xmax, ymin, ymax = (float(b) for b in bounds)
    if not (xmax > xmin and ymax > ymin):
        raise ValueError(f"empty heatmap bounds {bounds}")
    dim = getattr(scorer, "dim", 2)
    if dim != 2:
        raise ValueError(f"heatmap requires 2-D model, got dimension {dim}")
    score_fn = scorer.score_samples if hasattr(scorer, "score_samples") else scorer
    xs = xmin + (np.arange(cols) + 0.5) * (xmax - xmin) / cols
    ys = ymin + (np.arange(rows) + 0.5) * (ymax - ymin) / rows
    gx, gy = np.meshgrid(xs, ys)
    scores = np.asarray(score_fn(np.column_stack([gx.ravel(), gy.ravel()])), dtype=np.float64)
    return HeatmapGrid(xs, ys, scores.reshape(rows, cols), (xmin, xmax, ymin, ymax))


# --------------------------------------------------------------------------
# repetitions


def _map(fn: Callable, items: Sequence, workers: int) -> list:
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _summarize(results: list[RunResult | Exception], contamination_data: float, c_prime: float) -> EvalReport:
    runs, failures = [], []
    for i, res in enumerate(results):
        if isinstance(res, Exception):
            failures.append((i, str(res)))
        else:
            runs.append(res)
    if not runs:
        raise RuntimeError(f"all {len(results)} repetitions failed: {failures[0][1]}")
    return EvalReport(contamination_data, c_prime, runs, failures)


@dataclass
class ExperimentConfig:
    """Shared settings for synthetic and real-data runs.

    ``contamination`` maps algorithm name to the cut fraction ``c'``; missing
    algorithms use the data contamination.
    """

    algorithms: tuple[str, ...] = ALGORITHMS
    n_trees: int = 100
    psi: int = 256
    depth_limit: int | None = None
    repetitions: int = 10
    seed: int = 0
    contamination: dict[str, float] = field(default_factory=dict)
    combine: str = "mean_path"
    workers: int = 1

    def __post_init__(self) -> None:
        for algo in self.algorithms:
            if algo not in ALGORITHMS:
                raise ValueError(f"unknown algorithm {algo!r}; expected one of {ALGORITHMS}")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        for c in self.contamination.values():
            if not 0.0 <= c <= 1.0:
                raise ValueError(f"contamination must be in [0, 1], got {c}")

    def params(self, seed: int) -> ForestParams:
        return ForestParams(self.n_trees, self.psi, self.depth_limit, seed)

    def run_seeds(self) -> list[int]:
        master = RngState(self.seed)
        return [master.derive_seed(i) for i in range(self.repetitions)]


@dataclass
class SyntheticResult:
    name: str
    reports: dict[str, EvalReport]
    heatmaps: dict[str, HeatmapGrid] = field(default_factory=dict)
    dataset: LabeledDataset | None = None  # first repetition's data

    def rows(self) -> list[ReportRow]:
        return [ReportRow(self.name, algo, rep) for algo, rep in self.reports.items()]


def synthetic_dataset(spec: SyntheticSpec | str, seed: int) -> LabeledDataset:
    """Dataset for one repetition; depends only on ``(spec, seed)``."""
    return generate(spec, RngState(seed).substream(DATA_STREAM).generator())


def run_synthetic_experiment(
    spec: SyntheticSpec | str,
    config: ExperimentConfig = ExperimentConfig(),
    *,
    grid: tuple[int, int] | None = None,
    bounds: tuple[float, float, float, float] = (0.0, 1.0, 0.0, 1.0),
) -> SyntheticResult:
    """Fit every algorithm on freshly generated data for each repetition seed.

    Models are fitted on the full labelled set and scored on the same points.
    With ``grid`` set (2-D data only), the first repetition's models are also
    evaluated on a heatmap lattice.
    """
    name = spec if isinstance(spec, str) else spec.kind
    seeds = config.run_seeds()
    datasets = [synthetic_dataset(spec, s) for s in seeds]

    def job(item):
        algo, i = item
        data, seed = datasets[i], seeds[i]
        c_prime = config.contamination.get(algo, data.contamination)
        try:
            model = fit_model(algo, data.points, config.params(seed), config.combine)
            result = evaluate_scores(model.score_samples(data.points), data.labels, c_prime, seed)
        except Exception as exc:  # noqa: BLE001 - recorded per run
            logger.warning("%s/%s repetition %d failed: %s", name, algo, i, exc)
            return exc, None
        keep = model if (grid is not None and i == 0) else None
        return result, keep

    items = [(algo, i) for algo in config.algorithms for i in range(len(seeds))]
    outputs = dict(zip(items, _map(job, items, config.workers)))
    reports, heatmaps = {}, {}
    for algo in config.algorithms:
        results = [outputs[(algo, i)][0] for i in range(len(seeds))]
        c_prime = config.contamination.get(algo, datasets[0].contamination)
        reports[algo] = _summarize(results, datasets[0].contamination, c_prime)
        model = outputs[(algo, 0)][1]
        if model is not None:
            heatmaps[algo] = heatmap(model, grid[0], grid[1], bounds)
    return SyntheticResult(name, reports, heatmaps, datasets[0])


def run_synthetic_suite(
    presets: Sequence[str] = BENCHMARK_PRESETS,
    config: ExperimentConfig = ExperimentConfig(),
) -> list[SyntheticResult]:
    return [run_synthetic_experiment(p, config) for p in presets]


# --------------------------------------------------------------------------
# real datasets


@dataclass
class BenchmarkResult:
    rows: list[ReportRow]
    missing: dict[str, str]  # dataset -> reason it was skipped


def run_real_benchmark(
    files: dict[str, DatasetFile | str | Path],
    config: ExperimentConfig = ExperimentConfig(repetitions=5),
) -> BenchmarkResult:
    """Run every algorithm ``config.repetitions`` times on each dataset file.

    Unreadable or missing files are logged and skipped; the loop continues.
    """
    rows: list[ReportRow] = []
    missing: dict[str, str] = {}
    seeds = config.run_seeds()
    for name, file in files.items():
        try:
            data = load_csv(file)
        except (OSError, ValueError) as exc:
            logger.error("skipping dataset %s: %s", name, exc)
            missing[name] = str(exc)
            continue
        if data.labels.all() or not data.labels.any():
            missing[name] = "labels contain a single class"
            logger.error("skipping dataset %s: %s", name, missing[name])
            continue
        for algo in config.algorithms:
            c_prime = config.contamination.get(algo, data.contamination)

            def job(seed, algo=algo, c_prime=c_prime):
                try:
                    model = fit_model(algo, data.points, config.params(seed), config.combine)
                    return evaluate_scores(model.score_samples(data.points), data.labels, c_prime, seed)
                except Exception as exc:  # noqa: BLE001 - recorded per run
                    logger.warning("%s/%s seed %d failed: %s", name, algo, seed, exc)
                    return exc

            report = _summarize(_map(job, seeds, config.workers), data.contamination, c_prime)
            rows.append(ReportRow(name, algo, report))
            logger.info("%s %s avg AUC %.4f", name, algo, report.avg_auc)
    return BenchmarkResult(rows, missing)


def manifest_files(directory, manifests: dict[str, DatasetManifest]) -> dict[str, DatasetFile]:
    """Map manifest entries to ``<directory>/<name>.csv`` files."""
    directory = Path(directory)
    return {
        m.name: DatasetFile.from_manifest(directory / f"{m.name}.csv", m)
        for m in manifests.values()
    }
