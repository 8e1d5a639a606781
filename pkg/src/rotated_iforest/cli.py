"""Command-line entry point: ``rif-bench <command> [options]``."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from . import io
from .datagen import PRESETS, SyntheticSpec, generate
from .harness import (
    ALGORITHMS,
    ExperimentConfig,
    fit_model,
    heatmap,
    manifest_files,
    run_real_benchmark,
    run_synthetic_experiment,
)
from .iforest import ForestParams
from .metrics import label_by_contamination
from .rif import COMBINERS
from .rng import RngState

logger = logging.getLogger("rotated_iforest")


def _grid(text: str) -> tuple[int, int]:
    try:
        rows, cols = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like 100x100, got {text!r}") from None
    if rows < 1 or cols < 1:
        raise argparse.ArgumentTypeError("grid dimensions must be positive")
    return rows, cols


def _bounds(text: str) -> tuple[float, float, float, float]:
    try:
        values = tuple(float(v) for v in text.split(","))
    except ValueError:
        values = ()
    if len(values) != 4:
        raise argparse.ArgumentTypeError(f"bounds must be xmin,xmax,ymin,ymax, got {text!r}")
    return values


def _contamination(text: str) -> dict[str, float] | float:
    """``0.1`` for every algorithm or ``iforest=0.2,rif=0.05`` per algorithm."""
    try:
        if "=" not in text:
            return float(text)
        out = {}
        for part in text.split(","):
            algo, value = part.split("=")
            if algo.strip() not in ALGORITHMS:
                raise argparse.ArgumentTypeError(f"unknown algorithm {algo!r}")
            out[algo.strip()] = float(value)
        return out
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad contamination {text!r}") from None


def _algos(text: str) -> tuple[str, ...]:
    algos = ALGORITHMS if text == "all" else tuple(a.strip() for a in text.split(","))
    for algo in algos:
        if algo not in ALGORITHMS:
            raise argparse.ArgumentTypeError(f"unknown algorithm {algo!r}; expected one of {ALGORITHMS}")
    return algos


def _add_forest_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trees", type=int, default=100)
    p.add_argument("--psi", type=int, default=256)
    p.add_argument("--depth-limit", type=int, default=None)
    p.add_argument("--combine", choices=COMBINERS, default="mean_path", help="RIF score combination")


def _add_data_args(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--data", type=Path, required=required, help="CSV with a header row")
    p.add_argument("--label-column", default="label")
    p.add_argument("--normal-value", default="0")
    p.add_argument("--anomaly-value", default="1")


def _dataset_file(args, require_labels: bool) -> io.DatasetFile:
    return io.DatasetFile(
        args.data, args.label_column, args.normal_value, args.anomaly_value,
        require_labels=require_labels,
    )


def _config(args, algos) -> ExperimentConfig:
    cont = args.contamination
    if cont is None:
        cont = {}
    elif isinstance(cont, float):
        cont = {a: cont for a in algos}
    return ExperimentConfig(
        algorithms=algos, n_trees=args.trees, psi=args.psi, depth_limit=args.depth_limit,
        repetitions=args.repetitions, seed=args.seed, contamination=cont,
        combine=args.combine, workers=args.workers,
    )


def _write_text(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


# --------------------------------------------------------------------------
# commands


def cmd_synth(args) -> int:
    spec = PRESETS[args.kind]
    if args.n_normal is not None:
        spec = SyntheticSpec(spec.kind, args.n_normal, spec.anomalies, spec.params)
    data = generate(spec, RngState(args.seed).generator())
    io.save_csv(data, args.out)
    logger.info("wrote %d points (%d anomalies) to %s", data.n, int(data.labels.sum()), args.out)
    return 0


def cmd_fit(args) -> int:
    data = io.load_csv(_dataset_file(args, require_labels=False))
    params = ForestParams(args.trees, args.psi, args.depth_limit, args.seed)
    model = fit_model(args.algo, data.points, params, args.combine)
    io.save_model(model, args.out)
    logger.info("saved %s model (%d trees, d=%d) to %s", args.algo, args.trees, data.dim, args.out)
    return 0


def cmd_score(args) -> int:
    model = io.load_model(args.model)
    data = io.load_csv(_dataset_file(args, require_labels=False))
    scores = model.score_samples(data.points)
    predicted = label_by_contamination(scores, args.contamination) if args.contamination is not None else None
    lines = []
    header = ["index", "score"] + (["predicted"] if predicted is not None else [])
    for i, s in enumerate(scores):
        lines.append([i, repr(float(s))] + ([int(predicted[i])] if predicted is not None else []))
    handle = sys.stdout if args.out is None else args.out.open("w", newline="", encoding="utf-8")
    try:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(lines)
    finally:
        if handle is not sys.stdout:
            handle.close()
    return 0


def cmd_eval(args) -> int:
    config = _config(args, args.algo)
    if args.preset:
        result = run_synthetic_experiment(args.preset, config)
        rows = result.rows()
    elif args.data:
        bench = run_real_benchmark({args.data.stem: _dataset_file(args, require_labels=True)}, config)
        if bench.missing:
            for name, reason in bench.missing.items():
                logger.error("%s: %s", name, reason)
            return 1
        rows = bench.rows
    else:
        raise SystemExit("eval needs --preset or --data")
    _write_text(io.format_report(rows, args.format), args.out)
    if args.details:
        args.details.write_text(io.format_details(rows), encoding="utf-8")
    return 0


def cmd_heatmap(args) -> int:
    if args.model:
        model = io.load_model(args.model)
    else:
        if args.preset:
            data = generate(args.preset, RngState(args.seed).generator())
        elif args.data:
            data = io.load_csv(_dataset_file(args, require_labels=False))
        else:
            raise SystemExit("heatmap needs --model, --preset or --data")
        params = ForestParams(args.trees, args.psi, args.depth_limit, args.seed)
        model = fit_model(args.algo, data.points, params, args.combine)
    grid = heatmap(model, args.grid[0], args.grid[1], args.bounds)
    _write_text(io.format_heatmap_csv(grid), args.out)
    if args.pgm:
        io.write_pgm(grid, args.pgm)
    return 0


def cmd_bench(args) -> int:
    names = [n.lower() for n in args.datasets] if args.datasets else list(io.REAL_DATASETS)
    unknown = [n for n in names if n not in io.REAL_DATASETS]
    if unknown:
        raise SystemExit(f"unknown datasets {unknown}; known: {sorted(io.REAL_DATASETS)}")
    files = manifest_files(args.data_dir, {n: io.REAL_DATASETS[n] for n in names})
    result = run_real_benchmark(files, _config(args, args.algo))
    for name, reason in result.missing.items():
        logger.warning("skipped %s: %s", name, reason)
    _write_text(io.format_report(result.rows, args.format), args.out)
    if args.details:
        args.details.write_text(io.format_details(result.rows), encoding="utf-8")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rif-bench", description="Isolation forest variants and benchmarks")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic labelled dataset")
    p.add_argument("--kind", choices=sorted(PRESETS), required=True)
    p.add_argument("--n", "--n-normal", dest="n_normal", type=int, default=None, help="number of normal points")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("fit", help="fit a model and save it")
    _add_data_args(p)
    _add_forest_args(p)
    p.add_argument("--algo", choices=ALGORITHMS, default="rif")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("score", help="score a CSV with a saved model")
    _add_data_args(p)
    p.add_argument("--model", type=Path, required=True)
    p.add_argument("--contamination", type=float, default=None)
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(func=cmd_score)

    for name, func, reps, help_text in (
        ("eval", cmd_eval, 10, "repeated AUC evaluation on one dataset"),
        ("bench", cmd_bench, 5, "real-dataset benchmark over the manifest"),
    ):
        p = sub.add_parser(name, help=help_text)
        if name == "eval":
            _add_data_args(p, required=False)
            p.add_argument("--preset", choices=sorted(PRESETS))
        else:
            p.add_argument("--data-dir", type=Path, required=True, help="directory of <Name>.csv files")
            p.add_argument("--datasets", nargs="*", default=None)
        _add_forest_args(p)
        p.add_argument("--algo", type=_algos, default=ALGORITHMS, help="comma list or 'all'")
        p.add_argument("--repetitions", type=int, default=reps)
        p.add_argument("--contamination", type=_contamination, default=None)
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--format", choices=("csv", "text"), default="csv")
        p.add_argument("--details", type=Path, default=None, help="per-run CSV")
        p.add_argument("--out", type=Path, default=None)
        p.set_defaults(func=func)

    p = sub.add_parser("heatmap", help="score a 2-D model on a grid")
    _add_data_args(p, required=False)
    _add_forest_args(p)
    p.add_argument("--model", type=Path, default=None)
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--algo", choices=ALGORITHMS, default="rif")
    p.add_argument("--grid", type=_grid, default=(100, 100))
    p.add_argument("--bounds", type=_bounds, default=(0.0, 1.0, 0.0, 1.0))
    p.add_argument("--pgm", type=Path, default=None)
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(func=cmd_heatmap)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        logger.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
