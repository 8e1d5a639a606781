"""File formats: labelled CSV datasets, binary model files, report tables.

Model file layout (all integers unsigned little-endian unless noted, every
array preceded by its element count as u64)::

    magic        4 bytes  b"RIFM"
    version      u32      MODEL_VERSION
    algorithm    u8       0 = iforest, 1 = eif, 2 = rif
    combine      u8       0 = mean_path, 1 = mean_score (rif only)
    n_trees      u64
    psi          u64      requested subsample size
    depth_limit  u64
    seed         u64
    dim          u64
    per tree:
        psi      u64      points the tree was grown on
        kind     [u8]     0 leaf, 1 axis split, 2 hyperplane split
        left     [i64]
        right    [i64]
        feature  [i64]
        threshold[f64]
        size     [i64]
        level    [i64]
        has_hyp  u8
        normal   [f64]    n_nodes * dim, row-major (only if has_hyp)
        intercept[f64]    n_nodes * dim, row-major (only if has_hyp)
    per tree (rif only):
        rotation [f64]    dim * dim, row-major
"""

from __future__ import annotations

import csv
import io as _stdio
import logging
import math
import struct
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .datagen import LabeledDataset
from .eif import ExtendedForest
from .iforest import ForestParams, IsolationForest
from .rif import COMBINERS, RotatedForest
from .rotation import RotationMatrix
from .tree import ITree

logger = logging.getLogger(__name__)

MAGIC = b"RIFM"
MODEL_VERSION = 1
ALGORITHMS = {"iforest": (0, IsolationForest), "eif": (1, ExtendedForest), "rif": (2, RotatedForest)}
_ALGO_BY_TAG = {tag: (name, cls) for name, (tag, cls) in ALGORITHMS.items()}


class DatasetError(ValueError):
    pass


class ModelFormatError(ValueError):
    pass


# --------------------------------------------------------------------------
# datasets


@dataclass(frozen=True)
class DatasetManifest:
    """Expected shape and label mapping of a benchmark dataset."""

    name: str
    size: int
    dim: int
    normal_value: str
    anomaly_value: str
    n_anomalies: int
    label_column: str | None = None  # None: last column

    @property
    def contamination(self) -> float:
        return self.n_anomalies / self.size


REAL_DATASETS: dict[str, DatasetManifest] = {
    m.name.lower(): m
    for m in [
        DatasetManifest("Ionosphere", 351, 33, "g", "B", 126),
        DatasetManifest("Http", 567467, 3, "0", "1", 2213),
        DatasetManifest("Satellite", 6435, 36, "Normal", "Anomaly", 2059),
        DatasetManifest("Shuttle", 57990, 9, "0", "1", 3501),
        DatasetManifest("Smtp", 96554, 38, "0", "1", 1183),
        DatasetManifest("Cardio", 1831, 21, "0", "1", 190),
        DatasetManifest("ForestCover", 286047, 11, "2", "4", 2747),
        DatasetManifest("Mammography", 11183, 6, "-1", "1", 259),
        DatasetManifest("Pima", 1832, 21, "0", "1", 641),
        DatasetManifest("backdoor", 95329, 196, "0", "1", 2330),
        DatasetManifest("census", 299285, 500, "0", "1", 18569),
        DatasetManifest("madelon", 2600, 501, "0", "1", 1301),
        DatasetManifest("musk", 6598, 168, "1", "0", 1018),
        DatasetManifest("scene", 2407, 300, "1", "0", 432),
        DatasetManifest("Arrhythmia", 420, 271, "1", "0", 208),
        DatasetManifest("SpamBase", 4601, 58, "0", "1", 1814),
        DatasetManifest("DDos", 66237, 79, "DDoS", "BENIGN", 31285),
        DatasetManifest("Oil-Spill", 937, 50, "-1", "1", 42),
    ]
}


@dataclass(frozen=True)
class DatasetFile:
    """Where a labelled CSV lives and how to read its label column.

    ``label_column=None`` means the last column. With ``require_labels=False``
    a file lacking the label column loads as unlabelled.
    """

    path: Path | str
    label_column: str | None = "label"
    normal_value: str = "0"
    anomaly_value: str = "1"
    manifest: DatasetManifest | None = None
    require_labels: bool = True

    @classmethod
    def from_manifest(cls, path, manifest: DatasetManifest) -> DatasetFile:
        return cls(
            path,
            label_column=manifest.label_column,
            normal_value=manifest.normal_value,
            anomaly_value=manifest.anomaly_value,
            manifest=manifest,
        )


def load_csv(file: DatasetFile | str | Path) -> LabeledDataset:
    """Read a header + feature columns + label column CSV.

    Labels are matched as exact strings against the normal/anomaly values.
    Empty or non-finite cells are rejected. Manifest size/dimension
    mismatches only warn. Unlabelled files get an all-False label array.
    """
    if not isinstance(file, DatasetFile):
        file = DatasetFile(file)
    path = Path(file.path)
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None:
            raise DatasetError(f"{path}: no rows (empty file)")
        header = [h.strip() for h in header]
        if file.label_column is None:
            label_idx: int | None = len(header) - 1
        elif file.label_column in header:
            label_idx = header.index(file.label_column)
        elif file.require_labels:
            raise DatasetError(f"{path}: label column {file.label_column!r} not in header {header}")
        else:
            label_idx = None
        feature_idx = [i for i in range(len(header)) if i != label_idx]
        if not feature_idx:
            raise DatasetError(f"{path}: no feature columns")
        rows: list[list[float]] = []
        labels: list[bool] = []
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise DatasetError(
                    f"{path}:{line_no}: expected {len(header)} cells, found {len(row)}"
                )
            values = []
            for i in feature_idx:
                cell = row[i].strip()
                if not cell:
                    raise DatasetError(f"{path}:{line_no}: column {header[i]!r}: missing value")
                try:
                    value = float(cell)
                except ValueError:
                    raise DatasetError(
                        f"{path}:{line_no}: column {header[i]!r}: cannot parse {cell!r} as a number"
                    ) from None
                if not math.isfinite(value):
                    raise DatasetError(
                        f"{path}:{line_no}: column {header[i]!r}: missing or non-finite value {cell!r}"
                    )
                values.append(value)
            rows.append(values)
            if label_idx is not None:
                raw = row[label_idx].strip()
                if raw == file.anomaly_value:
                    labels.append(True)
                elif raw == file.normal_value:
                    labels.append(False)
                else:
                    raise DatasetError(
                        f"{path}:{line_no}: unknown label {raw!r}; expected "
                        f"{file.normal_value!r} (normal) or {file.anomaly_value!r} (anomaly)"
                    )
            else:
                labels.append(False)
    if not rows:
        raise DatasetError(f"{path}: no rows")
    points = np.array(rows, dtype=np.float64)
    dataset = LabeledDataset(points, np.array(labels, dtype=bool), path.stem)
    if file.manifest is not None:
        _check_manifest(dataset, file.manifest)
    return dataset


def _check_manifest(dataset: LabeledDataset, manifest: DatasetManifest) -> None:
    problems = []
    if dataset.n != manifest.size:
        problems.append(f"{dataset.n} rows (manifest says {manifest.size})")
    if dataset.dim != manifest.dim:
        problems.append(f"{dataset.dim} features (manifest says {manifest.dim})")
    if problems:
        message = f"{manifest.name}: " + ", ".join(problems)
        logger.warning(message)
        warnings.warn(message, stacklevel=3)


def save_csv(dataset: LabeledDataset, path, feature_names: Iterable[str] | None = None) -> None:
    """Write features (shortest round-trip float text) and a 0/1 ``label`` column."""
    names = list(feature_names) if feature_names else [f"x{j}" for j in range(dataset.dim)]
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow([*names, "label"])
        for row, label in zip(dataset.points, dataset.labels):
            writer.writerow([repr(float(v)) for v in row] + [int(label)])


# --------------------------------------------------------------------------
# models


class _Writer:
    def __init__(self) -> None:
        self.buf = _stdio.BytesIO()

    def pack(self, fmt: str, *values) -> None:
        self.buf.write(struct.pack("<" + fmt, *values))

    def array(self, values: np.ndarray, dtype: str) -> None:
        values = np.ascontiguousarray(values, dtype=np.dtype(dtype).newbyteorder("<"))
        self.pack("Q", values.size)
        self.buf.write(values.tobytes())


class _Reader:
    def __init__(self, data: bytes) -> None:
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if n < 0 or self.pos + n > len(self.data):
            raise ModelFormatError("truncated model file")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str):
        fmt = "<" + fmt
        values = struct.unpack(fmt, self.take(struct.calcsize(fmt)))
        return values if len(values) > 1 else values[0]

    def array(self, dtype: str, expected: int | None = None) -> np.ndarray:
        count = self.unpack("Q")
        if expected is not None and count != expected:
            raise ModelFormatError(f"corrupt model file: array of {count} values, expected {expected}")
        dt = np.dtype(dtype).newbyteorder("<")
        return np.frombuffer(self.take(count * dt.itemsize), dtype=dt).astype(dtype)


def model_to_bytes(forest: IsolationForest) -> bytes:
    if forest.algorithm not in ALGORITHMS:
        raise ModelFormatError(f"unknown algorithm {forest.algorithm!r}")
    w = _Writer()
    w.buf.write(MAGIC)
    w.pack("I", MODEL_VERSION)
    combine = COMBINERS.index(getattr(forest, "combine", "mean_path"))
    w.pack("BB", ALGORITHMS[forest.algorithm][0], combine)
    p = forest.params
    w.pack("QQQQQ", p.n_trees, p.psi, p.depth_limit, p.seed, forest.dim)
    for tree in forest.trees:
        w.pack("Q", tree.psi)
        w.array(tree.kind, "u1")
        w.array(tree.left, "i8")
        w.array(tree.right, "i8")
        w.array(tree.feature, "i8")
        w.array(tree.threshold, "f8")
        w.array(tree.size, "i8")
        w.array(tree.level, "i8")
        has_hyp = tree.normal is not None
        w.pack("B", int(has_hyp))
        if has_hyp:
            w.array(tree.normal.ravel(), "f8")
            w.array(tree.intercept.ravel(), "f8")
    if forest.algorithm == "rif":
        for rot in forest.rotations:
            w.array(rot.q.ravel(), "f8")
    return w.buf.getvalue()


def model_from_bytes(data: bytes) -> IsolationForest:
    r = _Reader(data)
    magic = r.take(4)
    if magic != MAGIC:
        raise ModelFormatError(f"not a model file (magic {magic!r}, expected {MAGIC!r})")
    version = r.unpack("I")
    if version != MODEL_VERSION:
        raise ModelFormatError(
            f"model format version mismatch: file has version {version}, "
            f"this library reads version {MODEL_VERSION}"
        )
    tag, combine_tag = r.unpack("BB")
    if tag not in _ALGO_BY_TAG:
        raise ModelFormatError(f"unknown algorithm tag {tag}")
    if combine_tag >= len(COMBINERS):
        raise ModelFormatError(f"unknown combine tag {combine_tag}")
    name, cls = _ALGO_BY_TAG[tag]
    n_trees, psi, depth_limit, seed, dim = r.unpack("QQQQQ")
    params = ForestParams(n_trees=n_trees, psi=psi, depth_limit=depth_limit, seed=seed)
    trees = []
    for _ in range(n_trees):
        tree_psi = r.unpack("Q")
        kind = r.array("u1")
        n = kind.size
        left = r.array("i8", n)
        right = r.array("i8", n)
        feature = r.array("i8", n)
        threshold = r.array("f8", n)
        size = r.array("i8", n)
        level = r.array("i8", n)
        normal = intercept = None
        if r.unpack("B"):
            normal = r.array("f8", n * dim).reshape(n, dim)
            intercept = r.array("f8", n * dim).reshape(n, dim)
        trees.append(
            ITree(
                dim=dim, kind=kind, left=left, right=right, feature=feature,
                threshold=threshold, size=size, level=level, depth_limit=depth_limit,
                psi=tree_psi, normal=normal, intercept=intercept,
            )
        )
    if name == "rif":
        rotations = [RotationMatrix(r.array("f8", dim * dim).reshape(dim, dim)) for _ in range(n_trees)]
        forest = RotatedForest(params, trees, dim, rotations, combine=COMBINERS[combine_tag])
    else:
        forest = cls(params, trees, dim)
    if r.pos != len(data):
        raise ModelFormatError(f"trailing bytes after model ({len(data) - r.pos})")
    return forest


def save_model(forest: IsolationForest, path) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(model_to_bytes(forest))
    tmp.replace(path)


def load_model(path) -> IsolationForest:
    return model_from_bytes(Path(path).read_bytes())


# --------------------------------------------------------------------------
# reports

REPORT_COLUMNS = (
    "dataset",
    "algorithm",
    "avg_auc",
    "max_auc",
    "contamination",
    "data_contamination",
    "avg_auc_at_contamination",
    "avg_precision",
    "avg_recall",
    "repetitions",
)
DETAIL_COLUMNS = (
    "dataset", "algorithm", "repetition", "seed",
    "auc", "auc_at_contamination", "precision", "recall",
)


@dataclass
class ReportRow:
    dataset: str
    algorithm: str
    report: object  # metrics.EvalReport

    def cells(self) -> list[str]:
        rep = self.report
        return [
            self.dataset,
            self.algorithm,
            f"{rep.avg_auc:.4f}",
            f"{rep.max_auc:.4f}",
            f"{rep.contamination_algo:.4f}",
            f"{rep.contamination_data:.4f}",
            f"{rep.avg_auc_at_contamination:.4f}",
            f"{np.mean([r.precision for r in rep.runs]):.4f}",
            f"{np.mean([r.recall for r in rep.runs]):.4f}",
            str(len(rep.runs)),
        ]


def format_report(rows: list[ReportRow], fmt: str = "csv") -> str:
    table = [list(REPORT_COLUMNS)] + [row.cells() for row in rows]
    if fmt == "csv":
        out = _stdio.StringIO()
        csv.writer(out, lineterminator="\n").writerows(table)
        return out.getvalue()
    if fmt == "text":
        widths = [max(len(r[i]) for r in table) for i in range(len(REPORT_COLUMNS))]
        lines = []
        for k, r in enumerate(table):
            lines.append("  ".join(c.ljust(w) if i < 2 else c.rjust(w) for i, (c, w) in enumerate(zip(r, widths))).rstrip())
            if k == 0:
                lines.append("  ".join("-" * w for w in widths))
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown report format {fmt!r}; expected 'csv' or 'text'")


def format_details(rows: list[ReportRow]) -> str:
    out = _stdio.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(DETAIL_COLUMNS)
    for row in rows:
        for i, run in enumerate(row.report.runs):
            writer.writerow([
                row.dataset, row.algorithm, i, run.seed,
                f"{run.auc:.4f}", f"{run.auc_at_contamination:.4f}",
                f"{run.precision:.4f}", f"{run.recall:.4f}",
            ])
    return out.getvalue()


def emit_report(rows: list[ReportRow], path, fmt: str = "csv") -> None:
    Path(path).write_text(format_report(rows, fmt), encoding="utf-8")


# --------------------------------------------------------------------------
# heatmaps


def format_heatmap_csv(grid) -> str:
    out = _stdio.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["row", "col", "x", "y", "score"])
    for i, j, x, y, s in grid.cells():
        writer.writerow([i, j, repr(x), repr(y), repr(s)])
    return out.getvalue()


def write_heatmap_csv(grid, path) -> None:
    Path(path).write_text(format_heatmap_csv(grid), encoding="utf-8")


def heatmap_to_pgm(grid) -> bytes:
    """Binary 8-bit PGM; score 0 is white, 1 is black, top row is the highest y."""
    scores = np.clip(np.asarray(grid.scores, dtype=np.float64), 0.0, 1.0)
    pixels = np.rint(255.0 * (1.0 - scores)).astype(np.uint8)[::-1]
    rows, cols = pixels.shape
    return f"P5\n{cols} {rows}\n255\n".encode("ascii") + pixels.tobytes()


def write_pgm(grid, path) -> None:
    Path(path).write_bytes(heatmap_to_pgm(grid))
