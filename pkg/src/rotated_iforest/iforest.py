"""Isolation Forest: axis-aligned iTrees over uniform subsamples.

The forest score of a point is ``2 ** (-H(x) / c(psi))`` where ``H(x)`` is
the mean path length over trees and ``psi`` the per-tree training size.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from .rng import RngState, sample_without_replacement
from .tree import AxisSplitter, ITree, Splitter, build_tree, c_factor, default_depth_limit

logger = logging.getLogger(__name__)

# per-tree child stream labels
SAMPLE_STREAM = 0
BUILD_STREAM = 1
ROTATION_STREAM = 2


@dataclass(frozen=True)
class ForestParams:
    """Ensemble hyper-parameters.

    ``depth_limit=None`` resolves at fit time to ``ceil(log2(psi_eff))``
    where ``psi_eff = min(psi, n)``.
    """

    n_trees: int = 100
    psi: int = 256
    depth_limit: int | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_trees < 1:
            raise ValueError(f"n_trees must be >= 1, got {self.n_trees}")
        if self.psi < 2:
            raise ValueError(f"psi must be >= 2, got {self.psi}")
        if self.depth_limit is not None and self.depth_limit < 1:
            raise ValueError(f"depth_limit must be >= 1, got {self.depth_limit}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")

    def resolve(self, n_points: int) -> ForestParams:
        if self.depth_limit is not None:
            return self
        return replace(self, depth_limit=default_depth_limit(min(self.psi, n_points)))


def tree_streams(seed: int, index: int) -> dict[int, np.random.Generator]:
    """Independent generators for tree ``index``: sampling, building, rotation."""
    base = RngState(seed).substream(index)
    return {
        label: base.substream(label).generator()
        for label in (SAMPLE_STREAM, BUILD_STREAM, ROTATION_STREAM)
    }


def _check_training_points(points) -> np.ndarray:
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise ValueError(f"expected a 2-D array of points, got shape {points.shape}")
    if points.shape[0] < 2:
        raise ValueError(f"need at least two points, got {points.shape[0]}")
    if points.shape[1] < 1:
        raise ValueError("need at least one feature column")
    if not np.all(np.isfinite(points)):
        raise ValueError("training points must be finite")
    return points


def fit_tree(
    points: np.ndarray,
    params: ForestParams,
    index: int,
    splitter: Splitter,
) -> ITree:
    """Tree ``index`` of a forest; depends only on ``(params.seed, index)``."""
    streams = tree_streams(params.seed, index)
    k = min(params.psi, points.shape[0])
    sample = sample_without_replacement(streams[SAMPLE_STREAM], points.shape[0], k)
    return build_tree(points[sample], params.depth_limit, splitter, streams[BUILD_STREAM])


def tree_mean(values: np.ndarray) -> np.ndarray:
    """Mean over axis 0, summed tree by tree.

    A fixed summation order keeps a point's score independent of the batch
    it is scored in (numpy's pairwise reduction depends on array shape).
    """
    total = np.zeros(values.shape[1:])
    for row in values:
        total += row
    return total / values.shape[0]


class IsolationForest:
    """Fitted ensemble of axis-aligned isolation trees."""

    algorithm = "iforest"

    def __init__(self, params: ForestParams, trees: list[ITree], dim: int) -> None:
        if len(trees) != params.n_trees:
            raise ValueError(f"expected {params.n_trees} trees, got {len(trees)}")
        self.params = params
        self.trees = list(trees)
        self.dim = int(dim)

    @property
    def psi_effective(self) -> int:
        return self.trees[0].psi

    def _check_probes(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=np.float64)
        if points.ndim == 1:
            points = points.reshape(1, -1) if points.size else points.reshape(0, self.dim)
        if points.ndim != 2 or points.shape[1] != self.dim:
            raise ValueError(
                f"model expects {self.dim} features, got array of shape {points.shape}"
            )
        return points

    def tree_path_lengths(self, points) -> np.ndarray:
        """``(n_trees, m)`` per-tree path lengths."""
        points = self._check_probes(points)
        return np.stack([tree.path_lengths(points) for tree in self.trees])

    def mean_path_length(self, points) -> np.ndarray:
        return tree_mean(self.tree_path_lengths(points))

    def score_samples(self, points) -> np.ndarray:
        """Anomaly score in (0, 1] per row; higher means more anomalous."""
        points = self._check_probes(points)
        if points.shape[0] == 0:
            return np.empty(0)
        return 2.0 ** (-self.mean_path_length(points) / c_factor(self.psi_effective))


def fit_forest(points, params: ForestParams, splitter: Splitter, cls=IsolationForest):
    points = _check_training_points(points)
    params = params.resolve(points.shape[0])
    trees = [fit_tree(points, params, i, splitter) for i in range(params.n_trees)]
    logger.debug(
        "fitted %s: %d trees, psi=%d, depth_limit=%d",
        cls.algorithm, params.n_trees, trees[0].psi, params.depth_limit,
    )
    return cls(params, trees, points.shape[1])


def fit_iforest(points, params: ForestParams = ForestParams()) -> IsolationForest:
    """Fit an Isolation Forest on an ``(n, d)`` array."""
    return fit_forest(points, params, AxisSplitter(), IsolationForest)


def score_iforest(forest: IsolationForest, x) -> float:
    """Score of a single point."""
    x = np.asarray(x, dtype=np.float64).reshape(1, -1)
    return float(forest.score_samples(x)[0])


def score_batch(forest: IsolationForest, points) -> np.ndarray:
    """Scores for every row of ``points``, in order."""
    return forest.score_samples(points)
