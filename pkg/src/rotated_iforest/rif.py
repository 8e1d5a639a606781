"""Rotated Isolation Forest.

Every tree gets its own Haar-random rotation. The tree is grown with plain
axis-aligned splits on its rotated subsample, and probes are rotated by the
same matrix before descending it, so the rotation travels with its tree.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .iforest import (
    BUILD_STREAM,
    ROTATION_STREAM,
    SAMPLE_STREAM,
    ForestParams,
    IsolationForest,
    _check_training_points,
    tree_mean,
    tree_streams,
)
from .rng import sample_without_replacement
from .rotation import RotationMatrix, random_rotation, rotate_points
from .tree import AXIS, HYPERPLANE, AxisSplitter, build_tree, c_factor

COMBINERS = ("mean_path", "mean_score")

RotationSampler = Callable[[np.random.Generator, int], RotationMatrix]


class RotatedForest(IsolationForest):
    """Fitted ensemble of ``(tree, rotation)`` pairs.

    ``combine`` selects how per-tree results are merged: ``"mean_path"``
    averages raw path lengths before normalizing (the iForest rule);
    ``"mean_score"`` averages the per-tree scores ``2 ** (-h_i / c(psi))``.
    """

    algorithm = "rif"

    def __init__(self, params, trees, dim, rotations, combine: str = "mean_path") -> None:
        super().__init__(params, trees, dim)
        if len(rotations) != len(trees):
            raise ValueError("every tree needs exactly one rotation")
        for rot in rotations:
            if rot.dim != dim:
                raise ValueError(f"rotation dimension mismatch: {rot.dim} != {dim}")
        if combine not in COMBINERS:
            raise ValueError(f"combine must be one of {COMBINERS}, got {combine!r}")
        self.rotations = list(rotations)
        self.combine = combine

    @property
    def pairs(self):
        return list(zip(self.trees, self.rotations))

    def tree_path_lengths(self, points) -> np.ndarray:
        points = self._check_probes(points)
        return np.stack(
            [tree.path_lengths(rotate_points(points, rot)) for tree, rot in self.pairs]
        )

    def score_samples(self, points) -> np.ndarray:
        points = self._check_probes(points)
        if points.shape[0] == 0:
            return np.empty(0)
        lengths = self.tree_path_lengths(points)
        norm = c_factor(self.psi_effective)
        if self.combine == "mean_score":
            return tree_mean(2.0 ** (-lengths / norm))
        return 2.0 ** (-tree_mean(lengths) / norm)


def fit_rif(
    points,
    params: ForestParams = ForestParams(),
    *,
    rotation_sampler: RotationSampler = random_rotation,
    combine: str = "mean_path",
) -> RotatedForest:
    """Fit a Rotated Isolation Forest on an ``(n, d)`` array.

    Tree ``i`` uses the same sampling and building streams as tree ``i`` of
    :func:`~rotated_iforest.iforest.fit_iforest` with the same seed, plus a
    separate stream for its rotation.
    """
    points = _check_training_points(points)
    params = params.resolve(points.shape[0])
    n, d = points.shape
    k = min(params.psi, n)
    splitter = AxisSplitter()
    trees, rotations = [], []
    for i in range(params.n_trees):
        streams = tree_streams(params.seed, i)
        rot = rotation_sampler(streams[ROTATION_STREAM], d)
        sample = sample_without_replacement(streams[SAMPLE_STREAM], n, k)
        rotated = rotate_points(points[sample], rot)
        trees.append(build_tree(rotated, params.depth_limit, splitter, streams[BUILD_STREAM]))
        rotations.append(rot)
    return RotatedForest(params, trees, d, rotations, combine=combine)


def score_rif(forest: RotatedForest, x) -> float:
    x = np.asarray(x, dtype=np.float64).reshape(1, -1)
    return float(forest.score_samples(x)[0])


@dataclass(frozen=True)
class StorageFootprint:
    """Stored reals of a fitted forest.

    ``node_values`` counts split payloads: 2 per axis split, ``2 d`` per
    hyperplane split. ``rotation_values`` is ``t * d**2`` for RIF, else 0.
    """

    n_nodes: int
    n_internal: int
    node_values: int
    rotation_values: int

    @property
    def total(self) -> int:
        return self.node_values + self.rotation_values


def storage_footprint(forest: IsolationForest) -> StorageFootprint:
    n_nodes = sum(t.n_nodes for t in forest.trees)
    n_internal = sum(t.n_internal for t in forest.trees)
    node_values = sum(
        2 * int(np.count_nonzero(t.kind == AXIS))
        + 2 * forest.dim * int(np.count_nonzero(t.kind == HYPERPLANE))
        for t in forest.trees
    )
    rotation_values = sum(r.n_values for r in getattr(forest, "rotations", []))
    return StorageFootprint(n_nodes, n_internal, node_values, rotation_values)
