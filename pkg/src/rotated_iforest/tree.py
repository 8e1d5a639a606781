"""Isolation trees: recursive random partitions with path-length scoring.

A tree is stored as flat preorder arrays (one entry per node) so a batch of
probe points can descend all together with vectorized numpy indexing. The
split strategy is pluggable: axis-aligned cuts for iForest/RIF, random
hyperplanes for EIF.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .rng import uniform

EULER_GAMMA = 0.5772156649

LEAF = 0
AXIS = 1
HYPERPLANE = 2


def c_factor(n):
    """Average path length of an unsuccessful BST search over ``n`` keys.

    ``c(n) = 2 H(n-1) - 2 (n-1) / n`` with ``H(i) ~ ln(i) + gamma``, and
    ``c(0) = c(1) = 0``. Accepts a scalar or an array.
    """
    n_arr = np.asarray(n, dtype=np.float64)
    safe = np.maximum(n_arr, 2.0)
    value = 2.0 * (np.log(safe - 1.0) + EULER_GAMMA) - 2.0 * (safe - 1.0) / safe
    out = np.where(n_arr <= 1.0, 0.0, value)
    if out.ndim == 0:
        return float(out)
    return out


def default_depth_limit(psi: int) -> int:
    """ceil(log2 psi), at least 1."""
    return max(1, math.ceil(math.log2(psi)))


@dataclass(frozen=True)
class AxisSplit:
    """Cut ``x[dim] < value`` goes left."""

    dim: int
    value: float


@dataclass(frozen=True, eq=False)
class HyperplaneSplit:
    """Cut ``(x - intercept) . normal < 0`` goes left."""

    normal: np.ndarray
    intercept: np.ndarray


SplitRule = Union[AxisSplit, HyperplaneSplit]


@dataclass(frozen=True)
class Leaf:
    size: int
    level: int


@dataclass(frozen=True)
class Internal:
    rule: SplitRule
    left: "TreeNode"
    right: "TreeNode"


TreeNode = Union[Leaf, Internal]

# splitter(rng, points, lo, hi) -> (rule, goes_left_mask) or None when it gives up
Splitter = Callable[
    [np.random.Generator, np.ndarray, np.ndarray, np.ndarray],
    Optional[tuple[SplitRule, np.ndarray]],
]


def hyperplane_side(points: np.ndarray, intercept: np.ndarray, normal: np.ndarray) -> np.ndarray:
    """True where ``(x - p) . n < 0``; rows of ``intercept``/``normal`` may broadcast."""
    return np.sum((points - intercept) * normal, axis=-1) < 0.0


class AxisSplitter:
    """Uniform random dimension, uniform random cut inside the node's range.

    A dimension with zero range is redrawn, up to ``d`` redraws; after that the
    node becomes a leaf.
    """

    def __call__(self, rng, points, lo, hi):
        d = points.shape[1]
        for _ in range(d + 1):
            j = int(rng.integers(d))
            if lo[j] < hi[j]:
                value = uniform(rng, lo[j], hi[j])
                mask = points[:, j] < value
                # value == lo[j] leaves the left side empty; count it as a failed draw
                if mask.any():
                    return AxisSplit(j, value), mask
        return None


class ITree:
    """An isolation tree in flat preorder form.

    Attributes:
        kind: node variant per node (``LEAF``, ``AXIS`` or ``HYPERPLANE``).
        left, right: child indices, -1 for leaves.
        feature, threshold: axis-split payload (-1 / 0.0 elsewhere).
        normal, intercept: ``(n_nodes, d)`` hyperplane payload, or None when
            the tree has no hyperplane nodes.
        size, level: leaf training size and depth (size 0 for internal nodes).
        depth_limit: maximum leaf level.
        psi: number of training points the tree was grown on.
    """

    def __init__(
        self,
        *,
        dim: int,
        kind,
        left,
        right,
        feature,
        threshold,
        size,
        level,
        depth_limit: int,
        psi: int,
        normal=None,
        intercept=None,
    ) -> None:
        self.dim = int(dim)
        self.kind = np.asarray(kind, dtype=np.int8)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.size = np.asarray(size, dtype=np.int64)
        self.level = np.asarray(level, dtype=np.int64)
        self.depth_limit = int(depth_limit)
        self.psi = int(psi)
        if normal is not None:
            normal = np.asarray(normal, dtype=np.float64).reshape(-1, self.dim)
            intercept = np.asarray(intercept, dtype=np.float64).reshape(-1, self.dim)
        self.normal = normal
        self.intercept = intercept
        if np.any(self.kind == HYPERPLANE) and self.normal is None:
            raise ValueError("hyperplane nodes require normal and intercept arrays")
        self._leaf_value = np.where(
            self.kind == LEAF, self.level + c_factor(self.size), 0.0
        )

    @property
    def n_nodes(self) -> int:
        return len(self.kind)

    @property
    def n_internal(self) -> int:
        return int(np.count_nonzero(self.kind != LEAF))

    @property
    def n_leaves(self) -> int:
        return int(np.count_nonzero(self.kind == LEAF))

    @property
    def has_hyperplanes(self) -> bool:
        return bool(np.any(self.kind == HYPERPLANE))

    def leaf_sizes(self) -> np.ndarray:
        return self.size[self.kind == LEAF]

    def leaf_levels(self) -> np.ndarray:
        return self.level[self.kind == LEAF]

    def node(self, i: int = 0) -> TreeNode:
        """Nested node view rooted at preorder index ``i``."""
        if self.kind[i] == LEAF:
            return Leaf(int(self.size[i]), int(self.level[i]))
        if self.kind[i] == AXIS:
            rule: SplitRule = AxisSplit(int(self.feature[i]), float(self.threshold[i]))
        else:
            rule = HyperplaneSplit(self.normal[i].copy(), self.intercept[i].copy())
        return Internal(rule, self.node(int(self.left[i])), self.node(int(self.right[i])))

    @classmethod
    def from_nodes(cls, root: TreeNode, dim: int, depth_limit: int, psi: int | None = None) -> ITree:
        """Flatten a nested node structure (handy for hand-built trees)."""
        builder = _FlatBuilder(dim)

        def visit(node: TreeNode, level: int) -> int:
            if isinstance(node, Leaf):
                return builder.add_leaf(node.size, level)
            idx = builder.add_internal(node.rule, level)
            builder.left[idx] = visit(node.left, level + 1)
            builder.right[idx] = visit(node.right, level + 1)
            return idx

        visit(root, 0)
        tree = builder.finish(depth_limit, 0)
        if psi is None:
            psi = int(tree.leaf_sizes().sum())
        tree.psi = int(psi)
        return tree

    def leaf_index(self, points: np.ndarray) -> np.ndarray:
        """Preorder index of the leaf each row of ``points`` falls into."""
        points = np.asarray(points, dtype=np.float64)
        if points.ndim != 2 or points.shape[1] != self.dim:
            raise ValueError(
                f"expected points with {self.dim} columns, got shape {points.shape}"
            )
        node = np.zeros(points.shape[0], dtype=np.int64)
        active = np.arange(points.shape[0])
        while active.size:
            current = node[active]
            internal = self.kind[current] != LEAF
            active = active[internal]
            current = current[internal]
            if not active.size:
                break
            kinds = self.kind[current]
            goes_left = np.empty(active.size, dtype=bool)
            axis = kinds == AXIS
            if axis.any():
                a_pts, a_nodes = active[axis], current[axis]
                goes_left[axis] = points[a_pts, self.feature[a_nodes]] < self.threshold[a_nodes]
            hyper = ~axis
            if hyper.any():
                h_pts, h_nodes = active[hyper], current[hyper]
                goes_left[hyper] = hyperplane_side(
                    points[h_pts], self.intercept[h_nodes], self.normal[h_nodes]
                )
            node[active] = np.where(goes_left, self.left[current], self.right[current])
        return node

    def path_lengths(self, points: np.ndarray) -> np.ndarray:
        """Leaf level plus ``c(leaf size)`` for every row of ``points``."""
        return self._leaf_value[self.leaf_index(points)]


class _FlatBuilder:
    def __init__(self, dim: int) -> None:
        self.dim = dim
        self.kind: list[int] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.size: list[int] = []
        self.level: list[int] = []
        self.normal: dict[int, np.ndarray] = {}
        self.intercept: dict[int, np.ndarray] = {}

    def _append(self, kind, feature, threshold, size, level) -> int:
        self.kind.append(kind)
        self.left.append(-1)
        self.right.append(-1)
        self.feature.append(feature)
        self.threshold.append(threshold)
        self.size.append(size)
        self.level.append(level)
        return len(self.kind) - 1

    def add_leaf(self, size: int, level: int) -> int:
        return self._append(LEAF, -1, 0.0, size, level)

    def add_internal(self, rule: SplitRule, level: int = 0) -> int:
        if isinstance(rule, AxisSplit):
            if not 0 <= rule.dim < self.dim:
                raise ValueError(f"split dimension {rule.dim} out of range for d={self.dim}")
            return self._append(AXIS, rule.dim, float(rule.value), 0, level)
        idx = self._append(HYPERPLANE, -1, 0.0, 0, level)
        self.normal[idx] = np.asarray(rule.normal, dtype=np.float64)
        self.intercept[idx] = np.asarray(rule.intercept, dtype=np.float64)
        return idx

    def finish(self, depth_limit: int, psi: int) -> ITree:
        normal = intercept = None
        if self.normal:
            n = len(self.kind)
            normal = np.zeros((n, self.dim))
            intercept = np.zeros((n, self.dim))
            for idx, vec in self.normal.items():
                normal[idx] = vec
                intercept[idx] = self.intercept[idx]
        return ITree(
            dim=self.dim,
            kind=self.kind,
            left=self.left,
            right=self.right,
            feature=self.feature,
            threshold=self.threshold,
            size=self.size,
            level=self.level,
            depth_limit=depth_limit,
            psi=psi,
            normal=normal,
            intercept=intercept,
        )


def build_tree(
    points: np.ndarray,
    depth_limit: int,
    splitter: Splitter,
    rng: np.random.Generator,
) -> ITree:
    """Grow an isolation tree on ``points``.

    A node becomes a leaf when it holds one point, sits at ``depth_limit``,
    holds only identical points, or the splitter gives up. Otherwise both
    children of a split are non-empty.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[0] < 1:
        raise ValueError(f"build_tree needs a non-empty 2-D array, got shape {points.shape}")
    if depth_limit < 0:
        raise ValueError(f"depth_limit must be >= 0, got {depth_limit}")
    builder = _FlatBuilder(points.shape[1])

    def grow(node_points: np.ndarray, level: int) -> int:
        n = node_points.shape[0]
        if n == 1 or level >= depth_limit:
            return builder.add_leaf(n, level)
        lo = node_points.min(axis=0)
        hi = node_points.max(axis=0)
        if np.array_equal(lo, hi):
            return builder.add_leaf(n, level)
        drawn = splitter(rng, node_points, lo, hi)
        if drawn is None:
            return builder.add_leaf(n, level)
        rule, goes_left = drawn
        idx = builder.add_internal(rule, level)
        builder.left[idx] = grow(node_points[goes_left], level + 1)
        builder.right[idx] = grow(node_points[~goes_left], level + 1)
        return idx

    grow(points, 0)
    return builder.finish(depth_limit, points.shape[0])


def path_length(tree: ITree, x: np.ndarray) -> float:
    """Path length of a single probe point."""
    x = np.asarray(x, dtype=np.float64)
    return float(tree.path_lengths(x.reshape(1, -1))[0])
