"""Extended Isolation Forest: random-hyperplane splits.

Each internal node stores a unit normal ``n`` drawn uniformly on the sphere and
an intercept ``p`` drawn uniformly (per component) inside the node's bounding
box; a point goes left when ``(x - p) . n < 0``.
"""

from __future__ import annotations

import numpy as np

from .iforest import ForestParams, IsolationForest, fit_forest
from .rng import unit_sphere_vector
from .tree import HyperplaneSplit, hyperplane_side

MAX_HYPERPLANE_DRAWS = 9  # first draw plus 8 retries


def draw_hyperplane(rng: np.random.Generator, node_points, lo=None, hi=None) -> HyperplaneSplit:
    """Random cut for the points reaching a node.

    ``lo``/``hi`` are the node's componentwise bounds; computed from
    ``node_points`` when omitted.
    """
    node_points = np.asarray(node_points, dtype=np.float64)
    if lo is None:
        lo = node_points.min(axis=0)
        hi = node_points.max(axis=0)
    d = node_points.shape[1]
    normal = unit_sphere_vector(rng, d)
    # half-open per component; collapses to lo where lo == hi
    intercept = lo + (hi - lo) * rng.random(d)
    intercept = np.minimum(np.maximum(intercept, lo), hi)
    return HyperplaneSplit(normal, intercept)


class HyperplaneSplitter:
    """Draws hyperplanes until both sides are non-empty, at most 9 draws."""

    def __init__(self, max_draws: int = MAX_HYPERPLANE_DRAWS) -> None:
        self.max_draws = max_draws

    def __call__(self, rng, points, lo, hi):
        for _ in range(self.max_draws):
            rule = draw_hyperplane(rng, points, lo, hi)
            goes_left = hyperplane_side(points, rule.intercept, rule.normal)
            n_left = np.count_nonzero(goes_left)
            if 0 < n_left < len(goes_left):
                return rule, goes_left
        return None


class ExtendedForest(IsolationForest):
    """Fitted ensemble of hyperplane-split isolation trees."""

    algorithm = "eif"


def fit_eif(points, params: ForestParams = ForestParams()) -> ExtendedForest:
    """Fit an Extended Isolation Forest on an ``(n, d)`` array."""
    return fit_forest(points, params, HyperplaneSplitter(), ExtendedForest)


def score_eif(forest: ExtendedForest, x) -> float:
    x = np.asarray(x, dtype=np.float64).reshape(1, -1)
    return float(forest.score_samples(x)[0])
