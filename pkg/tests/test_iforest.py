from __future__ import annotations

import numpy as np
import pytest

from rotated_iforest.io import model_to_bytes
from rotated_iforest.iforest import (
    ForestParams,
    IsolationForest,
    fit_iforest,
    score_batch,
    score_iforest,
)
from rotated_iforest.rng import RngState
from rotated_iforest.tree import AxisSplit, Internal, ITree, Leaf, c_factor


@pytest.fixture(scope="module")
def points():
    return RngState(1).generator().standard_normal((2000, 2))


@pytest.fixture(scope="module")
def forest(points):
    return fit_iforest(points, ForestParams(n_trees=100, psi=256, seed=3))


def _chain(depth: int) -> ITree:
    """Tree whose probe at 0 ends in a single-point leaf at ``depth``."""
    node = Leaf(1, depth)
    for _ in range(depth):
        node = Internal(AxisSplit(0, 1.0), node, Leaf(1, 0))
    return ITree.from_nodes(node, dim=1, depth_limit=8, psi=256)


class TestForestParams:
    @pytest.mark.parametrize("kwargs", [{"n_trees": 0}, {"psi": 1}, {"depth_limit": 0}, {"seed": -1}])
    def test_validation(self, kwargs):
        with pytest.raises(ValueError):
            ForestParams(**kwargs)

    def test_resolve(self):
        assert ForestParams(psi=256).resolve(2000).depth_limit == 8
        assert ForestParams(psi=256).resolve(10).depth_limit == 4
        assert ForestParams(depth_limit=3).resolve(10).depth_limit == 3


class TestFit:
    def test_shape(self, forest):
        assert len(forest.trees) == 100
        assert all(t.psi == 256 for t in forest.trees)
        assert forest.params.depth_limit == 8
        assert max(t.leaf_levels().max() for t in forest.trees) <= 8

    def test_small_dataset(self):
        pts = RngState(2).generator().standard_normal((10, 3))
        forest = fit_iforest(pts, ForestParams(n_trees=5))
        assert all(t.psi == 10 and t.leaf_sizes().sum() == 10 for t in forest.trees)

    def test_deterministic(self, points):
        a = fit_iforest(points, ForestParams(n_trees=10, seed=9))
        b = fit_iforest(points, ForestParams(n_trees=10, seed=9))
        assert model_to_bytes(a) == model_to_bytes(b)

    def test_seed_matters(self, points):
        a = fit_iforest(points, ForestParams(n_trees=10, seed=1))
        b = fit_iforest(points, ForestParams(n_trees=10, seed=2))
        assert model_to_bytes(a) != model_to_bytes(b)

    def test_trees_independent_of_count(self, points):
        small = fit_iforest(points, ForestParams(n_trees=3, seed=4))
        large = fit_iforest(points, ForestParams(n_trees=8, seed=4))
        for a, b in zip(small.trees, large.trees):
            np.testing.assert_array_equal(a.threshold, b.threshold)

    @pytest.mark.parametrize("bad", [np.ones(5), np.ones((1, 2)), np.array([[0.0, np.inf], [1.0, 1.0]])])
    def test_rejects(self, bad):
        with pytest.raises(ValueError):
            fit_iforest(bad)


class TestScore:
    def test_fixed_point(self):
        # H = c(psi) gives 0.5, H = 0 gives 1
        params = ForestParams(n_trees=1, psi=256, depth_limit=8)
        tree = ITree.from_nodes(Leaf(256, 0), dim=1, depth_limit=8, psi=256)
        forest = IsolationForest(params, [tree], 1)
        assert score_iforest(forest, [0.0]) == pytest.approx(2 ** (-c_factor(256) / c_factor(256)))
        assert score_iforest(forest, [0.0]) == pytest.approx(0.5)
        root = IsolationForest(params, [ITree.from_nodes(Leaf(1, 0), 1, 8, psi=256)], 1)
        assert score_iforest(root, [0.0]) == 1.0

    def test_two_tree_forest(self):
        params = ForestParams(n_trees=2, psi=256, depth_limit=8)
        forest = IsolationForest(params, [_chain(3), _chain(5)], 1)
        np.testing.assert_allclose(forest.tree_path_lengths(np.zeros((1, 1))).ravel(), [3.0, 5.0])
        assert score_iforest(forest, [0.0]) == pytest.approx(0.7628952638, abs=1e-9)

    def test_empty_batch(self, forest):
        assert score_batch(forest, np.empty((0, 2))).shape == (0,)

    def test_batch_matches_loop(self, forest, points):
        probes = points[:50]
        batch = score_batch(forest, probes)
        loop = np.array([score_iforest(forest, p) for p in probes])
        np.testing.assert_array_equal(batch, loop)
        np.testing.assert_array_equal(score_batch(forest, probes[:1]), loop[:1])

    def test_range_and_outlier(self, forest):
        scores = forest.score_samples(np.array([[0.0, 0.0], [8.0, -8.0]]))
        assert np.all((scores > 0) & (scores <= 1))
        assert scores[1] > scores[0]

    def test_dimension_checked(self, forest):
        with pytest.raises(ValueError, match="expects 2 features"):
            forest.score_samples(np.ones((3, 5)))
