from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.distance import pdist
from scipy.stats import chisquare

from rotated_iforest.rng import RngState
from rotated_iforest.rotation import (
    RotationMatrix,
    qr_decompose,
    random_gaussian_matrix,
    random_rotation,
    rotate_points,
)


class TestGaussianMatrix:
    def test_one_by_one(self):
        assert random_gaussian_matrix(RngState(1).generator(), 1).shape == (1, 1)

    def test_moments(self):
        m = random_gaussian_matrix(RngState(2).generator(), 100)
        assert abs(m.mean()) < 0.05
        assert abs(m.var() - 1.0) < 0.1

    def test_replay(self):
        a = random_gaussian_matrix(RngState(3).generator(), 6)
        b = random_gaussian_matrix(RngState(3).generator(), 6)
        np.testing.assert_array_equal(a, b)


class TestQR:
    def test_identity(self):
        q, r = qr_decompose(np.eye(4))
        np.testing.assert_array_equal(q, np.eye(4))
        np.testing.assert_array_equal(r, np.eye(4))

    def test_permutation(self):
        a = np.array([[0.0, 1.0], [1.0, 0.0]])
        q, r = qr_decompose(a)
        np.testing.assert_allclose(q @ r, a, atol=1e-12)
        assert r[1, 0] == 0.0

    @pytest.mark.parametrize("d", [1, 2, 5, 31, 32, 33, 50, 70])
    def test_reconstruction(self, d):
        a = RngState(d).generator().standard_normal((d, d))
        q, r = qr_decompose(a)
        np.testing.assert_allclose(q @ r, a, atol=1e-10)
        np.testing.assert_array_equal(r, np.triu(r))
        assert np.all(np.diag(r) >= 0)
        assert np.abs(q.T @ q - np.eye(d)).max() <= 1e-10

    def test_rank_deficient(self):
        a = np.zeros((3, 3))
        a[:, 0] = [1.0, 2.0, 2.0]
        q, r = qr_decompose(a)
        np.testing.assert_allclose(q @ r, a, atol=1e-12)
        assert np.abs(q.T @ q - np.eye(3)).max() <= 1e-12

    @pytest.mark.parametrize("bad", [np.ones((2, 3)), np.array([[np.nan]])])
    def test_rejects(self, bad):
        with pytest.raises(ValueError):
            qr_decompose(bad)


class TestRandomRotation:
    def test_d1_is_identity(self):
        np.testing.assert_array_equal(random_rotation(RngState(1).generator(), 1).q, [[1.0]])

    @pytest.mark.parametrize("d", [2, 3, 10, 64])
    def test_special_orthogonal(self, d):
        rot = random_rotation(RngState(d).generator(), d)
        assert rot.orthogonality_error() <= 1e-10
        assert abs(rot.determinant() - 1.0) <= 1e-8

    def test_haar_angle_2d(self):
        rng = RngState(5).generator()
        angles = np.empty(10_000)
        for i in range(angles.size):
            q = random_rotation(rng, 2).q
            angles[i] = np.mod(np.arctan2(q[1, 0], q[0, 0]), 2 * np.pi)
        counts, _ = np.histogram(angles, bins=16, range=(0, 2 * np.pi))
        assert chisquare(counts).pvalue > 1e-3

    def test_first_column_uniform_3d(self):
        # Haar on SO(3): each column is uniform on the sphere, so its mean is ~0
        rng = RngState(6).generator()
        cols = np.array([random_rotation(rng, 3).q[:, 0] for _ in range(4000)])
        np.testing.assert_allclose(cols.mean(axis=0), 0.0, atol=0.05)
        np.testing.assert_allclose((cols**2).mean(axis=0), 1 / 3, atol=0.03)

    def test_read_only(self):
        rot = random_rotation(RngState(7).generator(), 3)
        with pytest.raises(ValueError):
            rot.q[0, 0] = 2.0


class TestRotationMatrix:
    def test_compose(self):
        rng = RngState(8).generator()
        a, b = random_rotation(rng, 4), random_rotation(rng, 4)
        np.testing.assert_allclose(a.compose(b).q, a.q @ b.q)

    def test_counts(self):
        assert RotationMatrix.identity(500).n_values == 250_000
        assert RotationMatrix.identity(2).dim == 2

    def test_rejects_non_square(self):
        with pytest.raises(ValueError):
            RotationMatrix(np.ones((2, 3)))


class TestRotatePoints:
    def test_identity(self):
        pts = RngState(9).generator().standard_normal((10, 3))
        np.testing.assert_array_equal(rotate_points(pts, RotationMatrix.identity(3)), pts)

    def test_quarter_turn(self):
        # row-vector convention: x' = x Q, so Q = R(theta)^T
        theta = np.pi / 2
        rq = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
        out = rotate_points(np.array([[1.0, 0.0]]), RotationMatrix(rq.T))
        np.testing.assert_allclose(out, [[0.0, 1.0]], atol=1e-12)

    def test_isometry(self):
        rng = RngState(10).generator()
        pts = rng.standard_normal((100, 5))
        out = rotate_points(pts, random_rotation(rng, 5))
        np.testing.assert_allclose(pdist(out), pdist(pts), atol=1e-9)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension mismatch"):
            rotate_points(np.ones((2, 3)), RotationMatrix.identity(2))

    @given(st.integers(1, 12), st.integers(0, 2**32))
    @settings(max_examples=40, deadline=None)
    def test_norms_preserved(self, d, seed):
        rng = RngState(seed).generator()
        pts = rng.standard_normal((7, d))
        out = rotate_points(pts, random_rotation(rng, d))
        np.testing.assert_allclose(np.linalg.norm(out, axis=1), np.linalg.norm(pts, axis=1), rtol=1e-12)
