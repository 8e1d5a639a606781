"""Random rotation matrices from the QR factorization of a Gaussian matrix.

A d x d matrix with i.i.d. N(0, 1) entries is factored with Householder
reflections. Folding the signs of ``diag(R)`` into ``Q`` makes ``Q`` Haar
distributed on O(d); flipping the sign of one column whenever ``det(Q) = -1``
then gives a Haar-distributed element of SO(d).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "RotationMatrix",
    "qr_decompose",
    "random_gaussian_matrix",
    "random_rotation",
    "rotate_points",
]


def random_gaussian_matrix(rng: np.random.Generator, d: int) -> np.ndarray:
    """d x d matrix of independent standard normal entries."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    return rng.standard_normal((d, d))


_BLOCK = 32


def _householder_qr(a: np.ndarray) -> tuple[np.ndarray, np.ndarray, int]:
    """Blocked Householder QR of a square matrix.

    Columns are reduced in panels of ``_BLOCK``; each panel's reflectors are
    gathered into the compact WY form ``I - V T V^T`` so the trailing matrix
    and ``q`` are updated with matrix-matrix products.

    Returns ``(q, r, det_q)`` with ``diag(r) >= 0`` and ``det_q`` the exact
    sign of ``det(q)`` (each applied reflection contributes -1, each folded
    diagonal sign contributes its sign).
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"qr_decompose expects a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("qr_decompose requires finite entries")
    d = a.shape[0]
    r = a.copy()
    det_q = 1
    blocks: list[tuple[int, np.ndarray, np.ndarray]] = []

    # the trailing 1x1 block needs no reflection
    n_reflect = d - 1
    for k0 in range(0, n_reflect, _BLOCK):
        k1 = min(k0 + _BLOCK, n_reflect)
        width = k1 - k0
        v_block = np.zeros((d - k0, width))
        t = np.zeros((width, width))
        for i, j in enumerate(range(k0, k1)):
            x = r[j:, j]
            normx = np.linalg.norm(x)
            if normx == 0.0:
                # rank-deficient column: identity step (zero reflector), r[j, j] stays 0
                continue
            alpha = -normx if x[0] >= 0 else normx
            v = x.copy()
            v[0] -= alpha
            v /= np.linalg.norm(v)
            if j + 1 < k1:
                panel = r[j:, j + 1 : k1]
                panel -= 2.0 * np.outer(v, v @ panel)
            r[j, j] = alpha
            r[j + 1 :, j] = 0.0
            v_block[j - k0 :, i] = v
            t[i, i] = 2.0
            if i:
                t[:i, i] = -2.0 * (t[:i, :i] @ (v_block[:, :i].T @ v_block[:, i]))
            det_q = -det_q
        if k1 < d:
            trailing = r[k0:, k1:]
            trailing -= v_block @ (t.T @ (v_block.T @ trailing))
        blocks.append((k0, v_block, t))

    q = np.eye(d)
    for k0, v_block, t in reversed(blocks):
        sub = q[k0:, k0:]
        sub -= v_block @ (t @ (v_block.T @ sub))

    signs = np.where(np.diag(r) < 0.0, -1.0, 1.0)
    q *= signs[np.newaxis, :]
    r *= signs[:, np.newaxis]
    if np.count_nonzero(signs < 0) % 2:
        det_q = -det_q
    # keep the strict lower triangle exactly zero after the row scaling
    r[np.tril_indices(d, -1)] = 0.0
    return q, r, det_q


def qr_decompose(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Factor a square matrix as ``a = q @ r``.

    ``q`` is orthogonal, ``r`` is upper triangular with a non-negative
    diagonal (the sign convention is folded into ``q``). Columns that are
    already zero below and on the diagonal are passed through unreflected.
    """
    q, r, _ = _householder_qr(a)
    return q, r


@dataclass(frozen=True, eq=False)
class RotationMatrix:
    """Orthogonal d x d matrix with determinant +1.

    Points are row vectors and are rotated by right-multiplication,
    ``points @ q``.
    """

    q: np.ndarray

    def __post_init__(self) -> None:
        q = np.array(self.q, dtype=np.float64)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise ValueError(f"rotation must be square, got shape {q.shape}")
        q.setflags(write=False)
        object.__setattr__(self, "q", q)

    @property
    def dim(self) -> int:
        return self.q.shape[0]

    @property
    def n_values(self) -> int:
        """Number of stored reals, exactly d**2."""
        return self.q.size

    @classmethod
    def identity(cls, d: int) -> RotationMatrix:
        return cls(np.eye(d))

    def orthogonality_error(self) -> float:
        """max |Q^T Q - I| entry."""
        return float(np.max(np.abs(self.q.T @ self.q - np.eye(self.dim))))

    def determinant(self) -> float:
        return float(np.linalg.det(self.q))

    def compose(self, other: RotationMatrix) -> RotationMatrix:
        """Rotation equivalent to applying ``self`` then ``other``."""
        return RotationMatrix(self.q @ other.q)


def random_rotation(rng: np.random.Generator, d: int) -> RotationMatrix:
    """Haar-uniform random element of SO(d)."""
    a = random_gaussian_matrix(rng, d)
    q, _, det_q = _householder_qr(a)
    if det_q < 0:
        q[:, 0] = -q[:, 0]
    return RotationMatrix(q)


def rotate_points(points: np.ndarray, rot: RotationMatrix) -> np.ndarray:
    """Rotate each row of ``points`` by ``rot`` (row-vector convention)."""
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        if points.shape[0] != rot.dim:
            raise ValueError(
                f"rotation dimension mismatch: point has {points.shape[0]} components, "
                f"rotation is {rot.dim}x{rot.dim}"
            )
        return points @ rot.q
    if points.ndim != 2 or points.shape[1] != rot.dim:
        raise ValueError(
            f"rotation dimension mismatch: points have shape {points.shape}, "
            f"rotation is {rot.dim}x{rot.dim}"
        )
    return points @ rot.q
