"""Seedable random streams with explicit sub-stream derivation.

Every stochastic step in the package draws from a ``numpy.random.Generator``
obtained from an :class:`RngState`. A state is a ``(seed, stream_id)`` pair;
child streams are derived by mixing integer keys into ``stream_id``, so the
randomness of tree ``i`` depends only on ``(seed, i)`` and never on how many
other trees were built or in which order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_MASK64 = 0xFFFFFFFFFFFFFFFF


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class RngState:
    """Value-semantic handle on one reproducible random stream.

    Two states with equal ``(seed, stream_id)`` yield identical generators.
    """

    seed: int = 0
    stream_id: int = 0

    def __post_init__(self) -> None:
        for name in ("seed", "stream_id"):
            value = getattr(self, name)
            if not 0 <= value <= _MASK64:
                raise ValueError(f"{name} must be an unsigned 64-bit integer, got {value}")

    def substream(self, *keys: int) -> RngState:
        """Derive a child stream labelled by ``keys`` (applied left to right)."""
        sid = self.stream_id
        for key in keys:
            if key < 0:
                raise ValueError(f"substream keys must be non-negative, got {key}")
            sid = _splitmix64(_splitmix64(sid) ^ (key & _MASK64))
        return RngState(self.seed, sid)

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream."""
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(seq))

    def derive_seed(self, *keys: int) -> int:
        """A 64-bit seed for an independent pipeline run (e.g. one repetition)."""
        child = self.substream(*keys)
        return _splitmix64(child.seed ^ child.stream_id)


def uniform(rng: np.random.Generator, lo: float, hi: float) -> float:
    """Draw from the half-open interval ``[lo, hi)``; returns ``lo`` when ``lo == hi``."""
    if lo > hi:
        raise ValueError(f"uniform requires lo <= hi, got lo={lo}, hi={hi}")
    if lo == hi:
        return float(lo)
    x = lo + (hi - lo) * rng.random()
    # lo + span*u can round up to hi for u close to 1
    if x >= hi:
        x = float(np.nextafter(hi, lo))
    return float(x)


def standard_normal(rng: np.random.Generator, size=None):
    """N(0, 1) draws; a float when ``size`` is None, else an array."""
    if size is None:
        return float(rng.standard_normal())
    return rng.standard_normal(size)


def unit_sphere_vector(rng: np.random.Generator, d: int) -> np.ndarray:
    """Uniform direction on the unit sphere in R^d (normalized Gaussian vector)."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    while True:
        v = rng.standard_normal(d)
        norm = np.linalg.norm(v)
        if norm > 0.0:
            return v / norm


def sample_without_replacement(rng: np.random.Generator, n: int, k: int) -> np.ndarray:
    """``k`` distinct indices from ``range(n)``, every k-subset equally likely."""
    if k < 0 or n < 0:
        raise ValueError("population and sample size must be non-negative")
    if k > n:
        raise ValueError(f"sample size exceeds population ({k} > {n})")
    return rng.choice(n, size=k, replace=False)
