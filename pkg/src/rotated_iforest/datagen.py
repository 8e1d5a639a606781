"""Synthetic benchmark datasets with planted anomalies.

Normal points come from one of five generators (one or two spherical
Gaussians, two stretched Gaussians, a noisy sinusoid, a Swiss roll).
Anomalies are appended at fixed positions; ``count`` copies of a position
are spread over ``position[0] +- NEAR_OFFSET``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

KINDS = ("one_gaussian", "two_gaussians", "skewed_gaussians", "sinusoid", "swiss_roll")
NEAR_OFFSET = 0.01

DEFAULT_PARAMS: dict[str, dict[str, Any]] = {
    "one_gaussian": {"mean": (0.5, 0.5), "sigma": 0.07},
    "two_gaussians": {
        "means": ((0.8, 0.2), (0.2, 0.8)),
        "sigma": 0.06,
        "weights": (0.5, 0.5),
    },
    "skewed_gaussians": {
        "means": ((0.2, 0.4), (-0.2, 1.0)),
        "sigma": 0.06,
        "weights": (0.5, 0.5),
        "stretch": 4.0,
        "angle": None,  # radians; drawn uniformly from [0, pi) when None
    },
    "sinusoid": {"x_max": 7 * math.pi, "noise": 0.1},
    "swiss_roll": {
        "u_range": (1.5 * math.pi, 4.5 * math.pi),
        "height": (0.0, 21.0),
        "jitter": 0.05,
    },
}

CORNERS = (((0.0, 0.0), 2), ((1.0, 0.0), 2), ((0.0, 1.0), 2), ((1.0, 1.0), 2))
CARDINALS = (((0.5, 1.0), 2), ((0.5, 0.0), 2), ((1.0, 0.5), 2), ((0.0, 0.5), 2))

ANOMALY_PRESETS: dict[str, tuple] = {
    "corners": CORNERS,
    "nsew": CARDINALS,
    "corners_nsew": CORNERS + CARDINALS,
    "two_gaussians": (((0.8, 0.8), 2), ((0.25, 0.25), 2), ((0.5, 0.5), 2)),
    "two_gaussians_center3": (((0.5, 0.5), 3),),
    "skewed": (((0.8, 0.7), 1), ((0.82, 0.72), 1), ((0.78, 0.68), 1)),
    "sinusoid": (((5.0, 1.0), 2), ((7.0, -1.0), 2), ((10.0, 1.0), 2), ((20.0, -1.0), 2)),
    "swiss_roll": (
        ((-5.0, 0.0, 0.0), 2),
        ((-2.0, 0.0, -2.0), 2),
        ((8.0, 0.0, -2.0), 2),
        ((-10.0, -10.0, 10.0), 2),
    ),
}


@dataclass(frozen=True)
class SyntheticSpec:
    """What to generate: ``kind``, normal count, anomaly positions, parameters.

    ``params`` overrides entries of ``DEFAULT_PARAMS[kind]``.
    """

    kind: str
    n_normal: int = 2000
    anomalies: tuple = ()
    params: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown dataset kind {self.kind!r}; expected one of {KINDS}")
        if self.n_normal < 0:
            raise ValueError("n_normal must be non-negative")
        unknown = set(self.params) - set(DEFAULT_PARAMS[self.kind])
        if unknown:
            raise ValueError(f"unknown parameters for {self.kind}: {sorted(unknown)}")
        p = self.resolved_params()
        if "sigma" in p and p["sigma"] <= 0:
            raise ValueError("sigma must be > 0")
        if "weights" in p:
            w = np.asarray(p["weights"], dtype=float)
            if np.any(w < 0) or not math.isclose(w.sum(), 1.0, abs_tol=1e-9):
                raise ValueError(f"mixture weights must be non-negative and sum to 1, got {p['weights']}")
        if "stretch" in p and p["stretch"] <= 0:
            raise ValueError(f"stretch factor must be > 0, got {p['stretch']}")

    def resolved_params(self) -> dict[str, Any]:
        return {**DEFAULT_PARAMS[self.kind], **self.params}


@dataclass
class LabeledDataset:
    points: np.ndarray
    labels: np.ndarray
    name: str = ""

    @property
    def contamination(self) -> float:
        return float(np.count_nonzero(self.labels)) / len(self.labels) if len(self.labels) else 0.0

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


PRESETS: dict[str, SyntheticSpec] = {
    "standard_gaussian": SyntheticSpec("one_gaussian", params={"mean": (0.0, 0.0), "sigma": 1.0}),
    "one_gaussian_corners": SyntheticSpec("one_gaussian", anomalies=ANOMALY_PRESETS["corners"]),
    "one_gaussian_nsew": SyntheticSpec("one_gaussian", anomalies=ANOMALY_PRESETS["nsew"]),
    "one_gaussian_all": SyntheticSpec("one_gaussian", anomalies=ANOMALY_PRESETS["corners_nsew"]),
    "two_gaussians": SyntheticSpec("two_gaussians", anomalies=ANOMALY_PRESETS["two_gaussians"]),
    "two_gaussians_center3": SyntheticSpec(
        "two_gaussians", anomalies=ANOMALY_PRESETS["two_gaussians_center3"]
    ),
    "skewed_gaussians": SyntheticSpec("skewed_gaussians", anomalies=ANOMALY_PRESETS["skewed"]),
    "sinusoid": SyntheticSpec("sinusoid", anomalies=ANOMALY_PRESETS["sinusoid"]),
    "swiss_roll": SyntheticSpec("swiss_roll", anomalies=ANOMALY_PRESETS["swiss_roll"]),
}


def anomaly_points(anomalies, d: int) -> np.ndarray:
    """Expand ``(position, count)`` pairs into concrete points."""
    rows = []
    for position, count in anomalies:
        position = np.asarray(position, dtype=np.float64)
        if position.shape != (d,):
            raise ValueError(f"anomaly position {tuple(position)} is not {d}-dimensional")
        if count == 1:
            rows.append(position)
            continue
        for j in range(count):
            p = position.copy()
            p[0] += NEAR_OFFSET * (2 * j - (count - 1)) / (count - 1)
            rows.append(p)
    return np.array(rows, dtype=np.float64).reshape(-1, d)


def _with_anomalies(normals: np.ndarray, spec: SyntheticSpec) -> LabeledDataset:
    extra = anomaly_points(spec.anomalies, normals.shape[1])
    points = np.vstack([normals, extra])
    labels = np.r_[np.zeros(len(normals), dtype=bool), np.ones(len(extra), dtype=bool)]
    return LabeledDataset(points, labels, spec.kind)


def _mixture(rng, n, means, sigma, weights) -> tuple[np.ndarray, np.ndarray]:
    means = np.asarray(means, dtype=np.float64)
    component = rng.choice(len(means), size=n, p=np.asarray(weights, dtype=float))
    noise = rng.standard_normal((n, means.shape[1]))
    return component, means[component] + sigma * noise


def _check_kind(spec: SyntheticSpec, kind: str) -> None:
    if spec.kind != kind:
        raise ValueError(f"expected a {kind} spec, got {spec.kind}")


def gen_one_gaussian(rng: np.random.Generator, spec: SyntheticSpec) -> LabeledDataset:
    _check_kind(spec, "one_gaussian")
    p = spec.resolved_params()
    mean = np.asarray(p["mean"], dtype=np.float64)
    normals = mean + p["sigma"] * rng.standard_normal((spec.n_normal, mean.size))
    return _with_anomalies(normals, spec)


def gen_two_gaussians(rng: np.random.Generator, spec: SyntheticSpec) -> LabeledDataset:
    _check_kind(spec, "two_gaussians")
    p = spec.resolved_params()
    _, normals = _mixture(rng, spec.n_normal, p["means"], p["sigma"], p["weights"])
    return _with_anomalies(normals, spec)


def stretch_matrix(stretch: float, angle: float) -> np.ndarray:
    """Symmetric map scaling by ``stretch`` along ``angle`` and 1 across it."""
    c, s = math.cos(angle), math.sin(angle)
    frame = np.array([[c, -s], [s, c]])
    return frame @ np.diag([stretch, 1.0]) @ frame.T


def gen_skewed_gaussians(rng: np.random.Generator, spec: SyntheticSpec) -> LabeledDataset:
    """Two spherical clusters, each stretched about its own mean along one angle."""
    _check_kind(spec, "skewed_gaussians")
    p = spec.resolved_params()
    angle = p["angle"]
    if angle is None:
        angle = rng.uniform(0.0, math.pi)
    means = np.asarray(p["means"], dtype=np.float64)
    component, normals = _mixture(rng, spec.n_normal, means, p["sigma"], p["weights"])
    deviation = (normals - means[component]) @ stretch_matrix(p["stretch"], angle).T
    dataset = _with_anomalies(means[component] + deviation, spec)
    dataset.name = f"skewed_gaussians(angle={angle:.4f})"
    return dataset


def gen_sinusoid(rng: np.random.Generator, spec: SyntheticSpec) -> LabeledDataset:
    _check_kind(spec, "sinusoid")
    p = spec.resolved_params()
    x = rng.uniform(0.0, p["x_max"], spec.n_normal)
    y = np.sin(x) + p["noise"] * rng.standard_normal(spec.n_normal)
    return _with_anomalies(np.column_stack([x, y]), spec)


def gen_swiss_roll(rng: np.random.Generator, spec: SyntheticSpec) -> LabeledDataset:
    """Points on ``(u cos u, v, u sin u)`` plus isotropic jitter."""
    _check_kind(spec, "swiss_roll")
    p = spec.resolved_params()
    u = rng.uniform(*p["u_range"], spec.n_normal)
    v = rng.uniform(*p["height"], spec.n_normal)
    surface = np.column_stack([u * np.cos(u), v, u * np.sin(u)])
    jitter = p["jitter"] * rng.standard_normal(surface.shape)
    return _with_anomalies(surface + jitter, spec)


GENERATORS = {
    "one_gaussian": gen_one_gaussian,
    "two_gaussians": gen_two_gaussians,
    "skewed_gaussians": gen_skewed_gaussians,
    "sinusoid": gen_sinusoid,
    "swiss_roll": gen_swiss_roll,
}


def generate(spec: SyntheticSpec | str, rng: np.random.Generator) -> LabeledDataset:
    """Generate a dataset from a SyntheticSpec or a preset name."""
    if isinstance(spec, str):
        try:
            spec = PRESETS[spec]
        except KeyError:
            raise ValueError(f"unknown preset {spec!r}; expected one of {sorted(PRESETS)}") from None
    return GENERATORS[spec.kind](rng, spec)


# presets with planted anomalies, i.e. those an AUC can be computed on
BENCHMARK_PRESETS = tuple(name for name, spec in PRESETS.items() if spec.anomalies)
