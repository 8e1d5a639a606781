"""Evaluation metrics: rank-sum ROC-AUC, contamination labels, repetitions."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.stats import rankdata

from .rng import RngState

logger = logging.getLogger(__name__)


def _as_labels(labels) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.dtype != bool:
        labels = labels.astype(bool)
    return labels


def auc(scores, labels) -> float:
    """Mann-Whitney ROC-AUC: P(score_anomaly > score_normal) + 0.5 P(tie).

    Computed from average ranks in O(n log n).
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = _as_labels(labels)
    if scores.shape != labels.shape:
        raise ValueError(f"scores and labels differ in shape: {scores.shape} vs {labels.shape}")
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC undefined for single-class labels")
    ranks = rankdata(scores)  # average ranks for ties
    u = ranks[labels].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def contamination_count(n: int, c_prime: float) -> int:
    """round(c' * n), halves away from zero."""
    return int(math.floor(c_prime * n + 0.5))


def label_by_contamination(scores, c_prime: float) -> np.ndarray:
    """Mark the ``round(c' n)`` highest scores True; ties go to the lower index."""
    if not 0.0 <= c_prime <= 1.0:
        raise ValueError(f"contamination must be in [0, 1], got {c_prime}")
    scores = np.asarray(scores, dtype=np.float64)
    k = contamination_count(scores.size, c_prime)
    order = np.argsort(-scores, kind="stable")
    predicted = np.zeros(scores.size, dtype=bool)
    predicted[order[:k]] = True
    return predicted


def precision_recall(predicted, labels) -> tuple[float, float]:
    predicted = _as_labels(predicted)
    labels = _as_labels(labels)
    tp = int(np.count_nonzero(predicted & labels))
    n_pred = int(predicted.sum())
    n_true = int(labels.sum())
    precision = tp / n_pred if n_pred else 0.0
    recall = tp / n_true if n_true else 0.0
    return precision, recall


@dataclass
class RunResult:
    """One fit+score run.

    ``auc`` ranks the raw scores; ``auc_at_contamination`` ranks the binary
    predictions, which equals (TPR + TNR) / 2 at the contamination cut.
    """

    seed: int
    auc: float
    auc_at_contamination: float
    precision: float
    recall: float
    predicted: np.ndarray = field(repr=False)


@dataclass
class EvalReport:
    """Repetition summary for one dataset x algorithm cell."""

    contamination_data: float
    contamination_algo: float
    runs: list[RunResult]
    failures: list[tuple[int, str]] = field(default_factory=list)

    @property
    def repetitions(self) -> list[float]:
        return [r.auc for r in self.runs]

    @property
    def auc(self) -> float:
        return float(np.mean(self.repetitions))

    @property
    def avg_auc(self) -> float:
        return self.auc

    @property
    def max_auc(self) -> float:
        return float(np.max(self.repetitions))

    @property
    def avg_auc_at_contamination(self) -> float:
        return float(np.mean([r.auc_at_contamination for r in self.runs]))

    @property
    def max_auc_at_contamination(self) -> float:
        return float(np.max([r.auc_at_contamination for r in self.runs]))

    @property
    def predicted(self) -> np.ndarray:
        """Binary predictions of the first successful run."""
        return self.runs[0].predicted


def evaluate_scores(scores, labels, c_prime: float, seed: int = 0) -> RunResult:
    predicted = label_by_contamination(scores, c_prime)
    precision, recall = precision_recall(predicted, labels)
    return RunResult(
        seed=seed,
        auc=auc(scores, labels),
        auc_at_contamination=auc(predicted.astype(np.float64), labels),
        precision=precision,
        recall=recall,
        predicted=predicted,
    )


def run_repetitions(
    pipeline: Callable[[np.ndarray, int], np.ndarray],
    points,
    labels,
    k: int,
    seed: int = 0,
    c_prime: float | None = None,
) -> EvalReport:
    """Run ``pipeline(points, seed_i) -> scores`` ``k`` times and summarize.

    Run ``i`` uses seed ``RngState(seed).derive_seed(i)``. A failing run is
    logged and recorded; the call only raises when every run fails.
    ``c_prime`` defaults to the data contamination.
    """
    if k < 1:
        raise ValueError(f"need at least one repetition, got {k}")
    labels = _as_labels(labels)
    contamination_data = float(labels.mean()) if labels.size else 0.0
    if c_prime is None:
        c_prime = contamination_data
    master = RngState(seed)
    runs: list[RunResult] = []
    failures: list[tuple[int, str]] = []
    last_error: Exception | None = None
    for i in range(k):
        run_seed = master.derive_seed(i)
        try:
            scores = pipeline(points, run_seed)
            runs.append(evaluate_scores(scores, labels, c_prime, run_seed))
        except Exception as exc:  # noqa: BLE001 - recorded per run
            logger.warning("repetition %d failed: %s", i, exc)
            failures.append((i, str(exc)))
            last_error = exc
    if not runs:
        raise RuntimeError(f"all {k} repetitions failed") from last_error
    return EvalReport(contamination_data, float(c_prime), runs, failures)
