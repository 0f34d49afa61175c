"""Detection and calibration metrics: AUROC, AUPRC, ECE, NLL, accuracy.

Detection treats OOD as the positive class (ID labeled 0, OOD labeled 1) and
scores are uncertainties, so larger means "more OOD". AUROC uses the rank
(Mann-Whitney) formulation with ties counted half; AUPRC is average precision
with tied scores handled as one threshold group. ECE/NLL/accuracy follow the
usual conventions: confidence is the max-class probability, argmax ties break
toward the lowest class index, NLL is in nats with probabilities clamped at
1e-12.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    EmptyInput,
    InputError,
    LabelOutOfRange,
    LengthMismatch,
    NonFiniteScore,
    PredictionSet,
    ProbabilityVector,
)

#: Default number of equal-width confidence bins for ECE.
ECE_BINS_DEFAULT = 15
#: Probabilities are clamped below at this value before taking logs in NLL.
NLL_CLAMP = 1e-12


@dataclass(frozen=True)
class DetectionReport:
    auroc: float
    auprc: float
    n_id: int
    n_ood: int

    def __post_init__(self):
        if self.n_id < 1 or self.n_ood < 1:
            raise EmptyInput("detection needs at least one ID and one OOD score")


@dataclass(frozen=True)
class CalibrationReport:
    ece: float
    nll: float
    accuracy: float
    bins: int

    def __post_init__(self):
        if self.bins < 1:
            raise InputError(f"need at least 1 calibration bin, got {self.bins}")


def _score_array(scores: Sequence[float], side: str) -> np.ndarray:
    arr = np.asarray(scores, dtype=np.float64).ravel()
    if arr.size == 0:
        raise EmptyInput(f"no {side} scores given")
    if not np.isfinite(arr).all():
        raise NonFiniteScore(f"{side} scores contain NaN or Inf")
    return arr


def auroc(id_scores: Sequence[float], ood_scores: Sequence[float]) -> float:
    """Probability that a random OOD score exceeds a random ID score, ties at 1/2."""
    neg = _score_array(id_scores, "ID")
    pos = _score_array(ood_scores, "OOD")
    pooled = np.concatenate([neg, pos])
    _, inverse, counts = np.unique(pooled, return_inverse=True, return_counts=True)
    ends = np.cumsum(counts)
    mean_rank = (ends - counts) + (counts + 1) / 2.0  # 1-based midrank per value
    ranks = mean_rank[inverse]
    u = ranks[neg.size :].sum() - pos.size * (pos.size + 1) / 2.0
    return float(u / (neg.size * pos.size))


def auprc(id_scores: Sequence[float], ood_scores: Sequence[float]) -> float:
    """Average precision with OOD positive; a tie group counts as one threshold,
    with precision evaluated after the whole group is included."""
    neg = _score_array(id_scores, "ID")
    pos = _score_array(ood_scores, "OOD")
    pooled = np.concatenate([neg, pos])
    values, inverse = np.unique(pooled, return_inverse=True)
    fp_per_value = np.bincount(inverse[: neg.size], minlength=values.size)
    tp_per_value = np.bincount(inverse[neg.size :], minlength=values.size)
    tp_desc = tp_per_value[::-1]
    fp_desc = fp_per_value[::-1]
    cum_tp = np.cumsum(tp_desc)
    cum_fp = np.cumsum(fp_desc)
    precision = cum_tp / (cum_tp + cum_fp)
    return float((tp_desc * precision).sum() / pos.size)


def _prediction_matrix(
    predictions: Sequence[ProbabilityVector] | np.ndarray,
) -> np.ndarray:
    if isinstance(predictions, np.ndarray):
        return PredictionSet.from_rows(predictions).samples
    rows = [
        p.values if isinstance(p, ProbabilityVector) else np.asarray(p, dtype=float)
        for p in predictions
    ]
    if not rows:
        raise EmptyInput("no predictions given")
    return PredictionSet.from_rows(np.stack(rows)).samples


def _checked_labels(labels: Sequence[int], n: int, c: int) -> np.ndarray:
    arr = np.asarray(labels, dtype=np.int64).ravel()
    if arr.size != n:
        raise LengthMismatch(f"{arr.size} labels for {n} predictions")
    if arr.size and ((arr < 0) | (arr >= c)).any():
        bad = int(arr[((arr < 0) | (arr >= c)).argmax()])
        raise LabelOutOfRange(f"label {bad} outside [0, {c})")
    return arr


def ece(
    predictions: Sequence[ProbabilityVector] | np.ndarray,
    labels: Sequence[int],
    bins: int = ECE_BINS_DEFAULT,
) -> float:
    """Expected calibration error over equal-width confidence bins on (0, 1].

    A sample with confidence c lands in bin ceil(c * bins), with c = 0 sent to
    bin 1; empty bins contribute nothing.
    """
    if bins < 1:
        raise InputError(f"need at least 1 bin, got {bins}")
    matrix = _prediction_matrix(predictions)
    y = _checked_labels(labels, matrix.shape[0], matrix.shape[1])
    confidence = matrix.max(axis=1)
    predicted = matrix.argmax(axis=1)
    correct = (predicted == y).astype(np.float64)
    bin_index = np.clip(np.ceil(confidence * bins), 1, bins).astype(np.int64)
    count = np.bincount(bin_index, minlength=bins + 1)[1:]
    acc_sum = np.bincount(bin_index, weights=correct, minlength=bins + 1)[1:]
    conf_sum = np.bincount(bin_index, weights=confidence, minlength=bins + 1)[1:]
    occupied = count > 0
    gaps = np.abs(acc_sum[occupied] - conf_sum[occupied]) / count[occupied]
    weights = count[occupied] / matrix.shape[0]
    return float((weights * gaps).sum())


def nll(
    predictions: Sequence[ProbabilityVector] | np.ndarray, labels: Sequence[int]
) -> float:
    """Mean negative natural-log likelihood of the true class."""
    matrix = _prediction_matrix(predictions)
    y = _checked_labels(labels, matrix.shape[0], matrix.shape[1])
    p_true = np.maximum(matrix[np.arange(matrix.shape[0]), y], NLL_CLAMP)
    return float(-np.log(p_true).mean())


def accuracy(
    predictions: Sequence[ProbabilityVector] | np.ndarray, labels: Sequence[int]
) -> float:
    """Fraction of samples whose argmax class (ties to lowest index) is the label."""
    matrix = _prediction_matrix(predictions)
    y = _checked_labels(labels, matrix.shape[0], matrix.shape[1])
    return float((matrix.argmax(axis=1) == y).mean())


def detection_report(
    id_scores: Sequence[float], ood_scores: Sequence[float]
) -> DetectionReport:
    return DetectionReport(
        auroc=auroc(id_scores, ood_scores),
        auprc=auprc(id_scores, ood_scores),
        n_id=len(np.asarray(id_scores).ravel()),
        n_ood=len(np.asarray(ood_scores).ravel()),
    )


def calibration_report(
    predictions: Sequence[ProbabilityVector] | np.ndarray,
    labels: Sequence[int],
    bins: int = ECE_BINS_DEFAULT,
) -> CalibrationReport:
    return CalibrationReport(
        ece=ece(predictions, labels, bins=bins),
        nll=nll(predictions, labels),
        accuracy=accuracy(predictions, labels),
        bins=bins,
    )
