"""Interval systems over classes: extraction, membership, tightening, point summary.

An interval system [lower_k, upper_k] induces the credal set of all simplex
points p with lower_k <= p_k <= upper_k for every class k. The set is
non-empty ("proper") exactly when sum(lower) <= 1 <= sum(upper).
"""

from __future__ import annotations

import logging

import numpy as np

from .core import (
    DEFAULT_TOLERANCE,
    DimensionMismatch,
    ImproperIntervals,
    IntervalSystem,
    PredictionSet,
    ProbabilityVector,
    validate_probability_vector,
)

log = logging.getLogger(__name__)


def extract_intervals(preds: PredictionSet) -> IntervalSystem:
    """Per-class envelope of the sampled predictions: lower = min, upper = max.

    The result is always proper: any single sample witnesses
    sum(lower) <= 1 <= sum(upper).
    """
    samples = preds.samples
    return IntervalSystem(lower=samples.min(axis=0), upper=samples.max(axis=0))


def is_proper(intervals: IntervalSystem, tolerance: float = DEFAULT_TOLERANCE) -> bool:
    """True iff the induced credal set is non-empty: sum(L) <= 1 <= sum(U)."""
    return (
        float(intervals.lower.sum()) <= 1.0 + tolerance
        and float(intervals.upper.sum()) >= 1.0 - tolerance
    )


def require_proper(intervals: IntervalSystem, tolerance: float = DEFAULT_TOLERANCE) -> None:
    if not is_proper(intervals, tolerance):
        raise ImproperIntervals(
            f"sum(lower)={float(intervals.lower.sum())!r}, "
            f"sum(upper)={float(intervals.upper.sum())!r} violate "
            "sum(lower) <= 1 <= sum(upper)"
        )


def contains(
    intervals: IntervalSystem,
    p: ProbabilityVector,
    tolerance: float = DEFAULT_TOLERANCE,
) -> bool:
    """Whether the simplex point p respects every class interval, up to tolerance."""
    if p.n_classes != intervals.n_classes:
        raise DimensionMismatch(
            f"point has {p.n_classes} classes, intervals have {intervals.n_classes}"
        )
    v = p.values
    return bool(
        (v >= intervals.lower - tolerance).all()
        and (v <= intervals.upper + tolerance).all()
    )


def tighten(intervals: IntervalSystem) -> IntervalSystem:
    """Shrink bounds to their reachable envelope without changing the credal set.

    lower'_k = max(lower_k, 1 - sum_{j != k} upper_j)
    upper'_k = min(upper_k, 1 - sum_{j != k} lower_j)

    Every member of the credal set already satisfies the shrunk bounds, so the
    induced set is unchanged; the transform is idempotent and never widens.
    """
    require_proper(intervals)
    lo, up = intervals.lower, intervals.upper
    sum_lo, sum_up = lo.sum(), up.sum()
    new_lo = np.maximum(lo, 1.0 - (sum_up - up))
    new_up = np.minimum(up, 1.0 - (sum_lo - lo))
    new_lo = np.clip(new_lo, 0.0, 1.0)
    new_up = np.clip(new_up, 0.0, 1.0)
    # Properness keeps max(lower', upper') ordered; guard against float drift.
    new_up = np.maximum(new_up, new_lo)
    return IntervalSystem(lower=new_lo, upper=new_up)


def intersection_alpha(intervals: IntervalSystem) -> float:
    """The common mixing weight placing lower + alpha * (upper - lower) on the simplex.

    alpha = (1 - sum(lower)) / sum(upper - lower); proper systems give
    alpha in [0, 1]. Float noise outside that range is clamped (and logged).
    For a zero-width (point) system alpha is irrelevant and 0.0 is returned.
    """
    require_proper(intervals)
    widths = intervals.widths
    total_width = float(widths.sum())
    if total_width == 0.0:
        return 0.0
    alpha = (1.0 - float(intervals.lower.sum())) / total_width
    if not 0.0 <= alpha <= 1.0:
        log.warning("clamping interval mixing weight %r into [0, 1]", alpha)
        alpha = min(max(alpha, 0.0), 1.0)
    return alpha


def intersection_probability(intervals: IntervalSystem) -> ProbabilityVector:
    """The unique simplex point lower + alpha * (upper - lower) with one shared alpha.

    Treats every class interval with equal trust. A zero-width system already
    is a single simplex point, which is returned directly.
    """
    require_proper(intervals)
    if float(intervals.widths.sum()) == 0.0:
        return validate_probability_vector(intervals.lower)
    alpha = intersection_alpha(intervals)
    point = intervals.lower + alpha * intervals.widths
    return validate_probability_vector(point)
