"""Shannon entropy, ensemble averaging, and entropy extrema over credal sets.

The ensemble baseline decomposes uncertainty as: total = entropy of the mean
prediction, aleatoric = mean entropy of the samples, epistemic = difference.
The credal decomposition replaces these with the maximum and minimum entropy
over the interval-induced credal set. The maximum is found exactly by clamped
water-filling (the entropy maximizer under box-plus-simplex constraints
equalizes all unconstrained coordinates); the minimum, a concave minimization,
is attained at a polytope vertex and solved by vertex enumeration for small C
and by a greedy mass-concentration heuristic above ``exact_threshold``.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .core import (
    INGEST_TOLERANCE,
    IntervalSystem,
    NoConvergence,
    PredictionSet,
    ProbabilityVector,
    UncertaintyTriple,
    validate_probability_vector,
)
from .intervals import require_proper

#: Absolute tolerance on |sum(p) - 1| for the water-filling bisection.
BISECTION_TOL = 1e-12
BISECTION_MAX_ITER = 200
#: Largest C solved by exact vertex enumeration (candidate count C * 2^(C-1)).
EXACT_THRESHOLD_DEFAULT = 16
#: Extra randomized greedy orderings tried by the heuristic minimizer.
RANDOM_ORDERS_DEFAULT = 8
_GREEDY_ORDER_SEED = 20240917
_VERTEX_FEAS_TOL = 1e-12


class EntropySolution(NamedTuple):
    """An entropy extremum: optimal value in bits, the optimizing point, and
    whether the value is exact or a feasible-point heuristic bound."""

    value: float
    point: ProbabilityVector
    exact: bool = True


def _entropy_rows(rows: np.ndarray) -> np.ndarray:
    """Row-wise -sum(p * log2 p) with 0 * log 0 = 0."""
    safe = np.where(rows > 0.0, rows, 1.0)
    h = -(np.where(rows > 0.0, rows * np.log2(safe), 0.0)).sum(axis=-1)
    return np.maximum(h, 0.0)


def shannon_entropy(p: ProbabilityVector | np.ndarray) -> float:
    """Shannon entropy in bits; lies in [0, log2 C]."""
    vec = validate_probability_vector(p)
    return float(_entropy_rows(vec.values))


def average_prediction(preds: PredictionSet) -> ProbabilityVector:
    """Elementwise mean of the sampled predictions (the classical ensemble output)."""
    return validate_probability_vector(preds.samples.mean(axis=0))


def baseline_decomposition(preds: PredictionSet) -> UncertaintyTriple:
    """Ensemble decomposition: tu = H(mean), au = mean of per-sample H, eu = tu - au.

    Concavity of H guarantees eu >= 0 up to float noise.
    """
    tu = shannon_entropy(average_prediction(preds))
    au = float(_entropy_rows(preds.samples).mean())
    return UncertaintyTriple.from_total_and_aleatoric(tu, au)


def water_filling_level_sum(level: float, intervals: IntervalSystem) -> float:
    """S(level) = sum_k clamp(level, lower_k, upper_k); non-decreasing in level."""
    return float(np.clip(level, intervals.lower, intervals.upper).sum())


def _pinned_solution(bounds: np.ndarray) -> EntropySolution:
    # Feasible set collapsed (sum of one bound hits 1); normalize and evaluate.
    point = validate_probability_vector(bounds, tolerance=INGEST_TOLERANCE)
    return EntropySolution(shannon_entropy(point), point, True)


def upper_entropy(intervals: IntervalSystem) -> EntropySolution:
    """Maximum Shannon entropy over the credal set, solved exactly.

    The maximizer is p_k = clamp(c, lower_k, upper_k) for a water level c
    chosen by bisection so the coordinates sum to 1.
    """
    require_proper(intervals)
    lo, up = intervals.lower, intervals.upper
    if float(lo.sum()) >= 1.0:
        return _pinned_solution(lo)
    if float(up.sum()) <= 1.0:
        return _pinned_solution(up)
    a, b = float(lo.min()), float(up.max())
    c = 0.5 * (a + b)
    for _ in range(BISECTION_MAX_ITER):
        c = 0.5 * (a + b)
        s = water_filling_level_sum(c, intervals)
        if abs(s - 1.0) <= BISECTION_TOL:
            break
        if s < 1.0:
            a = c
        else:
            b = c
    else:
        raise NoConvergence(
            f"water-filling bisection did not reach |sum - 1| <= {BISECTION_TOL:g} "
            f"in {BISECTION_MAX_ITER} iterations"
        )
    point = validate_probability_vector(np.clip(c, lo, up))
    return EntropySolution(shannon_entropy(point), point, True)


def _exact_minimum(lo: np.ndarray, up: np.ndarray) -> tuple[float, np.ndarray]:
    """Enumerate polytope vertices: every vertex has at most one coordinate
    strictly between its bounds, so fix a slack index, pin the others to a
    lower/upper pattern, and keep candidates whose forced coordinate fits."""
    c = lo.shape[0]
    n_other = c - 1
    patterns = np.arange(1 << n_other, dtype=np.int64)
    pins = ((patterns[:, None] >> np.arange(n_other)) & 1).astype(bool)
    best_val = np.inf
    best_point: np.ndarray | None = None
    index = np.arange(c)
    for i in range(c):
        others = np.concatenate([index[:i], index[i + 1 :]])
        choice = np.where(pins, up[others], lo[others])
        forced = 1.0 - choice.sum(axis=1)
        feasible = (forced >= lo[i] - _VERTEX_FEAS_TOL) & (
            forced <= up[i] + _VERTEX_FEAS_TOL
        )
        if not feasible.any():
            continue
        points = np.empty((int(feasible.sum()), c))
        points[:, others] = choice[feasible]
        points[:, i] = np.clip(forced[feasible], lo[i], up[i])
        values = _entropy_rows(points)
        j = int(np.argmin(values))
        if values[j] < best_val:
            best_val = float(values[j])
            best_point = points[j]
    if best_point is None:
        raise NoConvergence("no feasible vertex found for a proper interval system")
    return best_val, best_point


def _greedy_minimum(
    lo: np.ndarray, up: np.ndarray, random_orders: int
) -> tuple[float, np.ndarray]:
    """Concentrate the free mass 1 - sum(lower) greedily along several orderings
    and keep the most peaked feasible point found. Ties in the sort keys break
    by ascending class index."""
    c = lo.shape[0]
    widths = up - lo
    free = 1.0 - float(lo.sum())
    orders = [
        np.argsort(-up, kind="stable"),
        np.argsort(-widths, kind="stable"),
        np.argsort(-lo, kind="stable"),
    ]
    rng = np.random.default_rng(_GREEDY_ORDER_SEED)
    orders.extend(rng.permutation(c) for _ in range(random_orders))
    best_val = np.inf
    best_point: np.ndarray | None = None
    for order in orders:
        w = widths[order]
        before = np.cumsum(w) - w
        fill = np.clip(free - before, 0.0, w)
        point = lo.copy()
        point[order] += fill
        value = float(_entropy_rows(point))
        if value < best_val:
            best_val = value
            best_point = point
    assert best_point is not None
    return best_val, best_point


def lower_entropy(
    intervals: IntervalSystem,
    exact_threshold: int = EXACT_THRESHOLD_DEFAULT,
    random_orders: int = RANDOM_ORDERS_DEFAULT,
) -> EntropySolution:
    """Minimum Shannon entropy over the credal set.

    Exact (vertex enumeration) for C <= exact_threshold; otherwise a greedy
    heuristic over feasible points, flagged with ``exact=False``. The
    heuristic never undershoots the true minimum because it only evaluates
    members of the credal set.
    """
    require_proper(intervals)
    lo, up = intervals.lower, intervals.upper
    if float(lo.sum()) >= 1.0:
        return _pinned_solution(lo)
    if float(up.sum()) <= 1.0:
        return _pinned_solution(up)
    if intervals.n_classes <= exact_threshold:
        _, raw_point = _exact_minimum(lo, up)
        exact = True
    else:
        _, raw_point = _greedy_minimum(lo, up, random_orders)
        exact = False
    point = validate_probability_vector(raw_point, tolerance=INGEST_TOLERANCE)
    return EntropySolution(shannon_entropy(point), point, exact)


def credal_decomposition(
    intervals: IntervalSystem,
    exact_threshold: int = EXACT_THRESHOLD_DEFAULT,
    random_orders: int = RANDOM_ORDERS_DEFAULT,
) -> UncertaintyTriple:
    """Credal decomposition: tu = upper entropy, au = lower entropy, eu = tu - au."""
    top = upper_entropy(intervals)
    bottom = lower_entropy(
        intervals, exact_threshold=exact_threshold, random_orders=random_orders
    )
    triple = UncertaintyTriple.from_total_and_aleatoric(
        top.value, bottom.value, exact=bottom.exact
    )
    if triple.eu < -1e-9:
        raise NoConvergence(f"credal epistemic uncertainty {triple.eu!r} below -1e-9")
    return triple
