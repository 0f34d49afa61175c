"""Lower probability over subsets, Möbius masses, and the generalized Hartley measure.

For an interval system the lower probability of a subset A is

    nu(A) = max(sum_{k in A} lower_k, 1 - sum_{k not in A} upper_k)

Möbius inversion turns nu into subset masses m, and GH = sum_B m(B) * log2|B|
measures the non-specificity (imprecision) of the credal set. All 2^C subsets
are enumerated, so C is capped; reduce the system first when it is larger.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np

from .core import (
    IndexOutOfRange,
    IntervalSystem,
    MassAssignment,
    TooManyClasses,
)
from .intervals import require_proper

#: Largest class count for subset enumeration (2^20 subsets is about 1e6).
GH_MAX_CLASSES_DEFAULT = 20
#: Masses smaller than this in magnitude are treated as exact zeros.
MASS_DROP = 1e-12


def _check_size(intervals: IntervalSystem, gh_max_classes: int) -> None:
    if intervals.n_classes > gh_max_classes:
        raise TooManyClasses(
            f"{intervals.n_classes} classes exceed the subset-enumeration cap "
            f"{gh_max_classes}; reduce the interval system first"
        )


def lower_probability(intervals: IntervalSystem, subset: Iterable[int]) -> float:
    """nu(subset) = max(sum of lowers inside, 1 - sum of uppers outside)."""
    members = sorted({int(k) for k in subset})
    c = intervals.n_classes
    for k in members:
        if not 0 <= k < c:
            raise IndexOutOfRange(f"class {k} outside [0, {c})")
    inside = np.zeros(c, dtype=bool)
    inside[members] = True
    return max(
        float(intervals.lower[inside].sum()),
        1.0 - float(intervals.upper[~inside].sum()),
    )


def _subset_sums(values: np.ndarray) -> np.ndarray:
    """sums[mask] = sum of values[k] over the bits set in mask, for all masks."""
    c = values.shape[0]
    sums = np.zeros(1 << c)
    for k in range(c):
        half = 1 << k
        block = sums.reshape(-1, 2 * half)
        block[:, half:] = block[:, :half] + values[k]
    return sums


def _lower_probability_table(intervals: IntervalSystem) -> np.ndarray:
    lower_sums = _subset_sums(intervals.lower)
    upper_sums = _subset_sums(intervals.upper)
    total_upper = float(intervals.upper.sum())
    table = np.maximum(lower_sums, 1.0 - (total_upper - upper_sums))
    table[0] = 0.0
    table[-1] = 1.0
    return table


def _mobius_table(capacity: np.ndarray, n_classes: int) -> np.ndarray:
    """In-place subset Möbius inversion: m[B] = sum_{A subset of B} (-1)^|B\\A| nu[A]."""
    masses = capacity.copy()
    for k in range(n_classes):
        half = 1 << k
        block = masses.reshape(-1, 2 * half)
        block[:, half:] -= block[:, :half]
    return masses


def _subset_sizes(n_classes: int) -> np.ndarray:
    index = np.arange(1 << n_classes, dtype=np.int64)
    sizes = np.zeros(1 << n_classes, dtype=np.int64)
    for k in range(n_classes):
        sizes += (index >> k) & 1
    return sizes


def mobius_masses(
    intervals: IntervalSystem, gh_max_classes: int = GH_MAX_CLASSES_DEFAULT
) -> MassAssignment:
    """Subset masses recovered from the lower probability; sparse below MASS_DROP."""
    _check_size(intervals, gh_max_classes)
    require_proper(intervals)
    c = intervals.n_classes
    table = _mobius_table(_lower_probability_table(intervals), c)
    keep = np.nonzero(np.abs(table) >= MASS_DROP)[0]
    masses = {
        frozenset(k for k in range(c) if mask >> k & 1): float(table[mask])
        for mask in keep.tolist()
    }
    return MassAssignment(n_classes=c, masses=masses)


def generalized_hartley(
    intervals: IntervalSystem, gh_max_classes: int = GH_MAX_CLASSES_DEFAULT
) -> float:
    """GH = sum_B m(B) * log2 |B| in bits; 0 for a point system, log2 C when vacuous."""
    _check_size(intervals, gh_max_classes)
    require_proper(intervals)
    c = intervals.n_classes
    table = _mobius_table(_lower_probability_table(intervals), c)
    table[np.abs(table) < MASS_DROP] = 0.0
    sizes = _subset_sizes(c)
    weights = np.zeros(table.shape[0])
    nonempty = sizes > 0
    weights[nonempty] = np.log2(sizes[nonempty])
    return float(table @ weights)
