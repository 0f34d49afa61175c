"""Reduce a C-class interval system to J pseudo-classes.

The top J-1 classes under the intersection probability keep their original
bounds; the rest merge into one pseudo-class. For the merged class we use the
coherent complement bounds

    merged_lower = max(sum of merged lowers, 1 - sum of kept uppers)
    merged_upper = min(sum of merged uppers, 1 - sum of kept lowers)

which every distribution in the original credal set provably satisfies after
coarsening. ``literal_merge=True`` instead reproduces an alternative merge
rule that maxes/mins against the kept classes' own bound sums; it is exposed
for comparison only and is not guaranteed sound.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .core import IntervalSystem, InvalidJ, ProbabilityVector
from .intervals import require_proper


class ReducedIntervals(NamedTuple):
    """A J-class system plus the original indices of the J-1 kept classes,
    in descending intersection-probability order. The merged pseudo-class is
    always the last one."""

    system: IntervalSystem
    kept: tuple[int, ...]


def suggested_reduction_size(n_classes: int) -> int | None:
    """Preset J for common regimes: none below 100 classes, 20 up to 999, 50 above."""
    if n_classes < 100:
        return None
    if n_classes < 1000:
        return 20
    return 50


def approximate_intervals(
    intervals: IntervalSystem,
    pstar: ProbabilityVector,
    reduced_classes: int,
    literal_merge: bool = False,
) -> ReducedIntervals:
    """Keep the top J-1 classes by intersection probability, merge the rest.

    Classes are ranked by ``pstar`` descending (ties by ascending index).
    The output system is proper whenever the input is.
    """
    require_proper(intervals)
    c = intervals.n_classes
    j = int(reduced_classes)
    if not 2 <= j <= c:
        raise InvalidJ(f"need 2 <= J <= {c}, got {j}")
    if pstar.n_classes != c:
        raise InvalidJ(f"intersection probability has {pstar.n_classes} classes, expected {c}")
    order = np.argsort(-pstar.values, kind="stable")
    kept = order[: j - 1]
    merged = order[j - 1 :]
    lo, up = intervals.lower, intervals.upper
    kept_lo, kept_up = lo[kept], up[kept]
    if literal_merge:
        merged_lo = max(1.0 - float(up[merged].sum()), float(kept_lo.sum()))
        merged_up = min(1.0 - float(lo[merged].sum()), float(kept_up.sum()))
    else:
        merged_lo = max(float(lo[merged].sum()), 1.0 - float(kept_up.sum()))
        merged_up = min(float(up[merged].sum()), 1.0 - float(kept_lo.sum()))
    merged_lo = min(max(merged_lo, 0.0), 1.0)
    merged_up = min(max(merged_up, 0.0), 1.0)
    merged_lo = min(merged_lo, merged_up)
    system = IntervalSystem(
        lower=np.append(kept_lo, merged_lo), upper=np.append(kept_up, merged_up)
    )
    return ReducedIntervals(system=system, kept=tuple(int(k) for k in kept))


def coarsen_distribution(
    p: np.ndarray | ProbabilityVector, kept: tuple[int, ...]
) -> np.ndarray:
    """Map a C-class distribution onto the reduced classes: kept entries first,
    then the total mass of everything else."""
    values = p.values if isinstance(p, ProbabilityVector) else np.asarray(p, dtype=float)
    kept_idx = np.asarray(kept, dtype=int)
    rest = np.setdiff1d(np.arange(values.shape[0]), kept_idx, assume_unique=False)
    return np.append(values[kept_idx], values[rest].sum())
