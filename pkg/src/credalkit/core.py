"""Domain types, numeric conventions, and validation shared across the toolkit.

Conventions: all entropy-like quantities are in bits (log base 2); negative
log-likelihood uses the natural log. ``0 * log 0`` is defined as 0 everywhere.
All types are immutable after construction and safe to share between workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

#: Simplex tolerance for internally computed vectors.
DEFAULT_TOLERANCE = 1e-9
#: Simplex tolerance for file-ingested vectors (float32 inputs accumulate rounding).
INGEST_TOLERANCE = 1e-6
#: Deviations at or below this are left untouched so validation is bit-stable.
RENORM_EPS = 1e-12


class CredalError(Exception):
    """Base class for all toolkit errors."""


class InputError(CredalError):
    """Invalid input data or configuration (CLI exit code 2)."""


class NumericalError(CredalError):
    """A numerical procedure failed to converge (CLI exit code 3)."""


class NegativeEntry(InputError):
    pass


class NonFiniteEntry(InputError):
    pass


class DimensionTooSmall(InputError):
    pass


class SumOutOfTolerance(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class ImproperIntervals(InputError):
    pass


class InvalidJ(InputError):
    pass


class IndexOutOfRange(InputError):
    pass


class TooManyClasses(InputError):
    pass


class LengthMismatch(InputError):
    pass


class LabelOutOfRange(InputError):
    pass


class EmptyInput(InputError):
    pass


class NonFiniteScore(InputError):
    pass


class NoConvergence(NumericalError):
    pass


def _frozen_array(values, dtype=np.float64) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class ProbabilityVector:
    """A point on the probability simplex over C >= 2 classes.

    Entries are float64 in [0, 1] and sum to 1 within ``DEFAULT_TOLERANCE``.
    Use :func:`validate_probability_vector` to build one from raw numbers.
    """

    values: np.ndarray

    def __post_init__(self):
        arr = _frozen_array(self.values)
        object.__setattr__(self, "values", arr)
        if arr.ndim != 1:
            raise DimensionMismatch(f"expected a 1-D vector, got shape {arr.shape}")
        if arr.shape[0] < 2:
            raise DimensionTooSmall(f"need at least 2 classes, got {arr.shape[0]}")
        if not np.isfinite(arr).all():
            raise NonFiniteEntry("probability vector contains NaN or Inf")
        if (arr < 0.0).any():
            raise NegativeEntry(f"negative entry at index {int(np.argmin(arr))}")
        if (arr > 1.0).any():
            raise SumOutOfTolerance(f"entry above 1 at index {int(np.argmax(arr))}")
        dev = abs(float(arr.sum()) - 1.0)
        if dev > DEFAULT_TOLERANCE:
            raise SumOutOfTolerance(f"entries sum to 1{dev:+.3e}")

    @property
    def n_classes(self) -> int:
        return self.values.shape[0]

    def __len__(self) -> int:
        return self.values.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ProbabilityVector):
            return NotImplemented
        return np.array_equal(self.values, other.values)

    def __repr__(self) -> str:
        return f"ProbabilityVector({self.values.tolist()!r})"


def validate_probability_vector(
    values: Sequence[float] | np.ndarray | ProbabilityVector,
    tolerance: float = DEFAULT_TOLERANCE,
) -> ProbabilityVector:
    """Validate (and if needed renormalize) a raw vector into a simplex point.

    The vector is accepted when its sum deviates from 1 by less than
    ``tolerance``; deviations above ``RENORM_EPS`` are removed by dividing by
    the sum, smaller ones are left bit-identical. Already-validated vectors
    pass through unchanged, which makes validation idempotent.
    """
    if isinstance(values, ProbabilityVector):
        return values
    arr = np.array(values, dtype=np.float64, copy=True)
    if arr.ndim != 1:
        raise DimensionMismatch(f"expected a 1-D vector, got shape {arr.shape}")
    if arr.shape[0] < 2:
        raise DimensionTooSmall(f"need at least 2 classes, got {arr.shape[0]}")
    if not np.isfinite(arr).all():
        raise NonFiniteEntry("probability vector contains NaN or Inf")
    if (arr < 0.0).any():
        raise NegativeEntry(f"negative entry at index {int(np.argmin(arr))}")
    s = float(arr.sum())
    if not abs(s - 1.0) < tolerance:
        raise SumOutOfTolerance(f"entries sum to {s!r}, outside tolerance {tolerance:g}")
    if abs(s - 1.0) > RENORM_EPS:
        arr = arr / s
    arr = np.clip(arr, 0.0, 1.0)
    return ProbabilityVector(arr)


@dataclass(frozen=True, eq=False)
class PredictionSet:
    """N sampled probability vectors over the same C classes for one instance."""

    samples: np.ndarray  # shape (N, C), every row a simplex point

    def __post_init__(self):
        arr = _frozen_array(self.samples)
        object.__setattr__(self, "samples", arr)
        if arr.ndim != 2:
            raise DimensionMismatch(f"expected an (N, C) array, got shape {arr.shape}")
        n, c = arr.shape
        if n < 1:
            raise EmptyInput("prediction set needs at least one sample")
        if c < 2:
            raise DimensionTooSmall(f"need at least 2 classes, got {c}")
        if not np.isfinite(arr).all():
            raise NonFiniteEntry("prediction set contains NaN or Inf")
        if (arr < 0.0).any():
            raise NegativeEntry("prediction set contains a negative probability")
        dev = np.abs(arr.sum(axis=1) - 1.0)
        if (dev > DEFAULT_TOLERANCE).any():
            row = int(np.argmax(dev))
            raise SumOutOfTolerance(f"sample {row} sums to 1{dev[row]:+.3e}")

    @classmethod
    def from_rows(
        cls,
        rows: Sequence[Sequence[float]] | np.ndarray,
        tolerance: float = DEFAULT_TOLERANCE,
    ) -> "PredictionSet":
        """Build a prediction set, renormalizing rows whose sums drift within tolerance."""
        arr = np.array(rows, dtype=np.float64, copy=True)
        if arr.ndim != 2:
            raise DimensionMismatch(f"expected an (N, C) array, got shape {arr.shape}")
        if arr.shape[1] < 2:
            raise DimensionTooSmall(f"need at least 2 classes, got {arr.shape[1]}")
        if not np.isfinite(arr).all():
            raise NonFiniteEntry("prediction set contains NaN or Inf")
        if (arr < 0.0).any():
            raise NegativeEntry("prediction set contains a negative probability")
        sums = arr.sum(axis=1)
        dev = np.abs(sums - 1.0)
        if not (dev < tolerance).all():
            row = int(np.argmax(dev))
            raise SumOutOfTolerance(
                f"sample {row} sums to {sums[row]!r}, outside tolerance {tolerance:g}"
            )
        renorm = dev > RENORM_EPS
        if renorm.any():
            arr[renorm] = arr[renorm] / sums[renorm, None]
        arr = np.clip(arr, 0.0, 1.0)
        return cls(arr)

    @property
    def n_samples(self) -> int:
        return self.samples.shape[0]

    @property
    def n_classes(self) -> int:
        return self.samples.shape[1]

    def vectors(self) -> Iterable[ProbabilityVector]:
        for row in self.samples:
            yield ProbabilityVector(row)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PredictionSet):
            return NotImplemented
        return np.array_equal(self.samples, other.samples)

    def __repr__(self) -> str:
        return f"PredictionSet(n_samples={self.n_samples}, n_classes={self.n_classes})"


@dataclass(frozen=True, eq=False)
class IntervalSystem:
    """Per-class probability bounds [lower_k, upper_k] describing a credal set.

    Construction only enforces 0 <= lower <= upper <= 1 elementwise; whether
    the induced credal set is non-empty is a separate, queryable property
    (see :func:`credalkit.intervals.is_proper`), so that degenerate systems
    can still be represented and inspected.
    """

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = _frozen_array(self.lower)
        up = _frozen_array(self.upper)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", up)
        if lo.ndim != 1 or up.ndim != 1:
            raise DimensionMismatch("interval bounds must be 1-D")
        if lo.shape != up.shape:
            raise DimensionMismatch(f"bound shapes differ: {lo.shape} vs {up.shape}")
        if lo.shape[0] < 2:
            raise DimensionTooSmall(f"need at least 2 classes, got {lo.shape[0]}")
        if not (np.isfinite(lo).all() and np.isfinite(up).all()):
            raise NonFiniteEntry("interval bounds contain NaN or Inf")
        if (lo < 0.0).any() or (up > 1.0).any():
            raise InputError("interval bounds must lie in [0, 1]")
        if (lo > up).any():
            k = int(np.argmax(lo - up))
            raise InputError(f"lower bound exceeds upper bound for class {k}")

    @property
    def n_classes(self) -> int:
        return self.lower.shape[0]

    @property
    def widths(self) -> np.ndarray:
        return self.upper - self.lower

    def __eq__(self, other) -> bool:
        if not isinstance(other, IntervalSystem):
            return NotImplemented
        return np.array_equal(self.lower, other.lower) and np.array_equal(
            self.upper, other.upper
        )

    def __repr__(self) -> str:
        return f"IntervalSystem(lower={self.lower.tolist()!r}, upper={self.upper.tolist()!r})"


@dataclass(frozen=True)
class UncertaintyTriple:
    """Total / aleatoric / epistemic uncertainty in bits, with eu = tu - au."""

    tu: float
    au: float
    eu: float
    exact: bool = True  # False when the aleatoric side came from a heuristic

    def __post_init__(self):
        if self.tu < 0.0 or self.au < 0.0:
            raise InputError("uncertainty components must be non-negative")
        if self.eu != self.tu - self.au:
            raise InputError("eu must equal tu - au exactly")

    @classmethod
    def from_total_and_aleatoric(
        cls, tu: float, au: float, exact: bool = True
    ) -> "UncertaintyTriple":
        tu = max(float(tu), 0.0)
        au = max(float(au), 0.0)
        return cls(tu=tu, au=au, eu=tu - au, exact=exact)


@dataclass(frozen=True, eq=False)
class LabeledBatch:
    """Many instances' prediction sets (shared C), optionally with true labels.

    Per-instance sample counts may differ; ``ids`` keeps source identifiers
    for report traceability when the input format provides them.
    """

    instances: tuple[PredictionSet, ...]
    labels: tuple[int, ...] | None = None
    ids: tuple[str, ...] | None = None

    def __post_init__(self):
        instances = tuple(self.instances)
        object.__setattr__(self, "instances", instances)
        if not instances:
            raise EmptyInput("batch contains no instances")
        c = instances[0].n_classes
        for i, inst in enumerate(instances):
            if inst.n_classes != c:
                raise DimensionMismatch(
                    f"instance {i} has {inst.n_classes} classes, expected {c}"
                )
        if self.labels is not None:
            labels = tuple(int(y) for y in self.labels)
            object.__setattr__(self, "labels", labels)
            if len(labels) != len(instances):
                raise LengthMismatch(
                    f"{len(labels)} labels for {len(instances)} instances"
                )
            for i, y in enumerate(labels):
                if not 0 <= y < c:
                    raise LabelOutOfRange(f"label {y} of instance {i} outside [0, {c})")
        if self.ids is not None:
            ids = tuple(str(s) for s in self.ids)
            object.__setattr__(self, "ids", ids)
            if len(ids) != len(instances):
                raise LengthMismatch(f"{len(ids)} ids for {len(instances)} instances")

    @property
    def n_instances(self) -> int:
        return len(self.instances)

    @property
    def n_classes(self) -> int:
        return self.instances[0].n_classes


@dataclass(frozen=True, eq=False)
class MassAssignment:
    """Sparse subset masses over {0, ..., C-1}; masses sum to 1, singletons >= 0."""

    n_classes: int
    masses: Mapping[frozenset, float]

    def __post_init__(self):
        fixed = {}
        for subset, mass in dict(self.masses).items():
            key = frozenset(int(k) for k in subset)
            for k in key:
                if not 0 <= k < self.n_classes:
                    raise IndexOutOfRange(f"class {k} outside [0, {self.n_classes})")
            fixed[key] = float(mass)
        object.__setattr__(self, "masses", MappingProxyType(fixed))
        total = math.fsum(fixed.values())
        if abs(total - 1.0) > DEFAULT_TOLERANCE:
            raise SumOutOfTolerance(f"masses sum to {total!r}")
        for key, mass in fixed.items():
            if len(key) == 1 and mass < -DEFAULT_TOLERANCE:
                raise NegativeEntry(f"singleton mass of {set(key)} is {mass!r}")

    def mass(self, subset: Iterable[int]) -> float:
        return self.masses.get(frozenset(int(k) for k in subset), 0.0)

    def __len__(self) -> int:
        return len(self.masses)
