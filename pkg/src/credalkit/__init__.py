"""credalkit: interval-based uncertainty quantification for prediction ensembles.

Wraps a finite collection of per-instance probability predictions (Bayesian
sampling, deep ensembles, ...) into per-class probability intervals, derives
the induced credal set's entropy bounds and point prediction, and evaluates
OOD detection and calibration on top of those quantities.
"""

from ._version import __version__
from .core import (
    DEFAULT_TOLERANCE,
    INGEST_TOLERANCE,
    CredalError,
    DimensionMismatch,
    DimensionTooSmall,
    EmptyInput,
    ImproperIntervals,
    IndexOutOfRange,
    InputError,
    IntervalSystem,
    InvalidJ,
    LabeledBatch,
    LabelOutOfRange,
    LengthMismatch,
    MassAssignment,
    NegativeEntry,
    NoConvergence,
    NonFiniteEntry,
    NonFiniteScore,
    NumericalError,
    PredictionSet,
    ProbabilityVector,
    SumOutOfTolerance,
    TooManyClasses,
    UncertaintyTriple,
    validate_probability_vector,
)
from .entropy import (
    EntropySolution,
    average_prediction,
    baseline_decomposition,
    credal_decomposition,
    lower_entropy,
    shannon_entropy,
    upper_entropy,
)
from .intervals import (
    contains,
    extract_intervals,
    intersection_alpha,
    intersection_probability,
    is_proper,
    tighten,
)
from .metrics import (
    CalibrationReport,
    DetectionReport,
    accuracy,
    auprc,
    auroc,
    calibration_report,
    detection_report,
    ece,
    nll,
)
from .reduction import (
    ReducedIntervals,
    approximate_intervals,
    coarsen_distribution,
    suggested_reduction_size,
)
from .setfunctions import generalized_hartley, lower_probability, mobius_masses

__all__ = [
    "__version__",
    "DEFAULT_TOLERANCE",
    "INGEST_TOLERANCE",
    "CredalError",
    "InputError",
    "NumericalError",
    "NegativeEntry",
    "NonFiniteEntry",
    "DimensionTooSmall",
    "DimensionMismatch",
    "SumOutOfTolerance",
    "ImproperIntervals",
    "InvalidJ",
    "IndexOutOfRange",
    "TooManyClasses",
    "LengthMismatch",
    "LabelOutOfRange",
    "EmptyInput",
    "NonFiniteScore",
    "NoConvergence",
    "ProbabilityVector",
    "PredictionSet",
    "IntervalSystem",
    "UncertaintyTriple",
    "LabeledBatch",
    "MassAssignment",
    "validate_probability_vector",
    "extract_intervals",
    "is_proper",
    "contains",
    "tighten",
    "intersection_alpha",
    "intersection_probability",
    "EntropySolution",
    "shannon_entropy",
    "average_prediction",
    "baseline_decomposition",
    "upper_entropy",
    "lower_entropy",
    "credal_decomposition",
    "ReducedIntervals",
    "approximate_intervals",
    "coarsen_distribution",
    "suggested_reduction_size",
    "lower_probability",
    "mobius_masses",
    "generalized_hartley",
    "DetectionReport",
    "CalibrationReport",
    "auroc",
    "auprc",
    "ece",
    "nll",
    "accuracy",
    "detection_report",
    "calibration_report",
]
