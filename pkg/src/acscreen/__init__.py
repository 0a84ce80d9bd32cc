"""Distributed feature screening by aggregated U-statistic components."""
from .aggregation import (
    EstimateVector,
    acs_estimate,
    centralized_estimate,
    estimate,
    racs_estimate,
    sas_estimate,
)
from .data import Dataset, Partition, load_csv, partition, standardize
from .exceptions import (
    DataValidationError,
    DegenerateDenominator,
    ScreeningError,
    SegmentTooSmall,
)
from .kernels import ComponentKernel, ComponentTable, component_table, u_statistic_naive
from .measures import MeasureSpec, builtin_measure, register_measure
from .screening import (
    MetricsReport,
    ScreenResult,
    evaluate_repetitions,
    oracle_threshold,
    rmse,
    threshold_screen,
    top_k_screen,
)

__version__ = "0.1.0"
