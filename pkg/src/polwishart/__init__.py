"""Stochastic distances and hypothesis tests for scaled complex Wishart data."""

from .distances import ALL_MEASURES, DistanceMeasure, distance, log_power_integral
from .errors import (
    ChiSquareDiverges,
    DimensionMismatch,
    DomainError,
    EmptySample,
    InsufficientData,
    NoRootInBracket,
    NotPositiveDefinite,
    NumericalFailure,
    ParseError,
    QuadratureFailure,
    ValidationError,
    WishartError,
)
from .estimation import MLFit, cramer_rao, estimate_looks, estimate_sigma, fisher_info, fit
from .experiments import SizeExperimentConfig, empirical_size, forest_config, robustness_study
from .hypothesis import TestOutcome, run_test, test_statistic
from .wishart import FOREST_B, ContaminationSpec, WishartParams, log_density, sample, sample_contaminated

__version__ = "0.1.0"
