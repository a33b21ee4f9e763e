"""Score tests of the proportional hazards assumption for chosen covariates."""

from .cox import CoxFit, StepFunction, fit
from .exceptions import (
    ConvergenceError,
    DegenerateVarianceError,
    NumericalError,
    PHScoreError,
    SeparationError,
    SingularMatrixError,
    SurvivalDataError,
)
from .phtest import PhTestReport, per_covariate_report, test
from .power import PowerResult, analytic_power, mc_power, noncentrality, plugin_limits
from .report import read_csv_sample, render_power, render_tests, write_csv_sample
from .simulate import (
    AltModelSpec,
    Bernoulli,
    Exponential,
    ExponentialCensoring,
    NoCensoring,
    Normal,
    UniformCensoring,
    Weibull,
    cum_hazard_alt,
    g_factor,
    hazard_ratio_curve,
    simulate,
)
from .survival import SurvivalSample, build_sample

__version__ = "0.1.0"

__all__ = [
    "CoxFit",
    "StepFunction",
    "fit",
    "PhTestReport",
    "per_covariate_report",
    "test",
    "SurvivalSample",
    "build_sample",
    "read_csv_sample",
    "write_csv_sample",
    "render_tests",
    "render_power",
    "AltModelSpec",
    "Exponential",
    "Weibull",
    "Bernoulli",
    "Normal",
    "NoCensoring",
    "UniformCensoring",
    "ExponentialCensoring",
    "g_factor",
    "cum_hazard_alt",
    "hazard_ratio_curve",
    "simulate",
    "PowerResult",
    "plugin_limits",
    "noncentrality",
    "analytic_power",
    "mc_power",
    "PHScoreError",
    "SurvivalDataError",
    "NumericalError",
    "SeparationError",
    "ConvergenceError",
    "SingularMatrixError",
    "DegenerateVarianceError",
]
