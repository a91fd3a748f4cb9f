"""Shimorin-type kernels, their Bergman-kernel characterization and the radial
weights behind them."""

from __future__ import annotations

from .berg_duran import (
    CMReport,
    DiscreteFit,
    NotBergmanKernel,
    complete_monotonicity_report,
    fit_discrete_measure,
    omega_moments_from_nu,
    reciprocal_partial_sums,
)
from .bernstein import BernsteinFunction, bernstein_eval, kernel_coefficients
from .charfit import (
    Certificate,
    FitProblem,
    FitResult,
    FitVerdict,
    certify,
    default_grid,
    fit_h,
    precheck,
)
from .kernels import (
    DiskPoint,
    KernelSeries,
    MatchResult,
    NeedMoreTerms,
    eval_integral,
    eval_series,
    kernel_match,
    weight_kernel_coefficients,
)
from .measure import MeasureOnUnitInterval, PRWVerdict, moment, moments, prw_classify
from .quadrature import QuadratureRule
from .sequences import MomentSequence, Provenance
from .weights import (
    CallableWeight,
    ConstantWeight,
    HProfile,
    HWeight,
    PowerWeight,
    RadialWeight,
    TabulatedWeight,
    dhat_moment_check,
    dhat_tail_check,
    growth_check,
    h_to_weight,
    laplace_moment,
    log_convexity_check,
    log_subharmonic_check,
    rkhs_check,
    weight_from_dict,
    weight_moment,
    weight_moments,
    weight_to_h,
)

__version__ = "0.1.0"
