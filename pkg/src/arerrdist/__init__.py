"""Residual-based kernel estimation of the innovation distribution of an AR(p)
series, with smooth simultaneous confidence bands from the Kolmogorov law."""

from .arprocess import ArModel, Series, check_causal, ma_coefficients, simulate
from .exceptions import DegenerateDataError, NonCausalError
from .kcdf import (
    QUARTIC,
    Kernel,
    SmoothCdf,
    StepCdf,
    bandwidth_rule,
    quantile,
    quartic_G,
    smooth_cdf,
    step_cdf,
)
from .kolmogorov import Band, build_band, covers, kolmogorov_cdf, kolmogorov_quantile
from .metrics import ise, ise_dF, sup_distance
from .rng_dist import (
    STANDARD_LAPLACE,
    STANDARD_NORMAL,
    ErrorLaw,
    RngState,
    reference_cdf,
    sample_errors,
)
from .yulewalker import autocov, fit, residuals

__version__ = "0.1.0"
