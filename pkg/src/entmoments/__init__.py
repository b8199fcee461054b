"""Moments of Tsallis and von Neumann entanglement entropy of random pure states."""

from .kernel import Dims, QuadratureSpec, density_one_point, kernel_K, quad_I2, quad_induced_moment
from .moments import (
    EntropyOrder,
    MomentReport,
    NearUnitOrderError,
    block_A,
    convert_moment,
    ell,
    exact_moments,
    induced_I1,
    induced_I2,
    induced_L_mean,
    induced_L_second,
    max_entropy,
    moment_report,
    q1_limit_check,
    special_q2,
    special_small_m,
    tsallis_variance,
    vn_appendix_terms,
    vn_mean,
    vn_report,
    vn_variance,
    vn_variance_via_appendix,
)
from .montecarlo import McEstimate, Spectrum, run_mc
from .specfun import LogScaled, RationalScalar

__all__ = [
    "Dims",
    "EntropyOrder",
    "LogScaled",
    "McEstimate",
    "MomentReport",
    "NearUnitOrderError",
    "QuadratureSpec",
    "RationalScalar",
    "Spectrum",
    "block_A",
    "convert_moment",
    "density_one_point",
    "ell",
    "exact_moments",
    "induced_I1",
    "induced_I2",
    "induced_L_mean",
    "induced_L_second",
    "kernel_K",
    "max_entropy",
    "moment_report",
    "q1_limit_check",
    "quad_I2",
    "quad_induced_moment",
    "run_mc",
    "special_q2",
    "special_small_m",
    "tsallis_variance",
    "vn_appendix_terms",
    "vn_mean",
    "vn_report",
    "vn_variance",
    "vn_variance_via_appendix",
]
