"""Whittaker functions of the quantum Toda lattice and related special functions."""

from .checks import (
    asymptotic_checks,
    dh_alternating_ratio,
    dh_mgf,
    gt_volume,
    gt_volume_mc,
    laplace_profile,
    rho,
    vandermonde_h,
    verify_kernel_intertwining,
    verify_operator_intertwinings,
)
from .gibbs import GibbsPatternLaw, SigmaSample, conditional_mgf, critical_point, sample_sigma, split_rhat
from .psi import (
    ContourError,
    ContourSpec,
    PsiValue,
    SpectralParam,
    UnsupportedSize,
    energy,
    log_whittaker_psi,
    whittaker_psi,
)
from .special import (
    PoleError,
    gamma_complex,
    log_gamma_complex,
    log_k_derivative,
    log_macdonald_k,
    macdonald_k,
    macdonald_k_imag_orders,
    modified_bessel_i,
)
from .spectral import (
    bump_stade_check,
    entrance_density,
    entrance_first_coordinate_cdf,
    entrance_mass,
    gig_density,
    hartman_watson_laplace,
    hartman_watson_theta,
    moment_transform,
    sklyanin_density,
    theta_density,
    theta_profile_n2,
)
