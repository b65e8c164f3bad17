import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from todapolymer.core_paths import RngStream
from todapolymer.whittaker import (
    ContourError,
    GibbsPatternLaw,
    PoleError,
    UnsupportedSize,
    bump_stade_check,
    conditional_mgf,
    critical_point,
    dh_mgf,
    energy,
    entrance_first_coordinate_cdf,
    entrance_mass,
    gamma_complex,
    gig_density,
    gt_volume,
    hartman_watson_laplace,
    hartman_watson_theta,
    log_gamma_complex,
    log_macdonald_k,
    log_whittaker_psi,
    macdonald_k,
    macdonald_k_imag_orders,
    modified_bessel_i,
    moment_transform,
    sample_sigma,
    sklyanin_density,
    theta_density,
    vandermonde_h,
    verify_kernel_intertwining,
    verify_operator_intertwinings,
    whittaker_psi,
)


# ---------------------------------------------------------------------------
# special functions
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("z", [0.3 + 0.0j, 2.5 + 4j, -3.7 + 0.2j, 0.5 - 30j, 40 + 1j])
def test_log_gamma_against_scipy(z):
    assert abs(log_gamma_complex(z) - special.loggamma(z)) < 1e-12 * max(1, abs(special.loggamma(z)))


def test_gamma_poles():
    with pytest.raises(PoleError):
        gamma_complex(-2.0 + 0j)


@pytest.mark.parametrize("nu", [0.0, 0.5, 1.3, 4.0])
@pytest.mark.parametrize("z", [1e-3, 0.7, 5.0, 40.0])
def test_macdonald_real_order_against_scipy(nu, z):
    assert abs(log_macdonald_k(nu, z) - math.log(special.kv(nu, z))) < 1e-11


@pytest.mark.parametrize("nu,z", [(0.3 + 2j, 0.8), (1j * 5, 3.0), (-0.7 + 1.5j, 12.0)])
def test_macdonald_complex_order_against_mpmath(nu, z):
    ref = complex(mpmath.besselk(nu, z))
    assert abs(macdonald_k(nu, z) - ref) < 1e-11 * abs(ref)


def test_imag_order_batch():
    w = np.array([0.0, 1.0, 4.0])
    got = macdonald_k_imag_orders(w, 2.0)
    ref = [float(mpmath.besselk(1j * v, 2.0).real) for v in w]
    assert np.allclose(got, ref, rtol=1e-10, atol=1e-300)


def test_modified_bessel_i():
    assert abs(modified_bessel_i(1.0, 2.0) - special.iv(1.0, 2.0)) < 1e-12


# ---------------------------------------------------------------------------
# psi
# ---------------------------------------------------------------------------


def psi_n2_quad(x, lam):
    f = lambda a: math.exp(lam[0] * a + lam[1] * (x[0] + x[1] - a)  # noqa: E731
                           - math.exp(a - x[0]) - math.exp(x[1] - a))
    return integrate.quad(f, -40, 40, epsabs=0, epsrel=1e-12, limit=200)[0]


@pytest.mark.parametrize("x,lam", [((1.0, 0.0), (0.2, -0.1)), ((0.3, -1.2), (0.0, 0.0)),
                                   ((-0.5, 0.8), (1.1, 0.4))])
def test_psi_n2_three_methods_and_quadrature(x, lam):
    ref = psi_n2_quad(x, lam)
    for method in ("closed-form", "givental", "mellin-barnes"):
        v = whittaker_psi(x, np.array(lam, dtype=complex), method)
        assert abs(v - ref) < 1e-9 * ref, method


def test_psi_n2_matches_bessel_formula():
    x, lam = np.array([0.4, -0.6]), np.array([0.5, -0.2])
    ref = 2 * math.exp(lam.sum() * x.sum() / 2) * special.kv(lam[0] - lam[1], 2 * math.exp((x[1] - x[0]) / 2))
    assert abs(whittaker_psi(x, lam) - ref) < 1e-12 * ref


def test_psi_n1():
    assert abs(whittaker_psi([0.7], [0.3 + 1j]) - np.exp((0.3 + 1j) * 0.7)) < 1e-14


def test_psi_n3_givental_vs_mellin_barnes():
    x = np.array([0.5, 0.0, -0.4])
    lam = np.array([0.3 + 0.5j, -0.1, 0.2 - 0.5j])
    a = log_whittaker_psi(x, lam, "givental").log_value
    b = log_whittaker_psi(x, lam, "mellin-barnes").log_value
    assert abs(np.exp(a - b) - 1) < 1e-6


def test_psi_n3_against_scipy_tplquad():
    x = np.array([0.4, 0.1, -0.3])
    lam = np.array([0.2, 0.0, -0.1])

    def f(c, b, a):
        T = np.array([a, b, c, *x])
        return math.exp(energy(T, lam))

    ref = integrate.tplquad(f, -12, 12, -12, 12, -12, 12, epsrel=1e-8)[0]
    got = whittaker_psi(x, lam, "givental").real
    assert abs(got - ref) < 1e-6 * ref


@settings(max_examples=15, deadline=None)
@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1))
def test_psi_n2_symmetric_in_lambda(x1, x2, l1, l2):
    a = whittaker_psi([x1, x2], [l1, l2], "givental")
    b = whittaker_psi([x1, x2], [l2, l1], "givental")
    assert abs(a - b) < 1e-8 * abs(a)


def test_psi_size_and_method_errors():
    with pytest.raises(UnsupportedSize):
        log_whittaker_psi(np.zeros(4), np.zeros(4))
    with pytest.raises(ValueError):
        log_whittaker_psi([0.0, 1.0], [0.0], "givental")
    with pytest.raises(ValueError):
        log_whittaker_psi([0.0, 1.0], [0.0, 0.0], "nope")


def test_mellin_barnes_contour_placement():
    from todapolymer.whittaker import ContourSpec

    with pytest.raises(ContourError):
        log_whittaker_psi([0.0, 1.0], [0.1, 0.2], "mellin-barnes", ContourSpec((0.5,)))


# ---------------------------------------------------------------------------
# Gibbs law and critical point
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("x", [(1.0, 0.2), (0.3, 0.3, -0.6), (1.5, 0.6, -0.2, -1.1)])
def test_critical_point(x):
    T, info = critical_point(np.array(x), return_info=True)
    assert info["grad_norm"] <= 1e-10
    assert info["row_mean_error"] <= 1e-10
    assert np.allclose(T.bottom, x)


def test_critical_point_n2_closed_form():
    T = critical_point([1.3, -0.4])
    assert abs(T.get(1, 1) - 0.45) < 1e-12


def test_sigma_n2_mean_against_quadrature():
    x, nu = np.array([0.5, -0.3]), np.array([0.4, 0.0])
    law = GibbsPatternLaw(x, nu)
    s = sample_sigma(law, RngStream(3), 20000)
    f = lambda a: math.exp(energy(np.array([a, *x]), nu))  # noqa: E731
    z = integrate.quad(f, -30, 30)[0]
    m = integrate.quad(lambda a: a * f(a), -30, 30)[0] / z
    sd = math.sqrt(integrate.quad(lambda a: (a - m) ** 2 * f(a), -30, 30)[0] / z)
    assert abs(s.values[:, 0].mean() - m) < 4 * sd / math.sqrt(20000)


def test_sigma_n3_diagnostics():
    law = GibbsPatternLaw(np.array([0.5, 0.0, -0.5]), np.zeros(3))
    s = sample_sigma(law, RngStream(1), 2000)
    assert s.values.shape == (2000, 6)
    assert s.diagnostics["rhat"] < 1.05
    assert 0.15 < s.diagnostics["acceptance"] < 0.5


def test_conditional_mgf_trivial_shift():
    assert conditional_mgf([0.1, -0.2], [0.3, 0.0], [0.0, 0.0]) == 1.0


# ---------------------------------------------------------------------------
# volumes, Duistermaat-Heckman, intertwinings
# ---------------------------------------------------------------------------


def test_gt_volume_formula():
    x = np.array([1.3, 0.2, -0.9])
    assert abs(gt_volume(x) - vandermonde_h(x) / 2) < 1e-14
    assert abs(vandermonde_h(x) - 1.1 * 2.2 * 1.1) < 1e-14


def test_dh_mgf_is_normalised():
    x = np.array([1.3, 0.2, -0.9])
    assert abs(dh_mgf(x, np.zeros(3)) - 1.0) < 1e-12


def test_dh_mgf_n2_uniform_law():
    # N=2: the middle entry is uniform on [x2, x1]
    x, lam = np.array([0.9, -0.4]), np.array([0.7, -0.3])
    a = lam[0] - lam[1]
    ref = math.exp(lam[1] * x.sum()) * (math.exp(a * x[0]) - math.exp(a * x[1])) / (a * (x[0] - x[1]))
    assert abs(dh_mgf(x, lam) - ref) < 1e-12 * ref


def test_dh_mgf_permutation_symmetric():
    x = np.array([1.0, 0.1, -0.5])
    lam = np.array([0.3, -0.2, 0.7])
    assert abs(dh_mgf(x, lam) - dh_mgf(x, lam[[2, 0, 1]])) < 1e-12 * dh_mgf(x, lam)


def test_kernel_intertwining():
    out = verify_kernel_intertwining([0.3, -0.2], [0.1], 0.4)
    assert out["residual"] <= 1e-6


def test_operator_intertwinings_theta0():
    out = verify_operator_intertwinings(0.0)
    assert max(out["U_residual"], out["V_residual"]) <= 1e-4


def test_operator_intertwining_with_theta():
    out = verify_operator_intertwinings(0.7)
    assert max(out["U_residual"], out["V_residual"]) <= 1e-4
    assert out["U_printed_residual"] > 1e-2


# ---------------------------------------------------------------------------
# spectral side
# ---------------------------------------------------------------------------


def test_sklyanin_n2_closed_form():
    u = 0.8
    got = sklyanin_density(np.array([1j * u / 2, -1j * u / 2]))
    ref = u * math.sinh(math.pi * u) / math.pi / (8 * math.pi ** 2)
    assert abs(got - ref) < 1e-12 * ref
    assert sklyanin_density(np.array([0.5j, 0.5j])) == 0.0


def test_theta_n1_is_heat_kernel():
    for x in (-1.0, 0.3, 2.0):
        assert abs(theta_density([x], 0.7) - math.exp(-x * x / 1.4) / math.sqrt(1.4 * math.pi)) < 1e-12


def test_entrance_mass_is_one():
    assert abs(entrance_mass(1.0) - 1.0) < 1e-3


def test_entrance_cdf_monotone():
    a = np.linspace(-4, 6, 50)
    c = entrance_first_coordinate_cdf(a)
    assert np.all(np.diff(c) >= -1e-12)
    assert c[0] < 1e-3 and c[-1] > 1 - 1e-3


@pytest.mark.parametrize("s", [0.5, 1.0, 2.0])
def test_moment_transform_n1_hermite(s):
    z, w = np.polynomial.hermite_e.hermegauss(160)
    ref = np.sum(w * np.exp(-s * np.exp(z))) / math.sqrt(2 * math.pi)
    assert abs(moment_transform(s, 1.0, 1) - ref) < 1e-10


def test_moment_transform_domain():
    with pytest.raises(ValueError):
        moment_transform(-1.0, 1.0, 1)


@pytest.mark.parametrize("lam,nu", [((0.6,), (0.5,)), ((0.7, 0.3), (0.6, 0.4)),
                                    ((0.8 + 0.2j, 0.5), (0.6, 0.5 - 0.2j))])
def test_bump_stade(lam, nu):
    out = bump_stade_check(np.array(lam, dtype=complex), np.array(nu, dtype=complex))
    assert out["residual"] <= (1e-10 if len(lam) == 1 else 1e-4)


def test_gig_density_normalised():
    val = integrate.quad(lambda u: float(gig_density(0.7, 0.4, u)), -30, 30)[0]
    assert abs(val - 1) < 1e-10


def hw_theta_yor(r, t):
    """Yor's real-integral form of the Hartman-Watson density."""
    f = lambda y: math.exp(-y * y / (2 * t) - r * math.cosh(y)) * math.sinh(y) * math.sin(math.pi * y / t)  # noqa: E731
    val = integrate.quad(f, 0, 40, limit=400, epsabs=0, epsrel=1e-11)[0]
    return r / math.sqrt(2 * math.pi ** 3 * t) * math.exp(math.pi ** 2 / (2 * t)) * val


@pytest.mark.parametrize("r,t", [(1.0, 1.0), (2.0, 3.0), (1.0, 0.6)])
def test_hartman_watson_theta_oracle(r, t):
    got = float(hartman_watson_theta(r, t)[0])
    ref = hw_theta_yor(r, t)
    assert abs(got - ref) < 1e-7 * max(abs(ref), 1e-3)


def test_hartman_watson_laplace_nu1():
    out = hartman_watson_laplace(1.0, 1.0)
    assert out["abs_error"] < 1e-3
