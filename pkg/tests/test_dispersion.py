import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vm_landau import dispersion as dsp
from vm_landau import kernels as ker
from vm_landau.errors import ConvergenceError, DomainError


def test_tau_star_endpoints(maxw, plaw):
    for eq in (maxw, plaw):
        c = eq.constants
        assert dsp.tau_star(eq, 0.0) == pytest.approx(c.tau0, abs=1e-12)
        assert dsp.tau_star(eq, c.kappa0) == pytest.approx(c.kappa0, abs=1e-10)
        with pytest.raises(DomainError):
            dsp.tau_star(eq, 1.01 * c.kappa0)


@settings(max_examples=40, deadline=None)
@given(f=st.floats(0.01, 0.99))
def test_tau_star_root_and_bounds(maxw, plaw, f):
    for eq in (maxw, plaw):
        c = eq.constants
        k = f * c.kappa0
        t = dsp.tau_star(eq, k)
        assert abs(dsp.D_eval(eq, 1j * t, k)) <= 1e-10
        assert c.tau0 < t < c.kappa0
        assert k < t < np.sqrt(c.tau0_sq + k * k)


def test_small_k_expansion(maxw):
    c = maxw.constants
    ks = np.geomspace(2e-3, 2e-2, 6)
    dev = [abs(dsp.tau_star(maxw, k) - c.tau0 - c.tau1_sq * k * k / (2 * c.tau0 ** 3)) for k in ks]
    assert np.polyfit(np.log(ks), np.log(dev), 1)[0] == pytest.approx(4.0, abs=0.2)


def test_two_routes_for_M_on_outer_axis(maxw):
    for k, tau in ((0.5, 0.9), (2.0, 2.3), (10.0, 10.1)):
        a = dsp.M_eval(maxw, 1j * tau, k, check=False)
        b = dsp.M_lambda_route(maxw, 1j * tau, k)
        assert abs(a - b) <= 1e-8 * max(1.0, abs(a))


@pytest.mark.parametrize("k", [0.5, 1.0, 3.0])
def test_seam_continuity(maxw, k):
    # the outer (|tau| > k) and inner (|tau| < k) forms meet at the branch point:
    # extrapolate each side linearly from tau = k +- eps, k +- 2 eps to tau = k
    eps = 1e-6
    for f in (lambda l: dsp.D_eval(maxw, l, k), lambda l: dsp.M_eval(maxw, l, k, check=False)):
        outer = 2 * f(1j * (k + eps)) - f(1j * (k + 2 * eps))
        inner = 2 * f(1j * (k - eps)) - f(1j * (k - 2 * eps))
        assert abs(outer - inner) <= 1e-5


def test_continuation_is_damped_and_continuous(maxw, plaw):
    for eq in (maxw, plaw):
        c = eq.constants
        d = dsp.default_delta(eq)
        ks = c.kappa0 + d * np.array([0.2, 0.5, 1.0])
        lam = dsp.lambda_elec_many(eq, ks)
        assert np.all(lam.real < 0)
        for k, l in zip(ks, lam):
            assert abs(dsp.D_ext(eq, l, k)) <= 1e-9
        gap = abs(dsp.lambda_elec(eq, c.kappa0 + 1e-7) - 1j * dsp.tau_star(eq, c.kappa0 - 1e-7))
        assert gap <= 1e-6
        with pytest.raises(DomainError):
            dsp.lambda_elec(eq, c.kappa0 + 2 * d)


def test_maxwellian_is_flatter_than_powerlaw(maxw, plaw):
    # near threshold the Gaussian damping rate is exponentially small
    r_m = dsp.lambda_elec(maxw, maxw.constants.kappa0 * 1.02).real
    r_p = dsp.lambda_elec(plaw, plaw.constants.kappa0 * 1.02).real
    assert r_m < 0 and r_p < 0
    assert abs(r_m) < 1e-6 * abs(r_p)


def test_extended_D_agrees_with_interior_D(maxw):
    # for Re lambda > 0 the continued function is the ordinary one
    for lam in (0.2 + 0.9j, 0.05 + 1.2j):
        assert abs(dsp.D_ext(maxw, lam, 1.05) - dsp.D_eval(maxw, lam, 1.05)) <= 1e-10


def test_dD_ext_routes(maxw):
    lam = dsp.lambda_elec(maxw, 1.08)
    a = dsp.dD_ext_dlambda(maxw, lam, 1.08, "exact")
    b = dsp.dD_ext_dlambda(maxw, lam, 1.08, "fd")
    assert abs(a - b) <= 1e-7 * abs(a)


@settings(max_examples=30, deadline=None)
@given(k=st.floats(0.0, 50.0))
def test_nu_star_properties(maxw, k):
    nu = dsp.nu_star(maxw, k)
    assert dsp.x_star_residual(maxw, k) <= 1e-12 * max(1.0, k * k)
    if k > 0:
        assert nu > k
    # psi increases from tau0^2 at y = 0 to q0^2 at y = 1 because q < 0
    c = maxw.constants
    assert c.tau0_sq + k * k - 1e-12 <= nu * nu <= c.q0_sq + k * k + 1e-12


def test_nu_star_zero_and_derivative(maxw):
    assert dsp.nu_star(maxw, 0.0) == pytest.approx(maxw.constants.tau0, abs=1e-10)
    h = 1e-5
    for k in (0.3, 2.0, 20.0):
        fd = (dsp.nu_star(maxw, k + h) - dsp.nu_star(maxw, k - h)) / (2 * h)
        assert dsp.nu_star_prime(maxw, k) == pytest.approx(fd, rel=1e-7)


def test_winding_numbers(maxw, plaw):
    for eq in (maxw, plaw):
        for which in ("D", "M"):
            assert dsp.stability_winding(eq, 0.5, (1e-3, 2.0, -3.0, 3.0), which) == 0


def test_winding_counts_synthetic_zero():
    f = lambda z: (z - (0.5 + 0.5j)) * (z + 3)
    assert dsp.winding_number(f, (0.1, 1.0, 0.0, 1.0)) == 1
    g = lambda z: (z - (0.5 + 0.5j)) ** 2
    assert dsp.winding_number(g, (0.1, 1.0, 0.0, 1.0)) == 2


def test_winding_refuses_zero_on_contour():
    with pytest.raises(ConvergenceError):
        dsp.winding_number(lambda z: z - 0.5, (0.5, 1.0, -1.0, 1.0))


def test_mode_curves_respects_thread_setting(maxw, monkeypatch):
    monkeypatch.setenv("VM_LANDAU_THREADS", "1")
    ks = np.linspace(0.0, 1.5, 16)
    one = dsp.mode_curves(maxw, ks)
    many = dsp.mode_curves(maxw, ks, threads=4)
    assert np.array_equal(one.nu_star, many.nu_star)
    assert np.all(np.diff(one.tau_star[np.isfinite(one.tau_star)]) > 0)
    beyond = ks > one.kappa0 + one.delta
    assert np.all(np.isnan(one.a_plus[beyond]))
