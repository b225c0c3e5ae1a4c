import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vm_landau import kernels as ker
from vm_landau.errors import DomainError

U = np.linspace(-0.999, 0.999, 201)


@pytest.mark.parametrize("name", ["maxw", "plaw"])
def test_quadrature_matches_closed_forms(request, name):
    eq = request.getfixturevalue(name)
    assert np.max(np.abs(ker.kappa_quad(eq, U) / eq.kappa_closed(U) - 1)) <= 1e-8
    assert np.max(np.abs(ker.q_quad(eq, U) / eq.q_closed(U) - 1)) <= 1e-8


def test_kappa_value_from_velocity_integral(maxw):
    # 30-digit mpmath value of 2 pi int_a^inf phi'(s) s^2 ds at u = 0.5
    assert ker.kappa(maxw, 0.5) == pytest.approx(-1.12565783215333251649877357308, rel=1e-13)


def test_domain_errors(maxw):
    for u in (1.0, -1.0, 1.5, np.nan):
        with pytest.raises(DomainError):
            ker.kappa(maxw, u)
        with pytest.raises(DomainError):
            ker.q_kernel(maxw, u)


@settings(max_examples=40, deadline=None)
@given(u=st.floats(-0.99, 0.99))
def test_kernels_even_and_nonpositive(maxw, plaw, u):
    for eq in (maxw, plaw):
        assert ker.kappa(eq, u) == pytest.approx(ker.kappa(eq, -u), rel=1e-14)
        assert ker.kappa(eq, u) < 0 and ker.q_kernel(eq, u) < 0


def test_memory_kernel_initial_behaviour(maxw):
    c = maxw.constants
    h = 1e-4
    for k in (0.3, 2.0):
        assert ker.memory_K(maxw, k, 0.0) == 0.0
        assert ker.memory_N(maxw, k, 0.0) == 0.0
        # K'(0) = tau0^2
        assert ker.memory_K(maxw, k, h) / h == pytest.approx(c.tau0_sq, rel=1e-6)
    assert np.allclose(ker.memory_K(maxw, 0.0, np.array([0.0, 1.0, 2.0])), c.tau0_sq * np.array([0, 1, 2]))


def test_filon_and_gauss_agree_at_switch(maxw):
    tab = maxw.table
    om = np.array([20.0, 45.0, 49.9])
    gl = ker._sin_transform(tab, tab.nodes * tab.kappa_vals, lambda u: u * tab.kappa(u), om)
    fil = np.array([ker.quad.filon_exp(lambda u: u * tab.kappa(u), w).imag[0] for w in om])
    assert np.max(np.abs(gl - fil)) <= 1e-12


@pytest.mark.parametrize("lam", [0.3 + 0.2j, 1.0 - 0.5j, 0.5 + 2.0j])
@pytest.mark.parametrize("which", ["K", "N"])
def test_laplace_transform_against_time_quadrature(maxw, lam, which):
    k = 0.7
    closed = ker.laplace_K(maxw, k, lam) if which == "K" else ker.laplace_N(maxw, k, lam)
    direct = ker.laplace_time_quadrature(maxw, k, lam, which)
    assert abs(closed - direct) <= 1e-8 * max(1.0, abs(closed))


def test_axis_forms_are_limits_of_interior(maxw):
    k = 0.8
    for tau in (0.3, 1.4):  # inner and outer axis
        axis = ker.laplace_K(maxw, k, 1j * tau)
        near = ker.laplace_K(maxw, k, 1e-7 + 1j * tau)
        assert abs(axis - near) <= 1e-5
        axis = ker.laplace_N(maxw, k, 1j * tau)
        near = ker.laplace_N(maxw, k, 1e-7 + 1j * tau)
        assert abs(axis - near) <= 1e-5


def test_classify(maxw):
    assert ker.classify(1 + 1j, 1.0) == "interior"
    assert ker.classify(2j, 1.0) == "axis_outer"
    assert ker.classify(0.5j, 1.0) == "axis_inner"
    assert ker.classify(1j, 1.0) == "branch_point"
    with pytest.raises(DomainError):
        ker.classify(-0.1 + 1j, 1.0)


def test_continuation_matches_kappa_on_interval(maxw, plaw):
    for eq in (maxw, plaw):
        assert np.allclose(ker.kappa_analytic(eq, U[::10] + 0j).real, eq.kappa_closed(U[::10]), rtol=1e-13)
