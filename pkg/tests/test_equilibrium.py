import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vm_landau import equilibrium as eqm
from vm_landau.errors import UnsupportedFeatureError, ValidationError

from conftest import MAXWELLIAN_N1, POWERLAW_M4_N1


def test_powerlaw_normalization_matches_closed_form(plaw):
    assert plaw.coef == pytest.approx(8 / np.pi ** 2, rel=1e-13)
    assert plaw.coef == pytest.approx(POWERLAW_M4_N1["c0"], rel=1e-13)


@pytest.mark.parametrize("builder", [eqm.maxwellian, lambda n0: eqm.powerlaw(4.0, n0)])
@pytest.mark.parametrize("n0", [0.5, 1.0, 2.0])
def test_mass_normalization(builder, n0):
    eq = builder(n0)
    assert eqm.radial_moment(eq, lambda r: 1.0) == pytest.approx(n0, rel=1e-10)


@pytest.mark.parametrize("name,ref", [("maxw", MAXWELLIAN_N1), ("plaw", POWERLAW_M4_N1)])
def test_constants_against_high_precision(request, name, ref):
    c = request.getfixturevalue(name).constants
    for key in ("tau0_sq", "tau1_sq", "kappa0_sq", "q0_sq"):
        assert getattr(c, key) == pytest.approx(ref[key], rel=1e-10), key


def test_tau0_three_routes(maxw, plaw):
    for eq in (maxw, plaw):
        r = eqm.tau0_sq_routes(eq)
        assert (max(r) - min(r)) / r[0] <= 1e-8
        assert eqm.tau0_sq(eq) == pytest.approx(r[0])


@settings(max_examples=15, deadline=None)
@given(n0=st.floats(0.1, 10.0))
def test_constants_scale_linearly_with_density(n0):
    eq = eqm.maxwellian(n0)
    c = eq.constants
    assert c.tau0_sq == pytest.approx(n0 * MAXWELLIAN_N1["tau0_sq"], rel=1e-9)
    assert c.kappa0_sq == pytest.approx(n0 * MAXWELLIAN_N1["kappa0_sq"], rel=1e-9)


@settings(max_examples=10, deadline=None)
@given(M=st.floats(3.2, 12.0))
def test_powerlaw_constants_positive_and_ordered(M):
    c = eqm.powerlaw(M).constants
    assert c.tau0_sq > 0 and c.tau1_sq > 0 and c.kappa0_sq > 0 and c.q0_sq > 0
    # u^4 <= u^2 <= u^2/(1-u^2) with kappa <= 0
    assert c.tau1_sq < c.tau0_sq < c.kappa0_sq


@pytest.mark.parametrize("M", [2.0, 3.0, -1.0, None])
def test_powerlaw_rejects_small_M(M):
    with pytest.raises(ValidationError, match="M > 3"):
        eqm.EquilibriumSpec("powerlaw", 1.0, M)


def test_validation_messages():
    with pytest.raises(ValidationError, match="n0 > 0"):
        eqm.EquilibriumSpec("maxwellian", -1.0)
    with pytest.raises(ValidationError, match="unknown equilibrium kind"):
        eqm.EquilibriumSpec("kappa")
    with pytest.raises(ValidationError, match="phi >= 0"):
        eqm.EquilibriumSpec("tabulated", 1.0, table=([1, 2, 3, 4], [1, -1, 0, 0]))
    with pytest.raises(ValidationError, match="start at s=1"):
        eqm.EquilibriumSpec("tabulated", 1.0, table=([1.5, 2, 3, 4], [1, 1, 0, 0]))


def test_digest_is_stable():
    a = eqm.EquilibriumSpec("powerlaw", 1.0, 4.0)
    b = eqm.EquilibriumSpec("powerlaw", 1.0, 4.0)
    assert a.digest() == b.digest() and len(a.digest()) == 16
    assert a.digest() != eqm.EquilibriumSpec("powerlaw", 2.0, 4.0).digest()


def _sampled_maxwellian(n=4000, s_max=12.0):
    s = np.linspace(1.0, s_max, n)
    return tuple(s), tuple(np.exp(-0.5 * s * s))


def test_tabulated_reproduces_maxwellian():
    eq = eqm.build_equilibrium(eqm.EquilibriumSpec("tabulated", 1.0, table=_sampled_maxwellian()))
    c = eq.constants
    assert not eq.has_analytic_kernels
    assert c.tau0_sq == pytest.approx(MAXWELLIAN_N1["tau0_sq"], rel=1e-6)
    assert c.kappa0_sq == pytest.approx(MAXWELLIAN_N1["kappa0_sq"], rel=1e-5)
    with pytest.raises(UnsupportedFeatureError):
        eqm.require_analytic(eq, "continuation")


def test_tabulated_nonmonotone_warns():
    s = np.linspace(1.0, 10.0, 200)
    p = np.exp(-0.5 * s * s) * (1 + 0.5 * np.sin(3 * s)) ** 2
    with pytest.warns(RuntimeWarning, match="not monotone"):
        eq = eqm.build_equilibrium(eqm.EquilibriumSpec("tabulated", 1.0, table=(tuple(s), tuple(p))))
    assert not eq.monotone
