import numpy as np
import pytest

from vm_landau import dispersion as dsp
from vm_landau import green as grn
from vm_landau.errors import DomainError, ValidationError


def _grid(dt, tmax):
    return grn.TimeGrid(dt, int(round(tmax / dt)))


def test_harmonic_limit(maxw):
    k = 0.7
    g = _grid(1e-3, 20.0)
    h = grn.greens_H(maxw, k, g, memory=False)
    w = np.sqrt(k * k + maxw.constants.tau0_sq)
    assert np.max(np.abs(h.values - np.sin(w * g.t) / w)) <= 1e-6
    assert h.values[0] == 0.0 and h.derivative[0] == 1.0


def test_resolution_rule_enforced(maxw):
    with pytest.raises(ValidationError, match="resolution rule"):
        grn.resolvent_G(maxw, 0.5, grn.TimeGrid(0.5, 10))
    with pytest.raises(DomainError):
        grn.greens_H(maxw, 0.0, grn.TimeGrid(1e-3, 10))


def test_traces_are_real(maxw):
    g = _grid(5e-3, 10.0)
    for tr in (grn.resolvent_G(maxw, 0.4, g), grn.greens_H(maxw, 0.4, g)):
        assert np.max(np.abs(np.imag(tr.values))) <= 1e-10
        assert np.max(np.abs(tr.osc_part.imag)) <= 1e-10


@pytest.mark.parametrize("k", [0.3, 1.0])
def test_bromwich_cross_check(maxw, k):
    g = _grid(1e-3, 10.0)
    G = grn.resolvent_G(maxw, k, g, with_residues=False).values
    H = grn.greens_H(maxw, k, g, with_residues=False).values
    for t in (1.0, 5.0, 10.0):
        i = int(round(t / g.dt))
        assert abs(G[i] - grn.bromwich_invert(maxw, "G", k, t)) <= 1e-4
        assert abs(H[i] - grn.bromwich_invert(maxw, "H", k, t)) <= 1e-4


def test_bromwich_properties(maxw):
    assert abs(grn.bromwich_invert(maxw, "H", 1.0, 0.0)) <= 1e-5
    for which in ("G", "H"):
        a = grn.bromwich_invert(maxw, which, 1.0, 3.0, gamma0=0.1)
        b = grn.bromwich_invert(maxw, which, 1.0, 3.0, gamma0=0.3)
        assert abs(a - b) <= 1e-5
    with pytest.raises(ValidationError):
        grn.bromwich_invert(maxw, "H", 1.0, 1.0, gamma0=2.0)
    with pytest.raises(ValidationError):
        grn.bromwich_invert(maxw, "H", 1.0, 1.0, T_trunc=5.0)


def test_residue_a_limits_and_routes(maxw):
    c = maxw.constants
    a, am = grn.residue_a(maxw, 1e-3)
    assert abs(a - 0.5j * c.tau0) <= 1e-4
    assert am == np.conj(a)
    assert abs(grn.residue_a(maxw, 0.3)[0] - grn.residue_a(maxw, 0.3, route="fd")[0]) <= 1e-8
    # damped branch: residue from the continued function, both routes
    k = c.kappa0 * 1.05
    assert abs(grn.residue_a(maxw, k)[0] - grn.residue_a(maxw, k, route="fd")[0]) <= 1e-6
    assert grn.residue_a(maxw, c.kappa0 + 1.5 * dsp.default_delta(maxw)) == ()


def test_residue_b_routes_and_envelope(maxw):
    for k in (0.05, 0.5, 2.0, 15.0):
        b, bm = grn.residue_b(maxw, k)
        assert bm == np.conj(b)
        assert abs(b - grn.residue_b(maxw, k, route="fd")[0]) <= 1e-7
        assert 0.2 <= abs(b) * np.sqrt(1 + k * k) <= 5


def test_decomposition_properties(maxw):
    c = maxw.constants
    g = _grid(5e-3, 30.0)
    beyond = grn.resolvent_G(maxw, c.kappa0 + 1.5 * dsp.default_delta(maxw), g)
    assert np.array_equal(beyond.regular_part, beyond.values)
    h = grn.greens_H(maxw, 0.8, g)
    mod = np.abs(h.osc_part)
    assert np.max(mod) <= 2 * abs(h.residues[0]) + 1e-12
    damped = grn.resolvent_G(maxw, c.kappa0 * 1.08, g)
    lam = damped.roots[0]
    env = np.abs(damped.residues[0] * np.exp(lam * g.t))
    assert lam.real < 0 and env[-1] < env[0]


def test_spectral_regular_part_matches_time_stepping(maxw):
    g = _grid(1e-3, 20.0)
    tr = grn.resolvent_G(maxw, 0.5, g)
    th = grn.greens_H(maxw, 0.5, g)
    for t in (2.0, 10.0, 20.0):
        i = int(round(t / g.dt))
        assert abs(grn.regular_part_spectral(maxw, "G", 0.5, t) - tr.regular_part[i].real) <= 1e-6
        assert abs(grn.regular_part_spectral(maxw, "H", 0.5, t) - th.regular_part[i].real) <= 1e-6


def test_fft_peaks(maxw):
    from vm_landau.solver import spectral_peak
    g = _grid(0.02, 400.0)
    for k in (0.3, 0.8):
        w, b = spectral_peak(grn.resolvent_G(maxw, k, g, with_residues=False).values, g.dt)
        assert abs(w - dsp.tau_star(maxw, k)) <= b
        w, b = spectral_peak(grn.greens_H(maxw, k, g, with_residues=False).values, g.dt)
        assert abs(w - dsp.nu_star(maxw, k)) <= b


def test_fit_decay_synthetic():
    t = np.linspace(0, 400, 4001)
    k = 0.5
    out = grn.fit_decay((1 + k * t) ** -3.0, t, k, "kt")
    assert out["slope"] == pytest.approx(-3.0, abs=0.05) and not out["partial"]
    out = grn.fit_decay((1 + k ** 3 * t) ** -2.0, t, k, "k3t", window=(50, 400))
    assert out["slope"] == pytest.approx(-2.0, abs=0.05)
    noisy = np.where(t < 200, (1 + k * t) ** -3.0, 0.0)
    assert grn.fit_decay(noisy, t, k, "kt", envelope=False)["partial"]
    with pytest.raises(ValidationError):
        grn.fit_decay(noisy, t, k, "kt", window=(300, 900))


def test_order_two_residuals(maxw):
    res_g, res_h = [], []
    for dt in (2e-3, 1e-3):
        g = _grid(dt, 4.0)
        res_g.append(grn.volterra_residual(grn.resolvent_G(maxw, 0.6, g, with_residues=False)))
        res_h.append(grn.memory_ode_residual(grn.greens_H(maxw, 0.6, g, with_residues=False)))
    assert 3.2 <= res_g[0] / res_g[1] <= 4.8
    assert 3.2 <= res_h[0] / res_h[1] <= 4.8
    assert res_g[1] <= 1e-6
