"""Single Fourier-mode solutions of the linearized system.

The initial data enter through profiles on the reduced velocity u in (-1, 1):
h0 drives the charge density, h0_mag the transverse current (already carrying
its transverse weight). The free sources are

    S(t)  = int e^{-i k t u} h0(u) du,    Sj(t) = int e^{-i k t u} h0_mag(u) du

and the self-consistent mode solves

    rho + K*rho = S                          (rho = k^2 phi)
    A'' + (k^2 + tau0^2) A + N*A = Sj,       A(0) = A0, A'(0) = A1.

The kinetic oracle evolves the reduced distribution on Gauss-Legendre nodes
instead of using the memory kernels, so it shares no code path with the
Volterra solvers beyond the kernels kappa and q themselves.
"""
from dataclasses import dataclass, field
import warnings

import numpy as np
from scipy import integrate

from . import green as grn
from . import kernels as ker
from . import quadrature as quad
from .errors import ConvergenceError, DomainError, ValidationError

ORACLE_NODES = 512
ROUTE_TOL = 1e-5


@dataclass
class ModeInitialData:
    k: float
    h0: object
    h0_mag: object = None
    A0: complex = 0.0
    A1: complex = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.k) and self.k > 0):
            raise DomainError("mode wavenumber k must be positive")
        if self.h0_mag is None:
            self.h0_mag = lambda u: np.zeros_like(np.asarray(u, dtype=float))


@dataclass
class ModeSolution:
    grid: grn.TimeGrid
    S: np.ndarray | None = None
    Sj: np.ndarray | None = None
    rho: np.ndarray | None = None
    A: np.ndarray | None = None
    oracle_rho: np.ndarray | None = None
    oracle_A: np.ndarray | None = None
    discrepancy: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)


def profile(eq, name, width=0.3):
    """Named reduced profiles: 'kappa', 'q', or 'gauss' (smooth bump vanishing at |u| = 1)."""
    tab = eq.table
    if name == "kappa":
        return tab.kappa
    if name == "q":
        return tab.q
    if name == "gauss":
        return lambda u: np.exp(-0.5 * (np.asarray(u) / width) ** 2) * (1.0 - np.asarray(u) ** 2) ** 4
    raise ValidationError(f"unknown profile {name!r}; expected kappa, q or gauss")


# ---------------------------------------------------------------- free sources

def u_transform(h, omega, n=256):
    """int_{-1}^{1} e^{-i omega u} h(u) du for an array of omega."""
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    out = np.empty(omega.shape, dtype=complex)
    x, w = quad.gauss_legendre(n)
    hx = np.asarray(h(x), dtype=complex)
    low = np.abs(omega) <= ker.FILON_SWITCH
    il, ih = np.flatnonzero(low), np.flatnonzero(~low)
    for start in range(0, il.size, ker.CHUNK):
        sel = il[start:start + ker.CHUNK]
        out[sel] = np.exp(-1j * np.outer(omega[sel], x)) @ (w * hx)
    for start in range(0, ih.size, ker.CHUNK):
        sel = ih[start:start + ker.CHUNK]
        hc = lambda u: np.conj(np.asarray(h(u), dtype=complex))
        out[sel] = np.conj(quad.filon_exp(hc, omega[sel]))
    return out


def _source(h, k, t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("sources are defined for t >= 0")
    vals = u_transform(h, k * t.ravel())
    return vals.reshape(t.shape) if t.ndim else complex(vals[0])


def source_S(data, t):
    return _source(data.h0, data.k, t)


def source_Sj(data, t):
    return _source(data.h0_mag, data.k, t)


def source_fft(h, k, n=4096):
    """Trapezoid/FFT evaluation of S at t_m = pi m / k, m = 0..n/2; spectrally
    accurate for profiles vanishing to all orders at u = +-1."""
    u = -1.0 + 2.0 * np.arange(n) / n
    spec = np.fft.fft(np.asarray(h(u), dtype=complex)) * (2.0 / n)
    m = np.arange(n // 2 + 1)
    return np.pi * m / k, spec[m] * np.exp(1j * np.pi * m)


# ---------------------------------------------------------------- resolvent routes

def trapezoid_conv(a, b, dt):
    """Discrete trapezoid convolution (a*b)_n for a_0 = 0."""
    n = a.size
    out = np.zeros(n, dtype=np.result_type(a, b))
    for m in range(1, n):
        out[m] = dt * (np.dot(a[m:0:-1], b[:m]) - 0.5 * a[m] * b[0] + 0.5 * a[0] * b[m])
    return out


def _conv_ends(a, b, dt):
    """Trapezoid convolution with half weights at both ends (no zero assumption)."""
    n = a.size
    out = np.zeros(n, dtype=np.result_type(a, b))
    for m in range(1, n):
        out[m] = dt * (np.dot(a[m::-1], b[:m + 1]) - 0.5 * (a[m] * b[0] + a[0] * b[m]))
    return out


def solve_phi_mode(eq, data, grid, resolvent=None, check=True):
    """rho = S + R*S from the resolvent, checked against a direct Volterra solve."""
    k = data.k
    sol = ModeSolution(grid)
    sol.S = source_S(data, grid.t)
    trace = resolvent if resolvent is not None else grn.resolvent_G(eq, k, grid, with_residues=False)
    R = trace.values
    sol.rho = sol.S + trapezoid_conv(R, sol.S, grid.dt)
    direct = grn.solve_volterra(trace.meta["kernel"], sol.S, grid.dt)
    gap = float(np.max(np.abs(direct - sol.rho)))
    sol.discrepancy["rho_routes"] = gap
    if check and gap > ROUTE_TOL * max(1.0, float(np.max(np.abs(sol.rho)))):
        raise ConvergenceError(f"resolvent and direct Volterra routes differ by {gap:.2e}", gap)
    return sol


def solve_A_mode(eq, data, grid, green=None, check=True, memory=True):
    """A = H' A0 + H A1 + H*Sj, checked against direct stepping of the forced memory ODE."""
    k = data.k
    sol = ModeSolution(grid)
    sol.Sj = source_Sj(data, grid.t)
    trace = green if green is not None else grn.greens_H(eq, k, grid, memory=memory, with_residues=False)
    H, dH = trace.values, trace.derivative
    sol.A = dH * data.A0 + H * data.A1 + trapezoid_conv(H, sol.Sj, grid.dt)
    direct, _ = grn.solve_memory_oscillator(trace.meta["kernel"], trace.meta["omega2"], grid.dt,
                                            h0=complex(data.A0), v0=complex(data.A1), force=sol.Sj)
    gap = float(np.max(np.abs(direct - sol.A)))
    sol.discrepancy["A_routes"] = gap
    scale = max(1.0, float(np.max(np.abs(sol.A))))
    if check and gap > ROUTE_TOL * scale:
        raise ConvergenceError(f"Green-function and direct routes for A differ by {gap:.2e}", gap)
    return sol


# ---------------------------------------------------------------- kinetic oracle

def _phi_weights(x):
    """phi1(x) = int_0^1 e^{-x r} dr and p2(x) = int_0^1 e^{-x r} r dr, stable near 0."""
    x = np.asarray(x, dtype=complex)
    small = np.abs(x) < 0.5
    xs = np.where(small, x, 1.0)
    xl = np.where(small, 1.0, x)
    # power series for small |x|
    p1 = np.zeros_like(x)
    p2 = np.zeros_like(x)
    term = np.ones_like(x)
    fact = 1.0
    for m in range(25):
        if m:
            term = term * (-xs)
            fact *= m
        p1 = p1 + term / (fact * (m + 1))
        p2 = p2 + term / (fact * (m + 2))
    e = np.exp(-xl)
    p1 = np.where(small, p1, (1.0 - e) / xl)
    p2 = np.where(small, p2, (1.0 - (1.0 + xl) * e) / xl ** 2)
    return p1, p2


def recurrence_time(k, n_u=ORACLE_NODES):
    x, _ = quad.gauss_legendre(n_u)
    return 2.0 * np.pi / (k * float(np.max(np.diff(x))))


def _detect_recurrence(signal, t, t_rec):
    """First time the windowed envelope of |signal| exceeds 10x its running minimum."""
    mag = np.abs(signal)
    dt = t[1] - t[0]
    w = max(1, int(round(t_rec / 20 / dt)))
    n_win = mag.size // w
    if n_win < 2:
        return None
    env = mag[:n_win * w].reshape(n_win, w).max(axis=1)
    running = np.minimum.accumulate(env)
    hit = np.flatnonzero(env > 10.0 * np.maximum(running, 1e-300))
    return float(t[hit[0] * w]) if hit.size else None


def kinetic_oracle_elec(eq, data, grid, n_u=ORACLE_NODES, coupling=True):
    """rho from the velocity-discretized system

        dh/dt + i k u h = i k u kappa(u) phi,   k^2 phi = sum_j w_j h_j

    with an exponential integrator (exact free phase, linear field in a step)."""
    k, dt = data.k, grid.dt
    u, w = quad.gauss_legendre(n_u)
    kap = eq.table.kappa(u) if coupling else np.zeros_like(u)
    a = 1j * k * u
    E = np.exp(-a * dt)
    p1, p2 = _phi_weights(a * dt)
    b = 1j * k * u * kap
    c_old = b * dt * p2
    c_new = b * dt * (p1 - p2)
    Y = np.dot(w, c_new)
    h = np.asarray(data.h0(u), dtype=complex)
    rho = np.empty(grid.n_steps + 1, dtype=complex)
    rho[0] = np.dot(w, h)
    phi = rho[0] / k ** 2
    for n in range(grid.n_steps):
        base = E * h + c_old * phi
        phi_new = np.dot(w, base) / (k * k - Y)
        h = base + c_new * phi_new
        phi = phi_new
        rho[n + 1] = k * k * phi
    return rho, _oracle_meta(rho, grid, k, n_u)


def kinetic_oracle_mag(eq, data, grid, n_u=ORACLE_NODES, coupling=True, memory=True):
    """A from the velocity-discretized system

        dh/dt + i k u h = -i k u (q(u)/2) A,   A'' + (k^2 + tau0^2) A = sum_j w_j h_j

    (velocity Verlet for A, exponential integrator for h)."""
    k, dt = data.k, grid.dt
    u, w = quad.gauss_legendre(n_u)
    qv = eq.table.q(u) if coupling else np.zeros_like(u)
    omega2 = k * k + eq.constants.tau0_sq
    a = 1j * k * u
    E = np.exp(-a * dt)
    p1, p2 = _phi_weights(a * dt)
    b = -1j * k * u * 0.5 * qv
    c_old = b * dt * p2
    c_new = b * dt * (p1 - p2)
    h = np.asarray(data.h0_mag(u), dtype=complex)
    A = np.empty(grid.n_steps + 1, dtype=complex)
    A[0] = data.A0
    V = complex(data.A1)
    acc = -omega2 * A[0] + np.dot(w, h)
    for n in range(grid.n_steps):
        A[n + 1] = A[n] + dt * V + 0.5 * dt * dt * acc
        h = E * h + c_old * A[n] + c_new * A[n + 1]
        acc_new = -omega2 * A[n + 1] + np.dot(w, h)
        V = V + 0.5 * dt * (acc + acc_new)
        acc = acc_new
    return A, _oracle_meta(A, grid, k, n_u)


def _oracle_meta(sig, grid, k, n_u):
    t_rec = recurrence_time(k, n_u)
    hit = _detect_recurrence(sig, grid.t, t_rec)
    meta = {"t_recurrence": t_rec, "recurrence_detected_at": hit}
    if hit is not None and hit < grid.t_max:
        warnings.warn(f"velocity-grid recurrence near t = {hit:.3g} "
                      f"(predicted 2 pi/(k du) = {t_rec:.3g})", RuntimeWarning, stacklevel=3)
        meta["flag"] = "velocity-grid recurrence"
    return meta


def compare_with_oracle(eq, data, grid, channel="both", n_u=ORACLE_NODES, t_cap=None):
    """Resolvent routes against the kinetic oracle on [0, min(t_cap, 0.8 t_recurrence)]."""
    out = ModeSolution(grid)
    t_end = 0.8 * recurrence_time(data.k, n_u)
    if t_cap is not None:
        t_end = min(t_end, t_cap)
    mask = grid.t <= t_end + 1e-12
    out.meta["t_compare"] = float(grid.t[mask][-1])
    if channel in ("elec", "both"):
        s = solve_phi_mode(eq, data, grid)
        out.S, out.rho = s.S, s.rho
        out.oracle_rho, meta = kinetic_oracle_elec(eq, data, grid, n_u)
        out.discrepancy.update(s.discrepancy)
        out.discrepancy["rho_oracle"] = float(np.max(np.abs(out.rho - out.oracle_rho)[mask]))
        out.meta["elec"] = meta
    if channel in ("mag", "both"):
        s = solve_A_mode(eq, data, grid)
        out.Sj, out.A = s.Sj, s.A
        out.oracle_A, meta = kinetic_oracle_mag(eq, data, grid, n_u)
        out.discrepancy.update(s.discrepancy)
        out.discrepancy["A_oracle"] = float(np.max(np.abs(out.A - out.oracle_A)[mask]))
        out.meta["mag"] = meta
    if channel not in ("elec", "mag", "both"):
        raise ValidationError("channel must be elec, mag or both")
    return out


def spectral_peak(signal, dt):
    """Angular frequency of the largest FFT bin of a (mean-removed, windowed) trace and the bin width."""
    sig = np.asarray(signal) - np.mean(signal)
    n = sig.size
    spec = np.abs(np.fft.rfft(sig.real * np.hanning(n)))
    freqs = 2.0 * np.pi * np.fft.rfftfreq(n, dt)
    i = int(np.argmax(spec[1:]) + 1)
    return float(freqs[i]), float(freqs[1] - freqs[0])


# ---------------------------------------------------------------- physical space

@dataclass(frozen=True)
class SeparableData:
    """g0(x, v) = rho0(x) chi(<v>) with a centered Gaussian rho0 of width sigma."""
    chi: object
    sigma: float = 1.0

    def rho0(self, r):
        s2 = self.sigma ** 2
        return (2 * np.pi * s2) ** -1.5 * np.exp(-0.5 * np.asarray(r) ** 2 / s2)


def _sphere_mean_gauss(R, s, sigma):
    """int_{S^2} rho0(x - s w) dw for |x| = R (Gaussian rho0)."""
    s2 = sigma ** 2
    b = 2.0 * R * s / s2
    ratio = np.where(b > 1e-12, -np.expm1(-b) / np.where(b > 1e-12, b, 1.0), 1.0 - 0.5 * b)
    return 4.0 * np.pi * (2 * np.pi * s2) ** -1.5 * np.exp(-0.5 * (R - s) ** 2 / s2) * ratio


def physical_S(data3d, t, x_samples, rtol=1e-10):
    """Free-transport density S(t, x) = int g0(x - t v_hat, v) dv at points x (radii or 3-vectors).

    In the variable p = v_hat = tanh(eta) w the measure becomes sinh^2 cosh d eta dw, the
    sphere integral is closed-form for Gaussian rho0, and the eta integral is adaptive.
    """
    if t < 0:
        raise DomainError("t must be non-negative")
    x = np.asarray(x_samples, dtype=float)
    R = np.linalg.norm(x, axis=-1) if x.ndim >= 1 and x.shape[-1] == 3 and x.ndim > 1 else np.abs(x)
    chi, sigma = data3d.chi, data3d.sigma
    # chi(cosh eta) sinh^2 cosh negligible beyond eta_max
    eta_max = _eta_cutoff(chi)
    out = np.empty(np.shape(R))
    for i, r in np.ndenumerate(R):
        f = lambda e: chi(np.cosh(e)) * np.sinh(e) ** 2 * np.cosh(e) * _sphere_mean_gauss(r, t * np.tanh(e), sigma)
        pts = []
        if 0 < r < t:
            e0 = np.arctanh(r / t)
            if e0 < eta_max:
                pts = [e0]
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                val, err = integrate.quad(f, 0.0, eta_max, points=pts or None, epsabs=0.0,
                                          epsrel=rtol, limit=400)
            except integrate.IntegrationWarning as exc:
                raise ConvergenceError(f"velocity-ball quadrature failed at |x| = {r}: {exc}") from None
        out[i] = val
    return out


def _eta_cutoff(chi, floor=1e-300):
    e = 0.5
    while e < 40 and abs(chi(np.cosh(e))) * np.sinh(e) ** 2 * np.cosh(e) > floor:
        e += 0.25
    return e


def physical_mass(data3d, t, rtol=1e-9):
    """int S(t, x) dx over R^3."""
    r_max = t + 12.0 * data3d.sigma
    g = lambda r: 4.0 * np.pi * r * r * physical_S(data3d, t, np.array([r]))[0]
    pts = [min(t, r_max)] if t > 0 else None
    val, _ = integrate.quad(g, 0.0, r_max, points=pts, epsabs=0.0, epsrel=rtol, limit=200)
    return val
