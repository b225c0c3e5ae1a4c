"""Temporal Green functions of the electric and magnetic channels.

Electric: G(t) = delta(t) + R(t) with R + K + K*R = 0 (Laplace transform 1/D - 1).
Magnetic: H'' + (k^2 + tau0^2) H + N*H = 0, H(0) = 0, H'(0) = 1 (transform 1/M).

Both split into residue terms at the dispersion roots and a regular remainder.
The remainder can be computed either from the time-stepped trace or directly
as a Fourier integral along the imaginary axis with the poles removed, which
is the only practical route at very late times.
"""
from dataclasses import dataclass, field, replace
import warnings

import numpy as np
from scipy import integrate

from . import dispersion as dsp
from . import kernels as ker
from .errors import ConvergenceError, DomainError, ValidationError


@dataclass(frozen=True)
class TimeGrid:
    dt: float
    n_steps: int

    @property
    def t_max(self):
        return self.dt * self.n_steps

    @property
    def t(self):
        return self.dt * np.arange(self.n_steps + 1)


def max_dt(eq, k):
    """Resolution rule: dt <= min(0.05/max(1,k), 0.05/nu_*(k))."""
    return min(0.05 / max(1.0, k), 0.05 / dsp.nu_star(eq, k))


def time_grid(eq, k, t_max, dt=None):
    dt = max_dt(eq, k) if dt is None else dt
    n = int(np.ceil(t_max / dt - 1e-9))
    return TimeGrid(t_max / n, n)


def _check_grid(eq, k, grid):
    if k <= 0:
        raise DomainError("k must be positive")
    if grid.dt > max_dt(eq, k) * (1 + 1e-12):
        raise ValidationError(f"dt = {grid.dt} violates the resolution rule dt <= {max_dt(eq, k):.4g}")


@dataclass
class GreenTrace:
    k: float
    grid: TimeGrid
    which: str  # "G" (non-delta part R) or "H"
    values: np.ndarray
    derivative: np.ndarray | None = None  # dH/dt for the magnetic channel
    residues: tuple = ()
    roots: tuple = ()
    osc_part: np.ndarray | None = None
    regular_part: np.ndarray | None = None
    has_delta: bool = False
    meta: dict = field(default_factory=dict)


# ---------------------------------------------------------------- time stepping

def solve_resolvent(kvals, dt):
    """R_n = -K_n - dt sum_{j=1}^{n-1} K_{n-j} R_j (product trapezoid, K_0 = R_0 = 0)."""
    n = kvals.size
    R = np.zeros(n, dtype=kvals.dtype)
    krev = kvals[::-1].copy()
    for m in range(1, n):
        # sum_{j=1}^{m-1} K_{m-j} R_j
        conv = np.dot(krev[n - m:n - 1], R[1:m]) if m > 1 else 0.0
        R[m] = -kvals[m] - dt * conv
    return R


def solve_volterra(kvals, src, dt):
    """y + K*y = S by product trapezoid; K_0 = 0 makes it explicit."""
    n = kvals.size
    y = np.zeros(n, dtype=np.result_type(kvals, src))
    y[0] = src[0]
    krev = kvals[::-1].copy()
    for m in range(1, n):
        conv = 0.5 * kvals[m] * y[0] + np.dot(krev[n - m:n - 1], y[1:m])
        y[m] = src[m] - dt * conv
    return y


def solve_memory_oscillator(nvals, omega2, dt, h0=0.0, v0=1.0, force=None):
    """Velocity Verlet for h'' + omega2 h + N*h = f with trapezoidal memory.

    Returns h and h' on the grid.
    """
    n = nvals.size
    dtype = np.result_type(nvals, h0, v0, force if force is not None else 0.0)
    h = np.zeros(n, dtype=dtype)
    v = np.zeros(n, dtype=dtype)
    f = np.zeros(n, dtype=dtype) if force is None else np.asarray(force, dtype=dtype)
    h[0], v[0] = h0, v0
    nrev = nvals[::-1].copy()
    acc = -omega2 * h[0] + f[0]
    for m in range(n - 1):
        h[m + 1] = h[m] + dt * v[m] + 0.5 * dt * dt * acc
        # trapezoid over j = 0..m+1 with N_0 = 0
        mem = dt * (0.5 * nvals[m + 1] * h[0] + np.dot(nrev[n - m - 1:n - 1], h[1:m + 1]))
        acc_next = -omega2 * h[m + 1] - mem + f[m + 1]
        v[m + 1] = v[m] + 0.5 * dt * (acc + acc_next)
        acc = acc_next
    return h, v


def resolvent_G(eq, k, grid, with_residues=True):
    _check_grid(eq, k, grid)
    kv = ker.memory_K(eq, k, grid.t)
    R = solve_resolvent(kv, grid.dt)
    trace = GreenTrace(k, grid, "G", R, has_delta=True)
    trace.meta["kernel"] = kv
    if with_residues:
        trace = decompose(attach_roots(eq, trace))
    return trace


def greens_H(eq, k, grid, memory=True, with_residues=True):
    _check_grid(eq, k, grid)
    nv = ker.memory_N(eq, k, grid.t) if memory else np.zeros(grid.n_steps + 1)
    omega2 = k * k + eq.constants.tau0_sq
    H, V = solve_memory_oscillator(nv, omega2, grid.dt)
    trace = GreenTrace(k, grid, "H", H, derivative=V)
    trace.meta["kernel"] = nv
    trace.meta["omega2"] = omega2
    if with_residues and memory:
        trace = decompose(attach_roots(eq, trace))
    return trace


# ---------------------------------------------------------------- residues

def residue_a_from_root(eq, k, lam, route="closed"):
    """1/dD/dlambda at the electric root lam."""
    c = eq.constants
    if abs(lam.real) == 0.0 and k <= c.kappa0:
        if route == "closed":
            return 1.0 / dsp.dD_dlambda_axis(eq, k)
        return 1.0 / dD_dlambda_fd(eq, k, abs(lam.imag))
    return 1.0 / dsp.dD_ext_dlambda(eq, lam, k, "exact" if route == "closed" else "fd")


def dD_dlambda_fd(eq, k, tau, h=None):
    """dD/dlambda at i tau (|tau| > k) from central differences of D along the axis."""
    h = h or min(1e-3, 0.2 * (tau - k))
    D = lambda s: dsp.D_eval(eq, 1j * s, k)
    dtau = (8 * (D(tau + h) - D(tau - h)) - (D(tau + 2 * h) - D(tau - 2 * h))) / (12 * h)
    return -1j * dtau


def residue_a(eq, k, delta=None, route="closed"):
    """(a_+, a_-) for 0 < k < kappa0 + delta, else an empty tuple."""
    c = eq.constants
    delta = dsp.default_delta(eq) if delta is None else delta
    if k <= 0:
        raise DomainError("k must be positive")
    if k >= c.kappa0 + delta or (k > c.kappa0 and not eq.has_analytic_kernels):
        return ()
    lam = dsp.lambda_elec(eq, k, delta)
    a = residue_a_from_root(eq, k, lam, route)
    return a, np.conj(a)


def dLN_dlambda(eq, k, nu, route="tau"):
    """d L[N]/dlambda at i nu, nu > k."""
    if route == "tau":
        return -1j * ker.laplace_N_outer_dtau(eq, k, nu)
    h = 1e-3 * max(1.0, nu)
    L = lambda lam: dsp.laplace_N_any(eq, k, lam)
    lam = 1j * nu
    return (8 * (L(lam + h) - L(lam - h)) - (L(lam + 2 * h) - L(lam - 2 * h))) / (12 * h)


def residue_b(eq, k, route="tau"):
    nu = dsp.nu_star(eq, k)
    b = 1.0 / (2j * nu + dLN_dlambda(eq, k, nu, route))
    return b, np.conj(b)


def attach_roots(eq, trace, delta=None):
    k = trace.k
    if trace.which == "G":
        res = residue_a(eq, k, delta)
        roots = ()
        if res:
            lam = dsp.lambda_elec(eq, k, delta)
            roots = (lam, np.conj(lam))
    else:
        res = residue_b(eq, k)
        nu = dsp.nu_star(eq, k)
        roots = (1j * nu, -1j * nu)
    return replace(trace, residues=tuple(res), roots=roots)


def oscillatory_part(residues, roots, t):
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.shape, dtype=complex)
    for a, lam in zip(residues, roots):
        out += a * np.exp(lam * t)
    return out


def decompose(trace):
    osc = oscillatory_part(trace.residues, trace.roots, trace.grid.t)
    return replace(trace, osc_part=osc, regular_part=trace.values - osc)


# ---------------------------------------------------------------- residual diagnostics

def _simpson_weights(m):
    """Weights for int_0^{m dt} on m+1 equispaced points (dt = 1); Simpson with a
    3/8 panel first when m is odd."""
    w = np.zeros(m + 1)
    if m == 1:
        w[:] = 0.5
        return w
    start = 0
    if m % 2 == 1:
        w[0:4] += np.array([3, 9, 9, 3]) / 8.0
        start = 3
    if m - start >= 2:
        seg = np.ones(m - start + 1)
        seg[1:-1:2] = 4
        seg[2:-1:2] = 2
        w[start:] += seg / 3.0
    return w


def _conv_accurate(a, b, dt, idx):
    """(a*b)(t_m) = int_0^{t_m} a(t_m - s) b(s) ds at indices idx, fourth order."""
    out = np.zeros(len(idx), dtype=np.result_type(a, b))
    for i, m in enumerate(idx):
        if m == 0:
            continue
        out[i] = dt * np.dot(_simpson_weights(m), a[m::-1] * b[:m + 1])
    return out


def _sample_idx(n, n_samples):
    return np.unique(np.linspace(2, n - 1, min(n_samples, n - 2)).astype(int))


def volterra_residual_arrays(K, y, src, dt, n_samples=200):
    """max |y + K*y - src| with the convolution done by a fourth-order rule."""
    idx = _sample_idx(y.size, n_samples)
    res = y[idx] + _conv_accurate(K, y, dt, idx) - src[idx]
    return float(np.max(np.abs(res)))


def oscillator_residual_arrays(N, omega2, h, dt, h0=0.0, v0=1.0, force=None, n_samples=200):
    """max |h(t) - h0 - v0 t + int_0^t (t-s)[omega2 h + N*h - f](s) ds|, the
    twice-integrated form of h'' + omega2 h + N*h = f."""
    n = h.size
    t = dt * np.arange(n)
    g = omega2 * h + _conv_accurate(N, h, dt, np.arange(n))
    if force is not None:
        g = g - force
    idx = _sample_idx(n, n_samples)
    res = np.array([h[m] - h0 - v0 * t[m] + dt * np.dot(_simpson_weights(m), (t[m] - t[:m + 1]) * g[:m + 1])
                    for m in idx])
    return float(np.max(np.abs(res)))


def volterra_residual(trace, n_samples=200):
    """max |R + K + K*R| for a resolvent trace."""
    K = trace.meta["kernel"]
    return volterra_residual_arrays(K, trace.values, -K, trace.grid.dt, n_samples)


def memory_ode_residual(trace, n_samples=200):
    """Integrated-form residual of the magnetic Green function ODE."""
    return oscillator_residual_arrays(trace.meta["kernel"], trace.meta["omega2"], trace.values,
                                      trace.grid.dt, 0.0, 1.0, None, n_samples)


# ---------------------------------------------------------------- spectral routes

def _axis_symbol(eq, which, k, tau):
    if abs(tau - k) < 1e-9 * k:
        # branch point: both one-sided forms are continuous, step off it
        tau = k * (1.0 + 1e-9)
    lam = 1j * tau
    if which == "G":
        return 1.0 / dsp.D_eval(eq, lam, k) - 1.0
    return 1.0 / dsp.M_eval(eq, lam, k, check=False)


def regular_part_spectral(eq, which, k, t, delta=None, guard=1e-3, epsabs=1e-13):
    """Regular part at times t from the imaginary-axis Fourier integral

        reg(t) = (1/pi) int_0^inf Re[e^{i tau t} (F(i tau) - sum_pm r_pm/(i tau - lambda_pm))] dtau

    with F = 1/D - 1 or 1/M and (r, lambda) the residues and roots.
    """
    if which == "G":
        res = residue_a(eq, k, delta)
        roots = ()
        if res:
            lam = dsp.lambda_elec(eq, k, delta)
            roots = (lam, np.conj(lam))
    else:
        res = residue_b(eq, k)
        nu = dsp.nu_star(eq, k)
        roots = (1j * nu, -1j * nu)
    centers = [abs(r.imag) for r in roots]

    def raw(tau):
        val = _axis_symbol(eq, which, k, tau)
        for a, lam in zip(res, roots):
            val -= a / (1j * tau - lam)
        return val

    def reg(tau):
        for c in centers:
            h = guard * max(c, 1e-3)
            if abs(tau - c) < h:
                lo, hi = raw(c - h), raw(c + h)
                return lo + (hi - lo) * (tau - c + h) / (2 * h)
        return raw(tau)

    cache = {}

    def reg_cached(tau):
        key = float(tau)
        if key not in cache:
            cache[key] = reg(key)
        return cache[key]

    tail_start = 4.0 * max([k, 1.0] + centers)
    pts = sorted({k, *centers})
    out = []
    for ti in np.atleast_1d(np.asarray(t, dtype=float)):
        total = 0.0
        edges = [0.0] + [p for p in pts if p < tail_start] + [tail_start]
        for a, b in zip(edges[:-1], edges[1:]):
            if b <= a:
                continue
            total += _fourier_piece(reg_cached, a, b, ti, epsabs)
        total += _fourier_tail(reg_cached, tail_start, ti, epsabs)
        out.append(total / np.pi)
    out = np.array(out)
    return out if np.ndim(t) else float(out[0])


def _fourier_piece(F, a, b, t, epsabs):
    """int_a^b Re[e^{i tau t} F(tau)] dtau."""
    fr = lambda s: F(s).real
    fi = lambda s: F(s).imag
    opts = dict(epsabs=epsabs, epsrel=1e-10, limit=2000)
    if t * (b - a) < 2 * np.pi:
        g = lambda s: (np.exp(1j * s * t) * F(s)).real
        return integrate.quad(g, a, b, **opts)[0]
    c = integrate.quad(fr, a, b, weight="cos", wvar=t, **opts)[0]
    s = integrate.quad(fi, a, b, weight="sin", wvar=t, **opts)[0]
    return c - s


def _fourier_tail(F, a, t, epsabs):
    fr = lambda s: F(s).real
    fi = lambda s: F(s).imag
    if t == 0:
        return integrate.quad(fr, a, np.inf, epsabs=epsabs, limit=2000)[0]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        c = integrate.quad(fr, a, np.inf, weight="cos", wvar=t, epsabs=epsabs, limlst=200)[0]
        s = integrate.quad(fi, a, np.inf, weight="sin", wvar=t, epsabs=epsabs, limlst=200)[0]
    return c - s


def bromwich_invert(eq, which, k, t, gamma0=0.1, T_trunc=None, epsabs=1e-11):
    """(1/2 pi i) int_{Re lambda = gamma0} e^{lambda t} F(lambda) dlambda with
    F = 1/D - 1 (which='G') or 1/M (which='H'); validation oracle.

    A rational function with the same leading large-|lambda| behaviour and a
    known inverse is subtracted first, so the truncated integrand is O(lambda^-4).
    """
    if not 0.05 <= gamma0 <= 1.0:
        raise ValidationError("gamma0 must lie in [0.05, 1]")
    t0sq = eq.constants.tau0_sq
    nu = dsp.nu_star(eq, k)
    T = T_trunc or 50.0 * max(1.0, nu)
    if T < 50.0 * max(1.0, nu):
        raise ValidationError("T_trunc must be >= 50 max(1, nu_*)")
    if which == "G":
        def F(lam):
            return 1.0 / dsp.D_eval(eq, lam, k) - 1.0 + t0sq / (lam * lam + t0sq)
        known = -np.sqrt(t0sq) * np.sin(np.sqrt(t0sq) * t)
    else:
        w2 = k * k + t0sq

        def F(lam):
            return 1.0 / dsp.M_eval(eq, lam, k, check=False) - 1.0 / (lam * lam + w2)
        known = np.sin(np.sqrt(w2) * t) / np.sqrt(w2)
    G = lambda s: F(complex(gamma0, s))
    tail = abs(G(T)) * T / 3.0 * np.exp(gamma0 * t) / np.pi
    if tail > 1e-5:
        raise ConvergenceError(f"Bromwich truncation error estimate {tail:.2e} above 1e-5", tail)
    breaks = np.linspace(0.0, T, int(np.ceil(T / 2.0)) + 1)
    total = 0.0
    for a, b in zip(breaks[:-1], breaks[1:]):
        total += _fourier_piece(G, a, b, t, epsabs)
    return known + np.exp(gamma0 * t) * total / np.pi


# ---------------------------------------------------------------- decay fits

def fit_decay(regular_part, grid_t, k, scaling="kt", window=None, noise_floor=1e-12, envelope=True):
    """Least-squares slope of log|reg| against log(1 + k^p t), p = 1 or 3.

    With ``envelope`` the running maximum of |reg| over [t, t_max] is used, which
    ignores zero crossings of an oscillating remainder.
    """
    t = np.asarray(grid_t, dtype=float)
    mag = np.abs(np.asarray(regular_part))
    if envelope:
        mag = np.maximum.accumulate(mag[::-1])[::-1]
    t1, t2 = window if window is not None else (t[-1] / 4, t[-1])
    if not (t[0] <= t1 < t2 <= t[-1] * (1 + 1e-12)):
        raise ValidationError("fit window must lie inside the grid")
    sel = (t >= t1) & (t <= t2)
    partial = False
    above = sel & (mag > noise_floor)
    if above.sum() < sel.sum():
        partial = True
        sel = above
    if sel.sum() < 3:
        raise ValidationError("fewer than three samples above the noise floor in the fit window")
    p = 1 if scaling == "kt" else 3
    x = np.log1p(k ** p * t[sel])
    y = np.log(mag[sel])
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, const), *_ = np.linalg.lstsq(A, y, rcond=None)
    pred = A @ np.array([slope, const])
    ss = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum((y - pred) ** 2) / ss if ss > 0 else 1.0
    return {"slope": float(slope), "constant": float(np.exp(const)), "r2": float(r2),
            "partial": partial, "window": (float(t[sel][0]), float(t[sel][-1]))}
