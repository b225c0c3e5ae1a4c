"""Electric and magnetic dispersion functions and their roots.

    D(lambda, k) = 1 + L[K_k](lambda)
    M(lambda, k) = lambda^2 + k^2 + tau0^2 + L[N_k](lambda)

On the imaginary axis above the branch points (|tau| > k), with y = k^2/tau^2,

    D(i tau, k) = 1 - Omega(y)/k^2,   Omega(y) = -int y u^2 kappa/(1 - y u^2) du
    M(i tau, k) = -tau^2 + k^2 + psi(y),   psi(y) = -1/2 int q/(1 - y u^2) du

The Langmuir branch tau_*(k) = k/sqrt(Omega^{-1}(k^2)) lives on [0, kappa0];
past kappa0 the root leaves the axis into Re lambda < 0 and is tracked on the
continued function Phi~(z), z = -i lambda/k.
"""
from dataclasses import dataclass, field
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import kernels as ker
from . import quadrature as quad
from .equilibrium import require_analytic
from .errors import ConvergenceError, DomainError

LAMBDA_ROUTE_TOL = 1e-8


def _check_y(y):
    y = np.asarray(y, dtype=float)
    if np.any((y < 0) | (y > 1)) or not np.all(np.isfinite(y)):
        raise DomainError("y must lie in [0, 1]")
    return y


def _scalar(v):
    return float(v) if np.ndim(v) == 0 else v


def omega_big(eq, y):
    return _scalar(eq.table.big_omega(_check_y(y)))


def small_omega(eq, y):
    return _scalar(eq.table.small_omega(_check_y(y)))


def psi_eval(eq, y):
    return _scalar(eq.table.psi(_check_y(y)))


# ---------------------------------------------------------------- D and M

def D_eval(eq, lam, k):
    return 1.0 + ker.laplace_K(eq, k, lam)


def M_eval(eq, lam, k, check=True):
    lam = complex(lam)
    val = lam * lam + k * k + eq.constants.tau0_sq + ker.laplace_N(eq, k, lam)
    if check and ker.classify(lam, k) == "axis_outer":
        alt = M_lambda_route(eq, lam, k)
        if abs(alt - val) > LAMBDA_ROUTE_TOL * max(1.0, abs(val)):
            raise ConvergenceError(f"psi and Lambda routes for M disagree at {lam}", abs(alt - val))
    return val


def M_lambda_route(eq, lam, k):
    """M = lambda^2 + k^2 - Lambda(-i lambda/k), valid off lambda in i[-k, k]."""
    lam = complex(lam)
    return lam * lam + k * k - ker.lam_cauchy(eq, -1j * lam / k)


def laplace_N_any(eq, k, lam):
    """L[N_k] through the Lambda route, including its holomorphic extension
    across the imaginary axis away from i[-k, k]."""
    return -ker.lam_cauchy(eq, -1j * complex(lam) / k) - eq.constants.tau0_sq


def phi_ext(eq, z):
    """Continuation Phi~ of Phi(z) = int u kappa/(u+z) du from Im z < 0 across (-1, 1)."""
    require_analytic(eq, "phi_ext")
    z = complex(z)
    if z.imag < 0:
        return ker.phi_cauchy(eq, z)
    if not (abs(z.real) < 1.0 or ker.in_continuation_domain(z)):
        if z.imag == 0 and abs(z.real) == 1.0:
            return ker.phi_cauchy(eq, z)
        raise DomainError(f"z = {z} outside the continuation domain")
    if z.imag == 0:
        if abs(z.real) >= 1.0:
            return ker.phi_cauchy(eq, z)
        return ker.phi_boundary(eq, z.real)
    return _phi_continued(eq, z)


def _phi_continued(eq, z):
    kap = eq.table.kappa
    cont = eq.kappa_cont
    return quad.cauchy_continued(lambda u: u * kap(u), lambda w: w * cont(w), z)


def D_ext(eq, lam, k):
    """D~(lambda, k) = 1 - Phi~(-i lambda/k)/k^2."""
    return 1.0 - phi_ext(eq, -1j * complex(lam) / k) / (k * k)


@dataclass(frozen=True)
class DispersionSample:
    k: float
    lam: complex
    D_val: complex
    M_val: complex
    branch: str


def dispersion_sample(eq, lam, k):
    lam = complex(lam)
    if lam.real < 0:
        return DispersionSample(k, lam, D_ext(eq, lam, k), complex("nan"), "extended")
    region = ker.classify(lam, k)
    branch = "axis_outer" if region == "branch_point" else region
    return DispersionSample(k, lam, D_eval(eq, lam, k), M_eval(eq, lam, k), branch)


# ---------------------------------------------------------------- electric roots

def _newton_bracketed(g, dg, lo, hi, x0, xtol=4e-16, maxiter=100):
    """Newton for an increasing function on [lo, hi] with bisection fallback."""
    x = min(max(x0, lo), hi)
    for _ in range(maxiter):
        gx = g(x)
        if gx == 0:
            return x
        if gx > 0:
            hi = x
        else:
            lo = x
        step = gx / dg(x)
        xn = x - step
        if not lo <= xn <= hi:
            xn = 0.5 * (lo + hi)
        if abs(xn - x) <= xtol * max(abs(x), 1e-300) or hi - lo <= xtol * max(abs(x), 1e-300):
            return xn
        x = xn
    raise ConvergenceError("bracketed Newton did not converge", hi - lo)


def _y_star(eq, k):
    tab = eq.table
    c = tab.constants
    k2 = k * k
    return _newton_bracketed(lambda y: float(tab.big_omega(y)) - k2,
                             lambda y: float(tab.big_omega_prime(y)),
                             0.0, 1.0, k2 / c.tau0_sq)


def tau_star(eq, k):
    """Langmuir frequency: D(i tau_*, k) = 0 for 0 <= k <= kappa0."""
    c = eq.constants
    if k < 0:
        raise DomainError("k must be non-negative")
    if k == 0:
        return float(c.tau0)
    if k > c.kappa0 * (1 + 1e-14):
        raise DomainError(f"k = {k} exceeds kappa0 = {c.kappa0}; use lambda_elec for the damped branch")
    if k >= c.kappa0:
        return float(k)
    return float(k / np.sqrt(_y_star(eq, k)))


def dD_dlambda_axis(eq, k):
    """d D/d lambda at lambda = i tau_*(k) from dD/dtau = 2 Omega'(y)/tau^3."""
    tau = tau_star(eq, k)
    y = (k / tau) ** 2
    dtau = 2.0 * float(eq.table.big_omega_prime(y)) / tau ** 3
    return -1j * dtau


def _dphi_ext(eq, z):
    """Phi~'(z) = -C~[f'](z) with f(u) = u kappa(u), since f vanishes at +-1."""
    kap, cont, dcont = eq.table.kappa, eq.kappa_cont, eq.kappa_prime_cont
    fp = lambda u: kap(u) + u * dcont(u).real
    fp_cont = lambda w: cont(w) + w * dcont(w)
    return -quad.cauchy_continued(fp, fp_cont, z)


def dphi_ext_fd(eq, z, h=None):
    """Phi~'(z) by a fourth-order central difference, kept as a cross-check."""
    z = complex(z)
    h = h or min(1e-4, 0.2 * max(1.0 - abs(z.real), 1e-8))
    f = lambda w: _phi_continued(eq, w)
    return (8.0 * (f(z + h) - f(z - h)) - (f(z + 2 * h) - f(z - 2 * h))) / (12.0 * h)


def _newton_branch(eq, k, z0, tol=1e-13, maxiter=60):
    """Complex Newton on z -> Phi~(z) - k^2 with step halving."""
    k2 = k * k
    z = complex(z0)
    F = _phi_continued(eq, z) - k2
    for _ in range(maxiter):
        dz = -F / _dphi_ext(eq, z)
        for _half in range(30):
            zn = z + dz
            if zn.imag < 0 or ker.in_continuation_domain(zn):
                Fn = _phi_continued(eq, zn) - k2
                if abs(Fn) < abs(F) or abs(F) < 1e-14 * k2:
                    break
            dz *= 0.5
        else:
            raise ConvergenceError(f"continuation Newton stalled at k = {k}; reduce delta", abs(F))
        done = abs(dz.real) <= tol * abs(zn) and abs(dz.imag) <= max(1e-8 * abs(zn.imag), 1e-300)
        z, F = zn, Fn
        if done:
            break
    else:
        raise ConvergenceError(f"continuation Newton did not converge at k = {k}; reduce delta", abs(F))
    if abs(F) / k2 > 1e-9:
        raise ConvergenceError(f"continued root residual too large at k = {k}", abs(F) / k2)
    return z


def _continued_z(eq, ks, max_step=None):
    """z(k) along the continued branch for increasing k > kappa0."""
    c = eq.constants
    kap = eq.table
    k0 = c.kappa0
    max_step = max_step or 2e-3 * k0
    # Phi~'(1) = -int u kappa/(u+1)^2 du, finite since kappa vanishes at -1
    dphi1 = -float(np.sum(kap.weights * kap.nodes * kap.kappa_vals / (kap.nodes + 1.0) ** 2))
    out = []
    kprev, z, dzdk = k0, 1.0 + 0j, 2.0 * k0 / dphi1
    for k in ks:
        while kprev < k:
            knext = min(k, kprev + max_step)
            guess = z + dzdk * (knext - kprev)
            z = _newton_branch(eq, knext, guess)
            dzdk = 2.0 * knext / _dphi_ext(eq, z)
            kprev = knext
        out.append(z)
    return out


def default_delta(eq):
    return 0.1 * eq.constants.kappa0


def lambda_elec(eq, k, delta=None):
    """lambda_+(k): i tau_*(k) up to kappa0, then the damped continuation."""
    c = eq.constants
    delta = default_delta(eq) if delta is None else delta
    if k <= 0:
        raise DomainError("k must be positive")
    if k <= c.kappa0:
        return 1j * tau_star(eq, k)
    if k > c.kappa0 + delta * (1 + 1e-12):
        raise DomainError(f"k = {k} beyond kappa0 + delta = {c.kappa0 + delta}")
    require_analytic(eq, "continuation past kappa0")
    z = _continued_z(eq, [k])[0]
    return 1j * k * z


def lambda_elec_many(eq, ks, delta=None):
    c = eq.constants
    delta = default_delta(eq) if delta is None else delta
    ks = np.asarray(ks, dtype=float)
    out = np.full(ks.shape, complex("nan"))
    inner = ks <= c.kappa0
    for i in np.flatnonzero(inner):
        out[i] = 1j * tau_star(eq, ks[i])
    outer = np.flatnonzero((ks > c.kappa0) & (ks <= c.kappa0 + delta * (1 + 1e-12)))
    if outer.size:
        require_analytic(eq, "continuation past kappa0")
        order = outer[np.argsort(ks[outer])]
        zs = _continued_z(eq, ks[order])
        for i, z in zip(order, zs):
            out[i] = 1j * ks[i] * z
    return out


def dD_ext_dlambda(eq, lam, k, route="exact"):
    """dD~/dlambda = (i/k^3) Phi~'(z); ``route`` selects exact or finite-difference Phi~'."""
    z = -1j * complex(lam) / k
    d = _dphi_ext(eq, z) if route == "exact" else dphi_ext_fd(eq, z)
    return 1j * d / k ** 3


# ---------------------------------------------------------------- magnetic roots

def x_star(eq, k):
    """Fixed point x = k^2 + psi(k^2/x), by Newton on Psi(x) = -x + k^2 + psi(k^2/x)."""
    tab = eq.table
    k2 = k * k
    x = k2 + eq.constants.tau0_sq
    for _ in range(60):
        y = k2 / x
        Psi = -x + k2 + float(tab.psi(y))
        dPsi = -1.0 - k2 / (x * x) * float(tab.psi_prime(y))
        dx = -Psi / dPsi
        x += dx
        if abs(dx) <= 2e-16 * x:
            return x
    raise ConvergenceError(f"magnetic fixed point did not converge at k = {k}", abs(dx))


def nu_star(eq, k):
    if k < 0:
        raise DomainError("k must be non-negative")
    return float(np.sqrt(x_star(eq, k)))


def x_star_residual(eq, k):
    x = x_star(eq, k)
    return abs(x - k * k - float(eq.table.psi(k * k / x)))


def nu_star_prime(eq, k):
    """d nu_*/dk by implicit differentiation of the fixed-point relation."""
    tab = eq.table
    x = x_star(eq, k)
    y = k * k / x
    p1 = float(tab.psi_prime(y))
    dx = 2.0 * k * (1.0 + p1 / x) / (1.0 + p1 * y / x)
    return dx / (2.0 * np.sqrt(x))


def nu_star_second(eq, k, h=None):
    """d^2 nu_*/dk^2 by fourth-order differences of nu_*', extended oddly to k < 0."""
    h = h or 1e-3 * max(1.0, k)
    d1 = lambda s: np.sign(s) * nu_star_prime(eq, abs(s))
    return (8 * (d1(k + h) - d1(k - h)) - (d1(k + 2 * h) - d1(k - 2 * h))) / (12 * h)


# ---------------------------------------------------------------- stability scan

def _contour_points(rect, n):
    a, b, c, d = rect
    corners = [complex(a, c), complex(b, c), complex(b, d), complex(a, d), complex(a, c)]
    pts = []
    for p, q in zip(corners[:-1], corners[1:]):
        s = np.linspace(0.0, 1.0, n, endpoint=False)
        pts.extend(p + (q - p) * s)
    pts.append(corners[-1])
    return pts


def winding_number(f, rect, n=64, max_depth=30, floor=1e-8):
    """Argument-principle count of zeros of f inside the rectangle
    rect = (re_min, re_max, im_min, im_max), tracked counter-clockwise."""
    pts = _contour_points(rect, n)
    vals = [f(p) for p in pts]
    total = 0.0

    def check(v, p):
        if abs(v) < floor:
            raise ConvergenceError(f"contour passes within {floor} of a zero near {p}", abs(v))

    for v, p in zip(vals, pts):
        check(v, p)

    def seg(p, q, fp, fq, depth):
        dphi = np.angle(fq / fp)
        if abs(dphi) <= np.pi / 4 or depth >= max_depth:
            if abs(dphi) > np.pi / 2:
                raise ConvergenceError("argument tracking failed to resolve the contour", abs(dphi))
            return dphi
        m = 0.5 * (p + q)
        fm = f(m)
        check(fm, m)
        return seg(p, m, fp, fm, depth + 1) + seg(m, q, fm, fq, depth + 1)

    for i in range(len(pts) - 1):
        total += seg(pts[i], pts[i + 1], vals[i], vals[i + 1], 0)
    return int(round(total / (2 * np.pi)))


def stability_winding(eq, k, rect, which="D", func=None):
    a, b, c, d = rect
    if not (0 < a < b and c < d):
        raise DomainError("rectangle must lie strictly inside Re lambda > 0")
    if func is None:
        func = (lambda lam: D_eval(eq, lam, k)) if which == "D" else (lambda lam: M_eval(eq, lam, k, check=False))
    return winding_number(func, rect)


# ---------------------------------------------------------------- curves

def _threads(threads):
    if threads:
        return int(threads)
    env = os.environ.get("VM_LANDAU_THREADS")
    return int(env) if env else (os.cpu_count() or 1)


@dataclass
class ModeCurves:
    k_grid: np.ndarray
    tau_star: np.ndarray
    nu_star: np.ndarray
    lambda_elec: np.ndarray
    a_plus: np.ndarray
    b_plus: np.ndarray
    kappa0: float
    delta: float
    meta: dict = field(default_factory=dict)


def mode_curves(eq, k_grid, delta=None, threads=None):
    """Root curves and residues on a k-grid; the magnetic branch and residues
    are computed in parallel, the continued electric branch sequentially."""
    from .green import residue_a_from_root, residue_b

    c = eq.constants
    delta = default_delta(eq) if delta is None else delta
    ks = np.asarray(k_grid, dtype=float)
    tau = np.array([tau_star(eq, k) if k <= c.kappa0 else np.nan for k in ks])
    lam = lambda_elec_many(eq, ks, delta) if eq.has_analytic_kernels else \
        np.where(ks <= c.kappa0, 1j * tau, complex("nan"))

    def task(i):
        k = ks[i]
        nu = nu_star(eq, k)
        b = residue_b(eq, k)[0] if k > 0 else 1.0 / (2j * nu)
        a = residue_a_from_root(eq, k, lam[i]) if (k > 0 and np.isfinite(lam[i])) else \
            (0.5j * c.tau0 if k == 0 else complex("nan"))
        return nu, a, b

    with ThreadPoolExecutor(max_workers=_threads(threads)) as pool:
        res = list(pool.map(task, range(ks.size)))
    nu = np.array([r[0] for r in res])
    a = np.array([r[1] for r in res])
    b = np.array([r[2] for r in res])
    return ModeCurves(ks, tau, nu, lam, a, b, float(c.kappa0), float(delta))
