"""One-dimensional kernels kappa(u), q(u), memory kernels and their Laplace transforms.

With a = 1/sqrt(1-u^2),

    kappa(u) = 2 pi int_a^inf phi'(s) s^2 ds
    q(u)     = -4 pi (1-u^2) int_a^inf phi(s) s ds

and for a wavenumber k > 0

    K_k(t) = -(1/k) int u kappa(u) sin(k u t) du
    N_k(t) =  (k/2) int u q(u) sin(k u t) du

The Laplace transforms reduce to Cauchy integrals in z = -i lambda / k:

    L[K](lambda) = -Phi(z)/k^2,          Phi(z)    = int u kappa/(u+z) du
    L[N](lambda) = -Lambda(z) - tau0^2,  Lambda(z) = (z/2) int q/(u+z) du
"""
from dataclasses import dataclass
import warnings

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline

from . import quadrature as quad
from .equilibrium import ModelConstants, THREE_ROUTE_RTOL, require_analytic, tau0_sq_velocity
from .errors import ConvergenceError, DomainError

DEFAULT_NODES = 256
MAX_NODES = 4096
FILON_SWITCH = 50.0
CHUNK = 2048


def _check_open(u):
    u = np.asarray(u, dtype=float)
    if np.any(np.abs(u) >= 1.0) or not np.all(np.isfinite(u)):
        raise DomainError("kernels are defined for |u| < 1 only")
    return u


# ---------------------------------------------------------------- quadrature route

def _tail_integral(eq, g, a):
    if a >= eq.s_max:
        return 0.0
    if eq.knots is not None:
        from .equilibrium import piecewise_integral
        breaks = np.concatenate([[a], eq.knots[eq.knots > a]])
        return piecewise_integral(g, breaks)
    if np.isfinite(eq.s_max):
        val, err = integrate.quad(g, a, eq.s_max, epsabs=0.0, epsrel=1e-12, limit=400)
        if err > 1e-8 * abs(val) + 1e-300:
            raise ConvergenceError("kernel tail integral did not converge", err)
        return val
    return quad.semi_infinite(g, a)


def kappa_quad(eq, u):
    """kappa(u) by adaptive quadrature of its defining integral."""
    u = _check_open(u)
    out = np.empty(u.shape)
    for i, ui in np.ndenumerate(u):
        a = 1.0 / np.sqrt(1.0 - ui * ui)
        out[i] = 2.0 * np.pi * _tail_integral(eq, lambda s: eq.phi_prime(s) * s * s, a)
    return out if out.ndim else float(out)


def q_quad(eq, u):
    """q(u) by adaptive quadrature of its defining integral."""
    u = _check_open(u)
    out = np.empty(u.shape)
    for i, ui in np.ndenumerate(u):
        one = 1.0 - ui * ui
        a = 1.0 / np.sqrt(one)
        out[i] = -4.0 * np.pi * one * _tail_integral(eq, lambda s: eq.phi(s) * s, a)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------- table

@dataclass(frozen=True, eq=False)
class KernelTable:
    nodes: np.ndarray
    weights: np.ndarray
    kappa_vals: np.ndarray
    q_vals: np.ndarray
    constants: ModelConstants
    kappa: object  # off-node evaluation, vectorized on (-1,1)
    q: object

    def moment(self, vals):
        return float(np.dot(self.weights, vals))

    def tau0_sq_from_q(self):
        return -0.5 * self.moment(self.q_vals)

    def tau0_sq_from_kappa(self):
        return -self.moment(self.nodes ** 2 * self.kappa_vals)

    # real-axis reductions, vectorized in y
    def _resolvent_sum(self, y, power, vals, order=1):
        y = np.asarray(y, dtype=float)
        u2 = self.nodes ** 2
        den = 1.0 - y[..., None] * u2
        return np.sum(self.weights * u2 ** power * vals / den ** order, axis=-1)

    def small_omega(self, y):
        return -self._resolvent_sum(y, 1, self.kappa_vals)

    def small_omega_prime(self, y):
        return -self._resolvent_sum(y, 2, self.kappa_vals, 2)

    def big_omega(self, y):
        return np.asarray(y) * self.small_omega(y)

    def big_omega_prime(self, y):
        return -self._resolvent_sum(y, 1, self.kappa_vals, 2)

    def psi(self, y):
        return -0.5 * self._resolvent_sum(y, 0, self.q_vals)

    def psi_prime(self, y):
        return -0.5 * self._resolvent_sum(y, 1, self.q_vals, 2)

    def psi_second(self, y):
        return -self._resolvent_sum(y, 2, self.q_vals, 3)


def _interpolant(eq, which):
    """Even cubic spline through quadrature values for profiles without closed forms."""
    theta = np.linspace(0.0, 0.5 * np.pi, 801)[:-1]
    grid = np.sin(theta)
    vals = kappa_quad(eq, grid) if which == "kappa" else q_quad(eq, grid)
    spline = CubicSpline(np.append(grid, 1.0), np.append(vals, 0.0))

    def f(u):
        return spline(np.abs(np.asarray(u, dtype=float)))

    return f


def build_kernel_table(eq, n=DEFAULT_NODES):
    """Sample kappa and q at Gauss nodes and derive the model constants.

    The node count doubles until the kernel-route values of tau0^2 agree with
    the velocity-space value to THREE_ROUTE_RTOL.
    """
    if eq.has_analytic_kernels:
        kap, qq = eq.kappa_closed, eq.q_closed
    else:
        kap, qq = _interpolant(eq, "kappa"), _interpolant(eq, "q")
    reference = tau0_sq_velocity(eq)
    while True:
        x, w = quad.gauss_legendre(n)
        kv, qv = kap(x), qq(x)
        from_k = -np.dot(w, x * x * kv)
        from_q = -0.5 * np.dot(w, qv)
        spread = max(abs(from_k - reference), abs(from_q - reference), abs(from_k - from_q))
        if spread <= THREE_ROUTE_RTOL * reference:
            break
        if n >= MAX_NODES:
            raise ConvergenceError(f"kernel table failed the tau0^2 check at {n} nodes", spread / reference)
        n *= 2
    u2 = x * x
    consts = ModelConstants(
        tau0_sq=float(from_k),
        tau1_sq=float(-np.dot(w, u2 * u2 * kv)),
        kappa0_sq=float(-np.dot(w, u2 * kv / (1.0 - u2))),
        q0_sq=float(-0.5 * np.dot(w, qv / (1.0 - u2))),
    )
    return KernelTable(x, w, kv, qv, consts, kap, qq)


def kernel_table(eq):
    return eq.table


# ---------------------------------------------------------------- pointwise kernels

def kappa(eq, u):
    u = _check_open(u)
    v = eq.table.kappa(u)
    return v if np.ndim(v) else float(v)


def q_kernel(eq, u):
    u = _check_open(u)
    v = eq.table.q(u)
    return v if np.ndim(v) else float(v)


def in_continuation_domain(z):
    z = complex(z)
    return 1.0 - z.real ** 2 + z.imag ** 2 > 0.0


def kappa_analytic(eq, z):
    """Holomorphic continuation of kappa off the real interval."""
    require_analytic(eq, "analytic continuation of kappa")
    z = np.asarray(z, dtype=complex)
    bad = (1.0 - z.real ** 2 + z.imag ** 2 <= 0.0) & (z.imag >= 0.0)
    if np.any(bad):
        raise DomainError("kappa continuation needs 1 - Re(z)^2 + Im(z)^2 > 0")
    v = eq.kappa_cont(z)
    return v if v.ndim else complex(v)


# ---------------------------------------------------------------- memory kernels

def _sin_transform(tab, amp_vals, amp_fn, omega):
    """int amp(u) sin(omega u) du for an array of omega >= 0."""
    out = np.empty(omega.shape)
    low = omega <= FILON_SWITCH
    wa = tab.weights * amp_vals
    idx_low, idx_high = np.flatnonzero(low), np.flatnonzero(~low)
    for start in range(0, idx_low.size, CHUNK):
        sel = idx_low[start:start + CHUNK]
        out[sel] = np.sin(np.outer(omega[sel], tab.nodes)) @ wa
    for start in range(0, idx_high.size, CHUNK):
        sel = idx_high[start:start + CHUNK]
        out[sel] = quad.filon_exp(amp_fn, omega[sel]).imag
    return out


def memory_K(eq, k, t):
    """K_k(t) on an array of times; K_k(0) = 0 and dK/dt(0) = tau0^2."""
    tab = eq.table
    t = np.asarray(t, dtype=float)
    flat = t.ravel()
    if k == 0:
        return tab.constants.tau0_sq * t
    if k < 0:
        raise DomainError("k must be non-negative")
    vals = -_sin_transform(tab, tab.nodes * tab.kappa_vals,
                           lambda u: u * tab.kappa(u), k * flat) / k
    return vals.reshape(t.shape) if t.ndim else float(vals[0])


def memory_N(eq, k, t):
    """N_k(t) on an array of times; N_k(0) = 0."""
    tab = eq.table
    t = np.asarray(t, dtype=float)
    flat = t.ravel()
    if k == 0:
        return np.zeros_like(t)
    if k < 0:
        raise DomainError("k must be non-negative")
    vals = 0.5 * k * _sin_transform(tab, tab.nodes * tab.q_vals,
                                    lambda u: u * tab.q(u), k * flat)
    return vals.reshape(t.shape) if t.ndim else float(vals[0])


# ---------------------------------------------------------------- Cauchy integrals

def phi_cauchy(eq, z):
    """Phi(z) = int u kappa(u)/(u+z) du for z off [-1, 1]."""
    f = eq.table.kappa
    return quad.cauchy(lambda u: u * f(u), z)


def phi_boundary(eq, x):
    """Boundary value of Phi from Im z < 0 at real x in (-1, 1)."""
    f = eq.table.kappa
    return quad.cauchy_pv(lambda u: u * f(u), x) - 1j * np.pi * x * float(f(np.array([x]))[0])


def lam_cauchy(eq, z):
    """Lambda(z) = (z/2) int q(u)/(u+z) du for z off [-1, 1]."""
    return 0.5 * complex(z) * quad.cauchy(eq.table.q, z)


def lam_boundary(eq, x):
    """Boundary value of Lambda from Im z < 0 at real x in (-1, 1)."""
    qf = eq.table.q
    return 0.5 * x * (quad.cauchy_pv(qf, x) + 1j * np.pi * float(qf(np.array([x]))[0]))


# ---------------------------------------------------------------- Laplace transforms

def classify(lam, k):
    lam = complex(lam)
    if k <= 0:
        raise DomainError("k must be positive")
    if lam.real < 0:
        raise DomainError("Re lambda < 0 needs the continued dispersion function")
    if lam.real > 0:
        return "interior"
    tau = abs(lam.imag)
    if tau == k:
        return "branch_point"
    return "axis_outer" if tau > k else "axis_inner"


def _branch_warning():
    warnings.warn("lambda at a branch point +-ik; using the one-sided limit", RuntimeWarning, stacklevel=3)


def laplace_K(eq, k, lam):
    """L[K_k](lambda) for Re lambda >= 0."""
    lam = complex(lam)
    region = classify(lam, k)
    k2 = k * k
    if region == "interior":
        return -phi_cauchy(eq, -1j * lam / k) / k2
    tau = lam.imag
    if region == "branch_point":
        _branch_warning()
        region = "axis_outer"
    if region == "axis_outer":
        return complex(-eq.table.big_omega(k2 / tau ** 2) / k2)
    return -phi_boundary(eq, tau / k) / k2


def laplace_N(eq, k, lam):
    """L[N_k](lambda) for Re lambda >= 0."""
    lam = complex(lam)
    region = classify(lam, k)
    tab = eq.table
    t0 = tab.constants.tau0_sq
    if region == "interior":
        return -lam_cauchy(eq, -1j * lam / k) - t0
    tau = lam.imag
    if region == "branch_point":
        _branch_warning()
        region = "axis_outer"
    if region == "axis_outer":
        return complex(tab.psi(k * k / tau ** 2) - t0)
    return -lam_boundary(eq, tau / k) - t0


def laplace_N_outer_dtau(eq, k, tau):
    """d/dtau of L[N](i tau) for |tau| > k, differentiating
    L[N](i tau) = -(k^2/2) int u^2 q/(tau^2 - k^2 u^2) du."""
    tab = eq.table
    u2 = tab.nodes ** 2
    return float(k * k * tau * np.sum(tab.weights * u2 * tab.q_vals / (tau * tau - k * k * u2) ** 2))


def laplace_time_quadrature(eq, k, lam, which="K", rtol=1e-11):
    """int_0^inf e^{-lambda t} K_k(t) dt (or N_k) by direct time quadrature.

    Independent of the Cauchy-integral reduction; used as an oracle.
    """
    lam = complex(lam)
    if lam.real <= 0:
        raise DomainError("time quadrature needs Re lambda > 0")
    kernel = memory_K if which == "K" else memory_N
    t_end = 40.0 / lam.real
    scale = 1.0 / (abs(lam) + k + 1.0)
    breaks = np.linspace(0.0, t_end, int(np.ceil(t_end / scale)) + 1)
    nodes, weights = quad.composite_rule(breaks, 24)
    vals = kernel(eq, k, nodes)
    return complex(np.sum(weights * vals * np.exp(-lam * nodes)))
