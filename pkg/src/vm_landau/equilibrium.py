"""Radial equilibria mu(v) = phi(<v>) and their scalar invariants.

Two built-in families carry closed-form kernels:

    maxwellian  phi(s) = n0 e^{1/2} (2 pi)^{-3/2} exp(-s^2/2)
    powerlaw    phi(s) = c0 s^{-2M},  M > 3

A third kind interpolates a sampled profile (s, phi(s)) and relies on
quadrature for everything.
"""
from dataclasses import dataclass, field
from functools import cached_property
import hashlib
import json
import warnings

import numpy as np
from scipy import integrate
from scipy.interpolate import PchipInterpolator

from .errors import ConvergenceError, UnsupportedFeatureError, ValidationError

KINDS = ("maxwellian", "powerlaw", "tabulated")
THREE_ROUTE_RTOL = 1e-8


@dataclass(frozen=True)
class EquilibriumSpec:
    kind: str
    n0: float = 1.0
    M: float | None = None
    table: tuple | None = None  # (s, phi) arrays for kind="tabulated"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown equilibrium kind {self.kind!r}; expected one of {KINDS}")
        if not (np.isfinite(self.n0) and self.n0 > 0):
            raise ValidationError(f"invariant n0 > 0 violated (n0={self.n0})")
        if self.kind == "powerlaw":
            if self.M is None or not np.isfinite(self.M) or self.M <= 3:
                raise ValidationError(
                    f"invariant M > 3 violated for powerlaw (M={self.M}); "
                    "M <= 3 gives infinite mass or infinite tau0^2")
        if self.kind == "tabulated":
            if self.table is None:
                raise ValidationError("tabulated equilibrium needs a (s, phi) table")
            s, p = (np.asarray(a, dtype=float) for a in self.table)
            if s.ndim != 1 or s.shape != p.shape or s.size < 4:
                raise ValidationError("table must hold at least 4 matching (s, phi) samples")
            if abs(s[0] - 1.0) > 1e-12 or np.any(np.diff(s) <= 0):
                raise ValidationError("table abscissae must start at s=1 and increase strictly")
            if np.any(p < 0):
                raise ValidationError("invariant phi >= 0 violated by table")

    def to_dict(self):
        d = {"kind": self.kind, "n0": self.n0}
        if self.M is not None:
            d["M"] = self.M
        if self.table is not None:
            d["table"] = [list(map(float, a)) for a in self.table]
        return d

    def digest(self):
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True)
class ModelConstants:
    tau0_sq: float
    tau1_sq: float
    kappa0_sq: float
    q0_sq: float

    @property
    def tau0(self):
        return np.sqrt(self.tau0_sq)

    @property
    def kappa0(self):
        return np.sqrt(self.kappa0_sq)


@dataclass(frozen=True, eq=False)
class Equilibrium:
    spec: EquilibriumSpec
    phi: object
    phi_prime: object
    has_analytic_kernels: bool
    coef: float
    monotone: bool = True
    s_max: float = np.inf
    # closed forms on (-1,1) and the continuation of kappa, built-ins only
    kappa_closed: object = field(default=None, repr=False)
    q_closed: object = field(default=None, repr=False)
    kappa_cont: object = field(default=None, repr=False)
    kappa_prime_cont: object = field(default=None, repr=False)
    knots: np.ndarray | None = field(default=None, repr=False)  # tabulated abscissae in s

    @property
    def kind(self):
        return self.spec.kind

    @cached_property
    def table(self):
        from .kernels import build_kernel_table
        return build_kernel_table(self)

    @property
    def constants(self):
        return self.table.constants


def piecewise_integral(f, breaks, n=8):
    """sum over consecutive breaks of n-point Gauss-Legendre; f must be vectorized."""
    b = np.asarray(breaks, dtype=float)
    x, w = np.polynomial.legendre.leggauss(n)
    mid, half = 0.5 * (b[1:] + b[:-1]), 0.5 * (b[1:] - b[:-1])
    nodes = mid[:, None] + half[:, None] * x[None, :]
    return float(np.sum(half[:, None] * w[None, :] * f(nodes)))


def radial_moment(eq, g, rtol=1e-12):
    """4 pi int_0^inf g(r) phi(sqrt(1+r^2)) r^2 dr."""

    def f(r):
        return g(r) * eq.phi(np.sqrt(1.0 + r * r)) * r * r

    if eq.knots is not None:
        # piecewise cubic in s: integrate panel by panel between the knots
        fv = lambda r: np.broadcast_to(g(r), np.shape(r)) * eq.phi(np.sqrt(1.0 + r * r)) * r * r
        return 4.0 * np.pi * piecewise_integral(fv, np.sqrt(eq.knots ** 2 - 1.0))
    if np.isfinite(eq.s_max):
        rmax = np.sqrt(eq.s_max ** 2 - 1.0)
        val, err = integrate.quad(f, 0.0, rmax, epsabs=0.0, epsrel=rtol, limit=400)
    else:
        val, err = integrate.quad(f, 0.0, np.inf, epsabs=0.0, epsrel=rtol, limit=400)
    if err > 1e-9 * abs(val):
        raise ConvergenceError("radial velocity moment did not converge", err)
    return 4.0 * np.pi * val


def _maxwellian(spec):
    c = spec.n0 * np.exp(0.5) / (2.0 * np.pi) ** 1.5

    def phi(s):
        s = np.asarray(s, dtype=float)
        return c * np.exp(-0.5 * s * s)

    def phi_prime(s):
        s = np.asarray(s, dtype=float)
        return -c * s * np.exp(-0.5 * s * s)

    # both kernels vanish to all orders at |u| = 1
    def kappa_closed(u):
        one = 1.0 - np.asarray(u, dtype=float) ** 2
        a2 = 1.0 / np.where(one > 0, one, 1.0)
        return np.where(one > 0, -2.0 * np.pi * c * (a2 + 2.0) * np.exp(-0.5 * a2), 0.0)

    def q_closed(u):
        one = 1.0 - np.asarray(u, dtype=float) ** 2
        safe = np.where(one > 0, one, 1.0)
        return np.where(one > 0, -4.0 * np.pi * safe * c * np.exp(-0.5 / safe), 0.0)

    def kappa_cont(z):
        zeta = 1.0 / (1.0 - np.asarray(z, dtype=complex) ** 2)
        return -2.0 * np.pi * c * (zeta + 2.0) * np.exp(-0.5 * zeta)

    def kappa_prime_cont(z):
        z = np.asarray(z, dtype=complex)
        zeta = 1.0 / (1.0 - z * z)
        return 2.0 * np.pi * c * z * zeta ** 3 * np.exp(-0.5 * zeta)

    return Equilibrium(spec, phi, phi_prime, True, c,
                       kappa_closed=kappa_closed, q_closed=q_closed, kappa_cont=kappa_cont,
                       kappa_prime_cont=kappa_prime_cont)


def _powerlaw(spec):
    M = float(spec.M)
    # mass is linear in c0, so one Newton step from c0 = 0 is exact
    shape = integrate.quad(lambda r: r * r * (1.0 + r * r) ** (-M), 0.0, np.inf,
                           epsabs=0.0, epsrel=1e-13, limit=400)[0]
    c0 = spec.n0 / (4.0 * np.pi * shape)

    def phi(s):
        return c0 * np.asarray(s, dtype=float) ** (-2.0 * M)

    def phi_prime(s):
        return -2.0 * M * c0 * np.asarray(s, dtype=float) ** (-2.0 * M - 1.0)

    def kappa_closed(u):
        return -2.0 * np.pi * M * c0 * (1.0 - np.asarray(u) ** 2) ** (M - 1.0) / (M - 1.0)

    def q_closed(u):
        return -2.0 * np.pi * c0 * (1.0 - np.asarray(u) ** 2) ** M / (M - 1.0)

    def kappa_cont(z):
        w = 1.0 - np.asarray(z, dtype=complex) ** 2
        return -2.0 * np.pi * M * c0 * w ** (M - 1.0) / (M - 1.0)

    def kappa_prime_cont(z):
        z = np.asarray(z, dtype=complex)
        return 4.0 * np.pi * M * c0 * z * (1.0 - z * z) ** (M - 2.0)

    return Equilibrium(spec, phi, phi_prime, True, c0,
                       kappa_closed=kappa_closed, q_closed=q_closed, kappa_cont=kappa_cont,
                       kappa_prime_cont=kappa_prime_cont)


def _tabulated(spec):
    s_tab, p_tab = (np.asarray(a, dtype=float) for a in spec.table)
    interp = PchipInterpolator(s_tab, p_tab, extrapolate=False)
    deriv = interp.derivative()
    s_max = float(s_tab[-1])
    monotone = bool(np.all(np.diff(p_tab) <= 0))
    if not monotone:
        warnings.warn("tabulated profile is not monotone decreasing", RuntimeWarning, stacklevel=3)

    def raw(s):
        return np.nan_to_num(interp(np.asarray(s, dtype=float)), nan=0.0)

    probe = Equilibrium(spec, raw, None, False, 1.0, monotone, s_max, knots=s_tab)
    scale = spec.n0 / radial_moment(probe, lambda r: 1.0)

    def phi(s):
        return scale * raw(s)

    def phi_prime(s):
        return scale * np.nan_to_num(deriv(np.asarray(s, dtype=float)), nan=0.0)

    return Equilibrium(spec, phi, phi_prime, False, scale, monotone, s_max, knots=s_tab)


def build_equilibrium(spec):
    """Construct an Equilibrium and check its mass normalization."""
    if isinstance(spec, dict):
        spec = EquilibriumSpec(**spec)
    builder = {"maxwellian": _maxwellian, "powerlaw": _powerlaw, "tabulated": _tabulated}[spec.kind]
    eq = builder(spec)
    mass = radial_moment(eq, lambda r: 1.0)
    if abs(mass - spec.n0) > 1e-8 * spec.n0:
        raise ConvergenceError(f"mass normalization off: {mass} vs n0={spec.n0}", abs(mass - spec.n0))
    return eq


def maxwellian(n0=1.0):
    return build_equilibrium(EquilibriumSpec("maxwellian", n0))


def powerlaw(M=4.0, n0=1.0):
    return build_equilibrium(EquilibriumSpec("powerlaw", n0, M))


def tau0_sq_velocity(eq):
    """tau0^2 from its velocity-space definition."""
    return radial_moment(eq, lambda r: (1.0 + 2.0 * r * r / 3.0) / (1.0 + r * r) ** 1.5)


def tau0_sq_routes(eq):
    """The three independent evaluations of tau0^2: velocity, -1/2 int q, -int u^2 kappa."""
    tab = eq.table
    return tau0_sq_velocity(eq), tab.tau0_sq_from_q(), tab.tau0_sq_from_kappa()


def tau0_sq(eq):
    routes = tau0_sq_routes(eq)
    spread = (max(routes) - min(routes)) / abs(routes[0])
    if spread > THREE_ROUTE_RTOL:
        raise ConvergenceError(f"tau0^2 routes disagree: {routes}", spread)
    return routes[0]


def tau1_sq(eq):
    return eq.constants.tau1_sq


def kappa0_sq(eq):
    return eq.constants.kappa0_sq


def q0_sq(eq):
    return eq.constants.q0_sq


def model_constants(eq):
    return eq.constants


def require_analytic(eq, what):
    if not eq.has_analytic_kernels:
        raise UnsupportedFeatureError(f"{what} needs an analytic equilibrium; '{eq.kind}' has none")
