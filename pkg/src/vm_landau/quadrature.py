"""Quadrature building blocks on the interval [-1, 1].

Everything here works on plain callables ``f(u)`` that accept numpy arrays.
Cauchy-type integrals ``int f(u)/(u+z) du`` are the workhorse of the
dispersion functions, so they get three variants:

* ``cauchy``            direct rule on a mesh graded towards the pole, z off [-1,1]
* ``cauchy_pv``         principal value for real z in (-1,1) by subtraction
* ``cauchy_continued``  holomorphic continuation across (-1,1) from below
"""
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from .errors import ConvergenceError

PANEL_NODES = 20
MAX_PANEL = 0.125


@lru_cache(maxsize=64)
def gauss_legendre(n):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def composite_rule(breaks, n=PANEL_NODES):
    """Gauss-Legendre nodes and weights on consecutive panels given by ``breaks``."""
    b = np.asarray(breaks, dtype=float)
    x, w = gauss_legendre(n)
    mid = 0.5 * (b[1:] + b[:-1])
    half = 0.5 * (b[1:] - b[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def uniform_breaks(lo=-1.0, hi=1.0, max_width=MAX_PANEL):
    m = max(1, int(np.ceil((hi - lo) / max_width)))
    return np.linspace(lo, hi, m + 1)


def graded_breaks(center, delta, lo=-1.0, hi=1.0, max_width=MAX_PANEL):
    """Panel breakpoints refined geometrically towards ``center``.

    The innermost panels have width ``delta``; widths double outward and are
    capped at ``max_width``.
    """
    center = min(max(center, lo), hi)
    delta = max(delta, 1e-15)
    pts = [center]
    for side in (-1.0, 1.0):
        edge = hi if side > 0 else lo
        pos, width = center, delta
        while side * (edge - pos) > 0:
            pos = pos + side * min(width, max_width)
            if side * (edge - pos) <= 0.25 * min(width, max_width):
                pos = edge
            pts.append(pos)
            width *= 2.0
    return np.unique(np.clip(pts, lo, hi))


def semi_infinite(f, a, rtol=1e-12, limit=200):
    """int_a^inf f(s) ds via s = a/(1 - xi) and adaptive Gauss-Kronrod on [0, 1)."""

    def g(xi):
        s = a / (1.0 - xi)
        return f(s) * a / (1.0 - xi) ** 2

    val, err = integrate.quad(g, 0.0, 1.0, epsabs=0.0, epsrel=rtol, limit=limit)
    if not np.isfinite(val) or err > max(100 * rtol * abs(val), 1e-300):
        raise ConvergenceError(f"semi-infinite quadrature from {a} did not converge", err)
    return val


def _pole_geometry(z):
    """Nearest point of [-1,1] to the pole u = -z and its distance."""
    w = -z
    u0 = min(max(w.real, -1.0), 1.0)
    return u0, abs(w - u0)


def cauchy(f, z, n=PANEL_NODES):
    """int_{-1}^{1} f(u)/(u+z) du for z not on [-1, 1]."""
    z = complex(z)
    u0, dist = _pole_geometry(z)
    if dist == 0.0:
        raise ValueError("pole lies on the integration interval")
    nodes, weights = composite_rule(graded_breaks(u0, dist), n)
    return complex(np.sum(weights * f(nodes) / (nodes + z)))


def _breaks_with(point):
    """Uniform breaks plus ``point``, dropping uniform breaks that nearly coincide."""
    b = uniform_breaks()
    b = b[np.abs(b - point) > 1e-9]
    return np.union1d(b, [point])


def cauchy_pv(f, x, n=PANEL_NODES):
    """Principal value of int f(u)/(u+x) du for real x in (-1, 1).

    Subtracting f(-x) leaves a smooth difference quotient; the removed part
    integrates to log((1+x)/(1-x)).
    """
    x = float(x)
    fx = complex(f(np.array([-x]))[0])
    nodes, weights = composite_rule(_breaks_with(-x), n)
    smooth = np.sum(weights * (f(nodes) - fx) / (nodes + x))
    return complex(smooth + fx * np.log((1.0 + x) / (1.0 - x)))


def cauchy_continued(f, f_cont, z, n=PANEL_NODES):
    """Continuation of int f(u)/(u+z) du from Im z < 0 across (-1, 1).

    ``f_cont`` is the holomorphic continuation of ``f``. For Im z < 0 the
    result equals the plain integral, on (-1, 1) it is the lower boundary
    value, and for Im z > 0 it differs from the plain integral by
    2*pi*i*f(-z).
    """
    z = complex(z)
    fz = complex(f_cont(np.array([-z]))[0])
    nodes, weights = composite_rule(_breaks_with(min(max(-z.real, -1.0), 1.0)), n)
    smooth = np.sum(weights * (f(nodes) - fz) / (nodes + z))
    log_term = np.log((1.0 + z) / (1.0 - z)) + 1j * np.pi
    return complex(smooth + fz * log_term)


def filon_exp(f, omega, n_panels=512):
    """int_{-1}^{1} f(u) exp(i*omega*u) du for an array of frequencies.

    On each panel the amplitude is replaced by its cubic interpolant at the
    four Gauss points, expanded in Legendre polynomials, and integrated
    exactly with int P_n(x) e^{i theta x} dx = 2 i^n j_n(theta).
    """
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    b = np.linspace(-1.0, 1.0, n_panels + 1)
    h = b[1] - b[0]
    mid = 0.5 * (b[1:] + b[:-1])
    x4, w4 = gauss_legendre(4)
    vals = f(mid[:, None] + 0.5 * h * x4[None, :])
    leg = np.array([special.eval_legendre(m, x4) for m in range(4)])
    coef = (np.arange(4)[:, None] + 0.5) * (leg * w4[None, :]) @ vals.T  # (4, panels)
    theta = 0.5 * h * omega
    jn = np.array([special.spherical_jn(m, theta) for m in range(4)])  # (4, n_omega)
    ipow = np.array([1.0, 1j, -1.0, -1j])
    moments = 2.0 * ipow[:, None] * jn  # (4, n_omega)
    panel = moments.T @ coef  # (n_omega, panels)
    phase = np.exp(1j * omega[:, None] * mid[None, :])
    return 0.5 * h * np.sum(panel * phase, axis=1)
