"""The twelve acceptance checks, shared by the ``report`` command and the test suite.

Each check returns a ``CheckResult`` with the measured quantities, the
thresholds, the runtime and its budget. A check passes when every measured
quantity meets its threshold and the runtime stays within budget.
"""
from dataclasses import dataclass, field
import time
import warnings

import numpy as np

from . import dispersion as dsp
from . import equilibrium as eqm
from . import green as grn
from . import kernels as ker
from . import solver as slv


@dataclass
class CheckResult:
    id: int
    name: str
    passed: bool
    runtime_s: float
    budget_s: float
    details: dict = field(default_factory=dict)

    def line(self):
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.id:2d} {self.name} ({self.runtime_s:.1f}s / {self.budget_s:.0f}s)"

    def to_dict(self):
        return {"id": self.id, "name": self.name, "passed": bool(self.passed),
                "runtime_s": round(self.runtime_s, 3), "budget_s": self.budget_s,
                "details": _jsonable(self.details)}


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v) if np.isfinite(v) else str(v)
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


def _builtins():
    return {"maxwellian": eqm.maxwellian(), "powerlaw_M4": eqm.powerlaw(4.0)}


# ---------------------------------------------------------------- 1

def check_tau0_routes():
    spreads = {}
    for n0 in (0.5, 1.0, 2.0):
        for name, eq in (("maxwellian", eqm.maxwellian(n0)), ("powerlaw_M4", eqm.powerlaw(4.0, n0))):
            r = eqm.tau0_sq_routes(eq)
            spreads[f"{name}_n0={n0}"] = (max(r) - min(r)) / abs(r[0])
    worst = max(spreads.values())
    return worst <= 1e-8, {"max_relative_spread": worst, "threshold": 1e-8, "spreads": spreads}


# ---------------------------------------------------------------- 2

def check_closed_kernels():
    u = np.linspace(-0.999, 0.999, 401)
    errs = {}
    for name, eq in _builtins().items():
        for kname, quadf, closed in (("kappa", ker.kappa_quad, eq.kappa_closed),
                                     ("q", ker.q_quad, eq.q_closed)):
            a, b = quadf(eq, u), closed(u)
            errs[f"{name}_{kname}"] = float(np.max(np.abs(a - b) / np.abs(b)))
    worst = max(errs.values())
    return worst <= 1e-8, {"max_relative_error": worst, "threshold": 1e-8, "errors": errs}


# ---------------------------------------------------------------- 3

def check_electric_branch():
    eq = eqm.maxwellian()
    c = eq.constants
    ks = np.linspace(0.0, c.kappa0, 64)
    tau = np.array([dsp.tau_star(eq, k) for k in ks])
    resid = max(abs(dsp.D_eval(eq, 1j * t, k)) for k, t in zip(ks[1:], tau[1:]))
    end0 = abs(tau[0] - c.tau0)
    end1 = abs(tau[-1] - c.kappa0)
    monotone = bool(np.all(np.diff(tau) > 0))
    inner = slice(1, -1)
    b1 = bool(np.all((c.tau0 < tau[inner]) & (tau[inner] < c.kappa0)))
    b2 = bool(np.all((ks[inner] < tau[inner]) & (tau[inner] < np.sqrt(c.tau0_sq + ks[inner] ** 2))))
    # tau_* - (tau0 + tau1^2 k^2 / (2 tau0^3)) = O(k^4)
    ksmall = np.geomspace(2e-3, 2e-2, 8)
    dev = np.array([abs(dsp.tau_star(eq, k) - c.tau0 - c.tau1_sq * k * k / (2 * c.tau0 ** 3)) for k in ksmall])
    slope = float(np.polyfit(np.log(ksmall), np.log(dev), 1)[0])
    ok = resid <= 1e-10 and end0 <= 1e-8 and end1 <= 1e-8 and monotone and b1 and b2 and abs(slope - 4) <= 0.2
    return ok, {"max_residual": resid, "tau_star_0_error": end0, "tau_star_kappa0_error": end1,
                "strictly_increasing": monotone, "bounds_tau0_kappa0": b1, "bounds_k_sqrt": b2,
                "small_k_slope": slope}


# ---------------------------------------------------------------- 4

def check_continuation():
    details = {}
    ok = True
    for name, eq in _builtins().items():
        c = eq.constants
        delta = dsp.default_delta(eq)
        ks = c.kappa0 + delta * np.linspace(0.05, 1.0, 20)
        lam = dsp.lambda_elec_many(eq, ks, delta)
        neg = bool(np.all(lam.real < 0))
        eps = 1e-7
        jump = abs(dsp.lambda_elec(eq, c.kappa0 + eps, delta) - dsp.lambda_elec(eq, c.kappa0 - eps, delta))
        details[name] = {"re_lambda_negative": neg, "max_re_lambda": float(lam.real.max()),
                         "continuity_gap": jump}
        ok &= neg and jump <= 1e-6
        if name == "maxwellian":
            sel = ks - c.kappa0 >= 0.3 * delta
            slope = float(np.polyfit(np.log(ks[sel] - c.kappa0), np.log(-lam.real[sel]), 1)[0])
            details[name]["near_threshold_slope"] = slope
            ok &= slope >= 4
    return ok, details


# ---------------------------------------------------------------- 5

def check_magnetic_branch():
    eq = eqm.maxwellian()
    c = eq.constants
    ks = np.linspace(0.0, 50.0, 101)
    resid = max(dsp.x_star_residual(eq, k) for k in ks)
    nu = np.array([dsp.nu_star(eq, k) for k in ks])
    d1 = np.array([dsp.nu_star_prime(eq, k) for k in ks[1:]])
    d2 = np.array([dsp.nu_star_second(eq, k) for k in ks])
    kb = np.sqrt(1 + ks ** 2)
    r0, r1, r2 = nu / kb, d1 * kb[1:] / ks[1:], d2 * kb ** 3
    env = {"nu_over_<k>": (float(r0.min()), float(r0.max())),
           "nu'_<k>/k": (float(r1.min()), float(r1.max())),
           "nu''_<k>^3": (float(r2.min()), float(r2.max())),
           "nu''_max": float(d2.max())}
    finite = all(lo > 0 and np.isfinite(hi) for lo, hi in list(env.values())[:3])
    above = bool(np.all(nu[1:] > ks[1:]))
    e0 = abs(nu[0] - c.tau0)
    ok = resid <= 1e-12 and above and finite and e0 <= 1e-10
    return ok, {"max_fixed_point_residual": resid, "nu_above_k": above, "nu_0_error": e0, "envelopes": env}


# ---------------------------------------------------------------- 6

RECTANGLES = [(1e-3, 1.0, -2.0, 2.0), (1e-3, 0.5, 0.3, 1.5), (0.01, 3.0, -10.0, 10.0),
              (0.1, 0.2, 0.0, 1.0), (1e-3, 5.0, -1.0, 1.0), (0.05, 2.0, 0.5, 3.0),
              (0.01, 0.1, -0.5, 0.5), (0.5, 4.0, -6.0, -1.0), (1e-3, 20.0, -30.0, 30.0),
              (2.0, 10.0, -5.0, 5.0)]


def check_stability():
    counts = {}
    for name, eq in _builtins().items():
        for k in (0.3, 1.0, 5.0):
            for which in ("D", "M"):
                w = [dsp.stability_winding(eq, k, r, which) for r in RECTANGLES]
                counts[f"{name}_k={k}_{which}"] = w
    ok = all(all(v == 0 for v in w) for w in counts.values())
    return ok, {"nonzero": {k: w for k, w in counts.items() if any(w)}, "n_contours": 10 * len(counts)}


# ---------------------------------------------------------------- 7

def check_residues():
    eq = eqm.maxwellian()
    c = eq.constants
    a_small = grn.residue_a(eq, 1e-3)[0]
    e_lim = abs(a_small - 0.5j * c.tau0)
    a_closed = grn.residue_a(eq, 0.3)[0]
    a_fd = grn.residue_a(eq, 0.3, route="fd")[0]
    e_a = abs(a_closed - a_fd)
    e_b = 0.0
    for k in (0.05, 0.3, 1.0, 3.0, 10.0):
        e_b = max(e_b, abs(grn.residue_b(eq, k)[0] - grn.residue_b(eq, k, route="fd")[0]))
    ks = np.geomspace(0.05, 20.0, 30)
    env = np.array([abs(grn.residue_b(eq, k)[0]) * np.sqrt(1 + k * k) for k in ks])
    ok = e_lim <= 1e-4 and e_a <= 1e-8 and e_b <= 1e-7 and env.min() >= 0.2 and env.max() <= 5
    return ok, {"a_plus_small_k_error": e_lim, "a_route_gap_k0.3": e_a, "b_route_gap_max": e_b,
                "b_envelope": (float(env.min()), float(env.max()))}


# ---------------------------------------------------------------- 8

def check_bromwich():
    eq = eqm.maxwellian()
    worst = 0.0
    table = {}
    for k in (0.3, 1.0, 3.0):
        grid = grn.TimeGrid(2e-3, 5000)
        G = grn.resolvent_G(eq, k, grid, with_residues=False).values
        H = grn.greens_H(eq, k, grid, with_residues=False).values
        for t in (1.0, 5.0, 10.0):
            i = int(round(t / grid.dt))
            eg = abs(G[i] - grn.bromwich_invert(eq, "G", k, t))
            eh = abs(H[i] - grn.bromwich_invert(eq, "H", k, t))
            table[f"k={k},t={t}"] = (eg, eh)
            worst = max(worst, eg, eh)
    return worst <= 1e-4, {"max_gap": worst, "threshold": 1e-4, "gaps_G_H": table}


# ---------------------------------------------------------------- 9

def check_decay():
    eq = eqm.maxwellian()
    k = 0.5
    t_max = 600.0  # k t_max = 300
    ts = np.linspace(0.25 * t_max, t_max, 181)
    reg = grn.regular_part_spectral(eq, "G", k, ts)
    fit = grn.fit_decay(reg, ts, k, "kt")
    s = np.linspace(0.5, 5.0, 19)
    curves = {}
    for kk in (0.05, 0.08, 0.12):
        r = grn.regular_part_spectral(eq, "H", kk, s / kk ** 3)
        curves[kk] = np.log(np.abs(r) / kk)
    keys = list(curves)
    dist = max(float(np.max(np.abs(curves[a] - curves[b]))) for i, a in enumerate(keys) for b in keys[i + 1:])
    ok = fit["slope"] <= -3 and dist <= 0.5
    return ok, {"electric_slope_kt": fit["slope"], "electric_fit_r2": fit["r2"],
                "electric_window": fit["window"], "magnetic_k3t_sup_log_distance": dist}


# ---------------------------------------------------------------- 10

def check_oracles():
    eq = eqm.maxwellian()
    c = eq.constants
    gaps, peaks = {}, {}
    ok = True
    for k in (0.3, 0.8, 2.0):
        data = slv.ModeInitialData(k, slv.profile(eq, "kappa"), slv.profile(eq, "q"), A0=1.0, A1=0.5)
        grid = grn.TimeGrid(5e-3, 10000)
        out = slv.compare_with_oracle(eq, data, grid, t_cap=50.0)
        gaps[f"k={k}"] = (out.discrepancy["rho_oracle"], out.discrepancy["A_oracle"])
        ok &= max(gaps[f"k={k}"]) <= 1e-3
        # spectral peaks on a longer resolvent-route trace
        long = grn.TimeGrid(0.02, 20000)
        A = slv.solve_A_mode(eq, data, long).A
        wA, bin_w = slv.spectral_peak(A, long.dt)
        entry = {"A_peak": wA, "nu_star": dsp.nu_star(eq, k), "bin": bin_w}
        ok &= abs(wA - entry["nu_star"]) <= bin_w
        if k <= c.kappa0:
            rho = slv.solve_phi_mode(eq, data, long).rho
            wr, _ = slv.spectral_peak(rho, long.dt)
            entry.update(rho_peak=wr, tau_star=dsp.tau_star(eq, k))
            ok &= abs(wr - entry["tau_star"]) <= bin_w
        peaks[f"k={k}"] = entry
    return ok, {"sup_gaps_rho_A": gaps, "peaks": peaks}


# ---------------------------------------------------------------- 11

def check_free_transport():
    eq = eqm.maxwellian()
    data = slv.SeparableData(eq.phi, 1.0)
    ts = np.linspace(5.0, 50.0, 10)
    scaled = []
    for t in ts:
        R = np.linspace(0.0, t + 4.0, 160)
        scaled.append(float(np.max(slv.physical_S(data, t, R))) * t ** 3)
    scaled = np.array(scaled)
    masses = [slv.physical_mass(data, t) for t in (0.0, 5.0, 20.0, 50.0)]
    drift = max(abs(m - masses[0]) for m in masses)
    ok = scaled.min() > 0 and scaled.max() / scaled.min() <= 10 and drift <= 1e-6
    return ok, {"sup_S_t3_range": (float(scaled.min()), float(scaled.max())), "mass_drift": drift}


# ---------------------------------------------------------------- 12

def check_convergence():
    eq = eqm.maxwellian()
    k, t_max = 0.5, 5.0
    dts = (2e-3, 1e-3, 5e-4)
    data = slv.ModeInitialData(k, slv.profile(eq, "kappa"), slv.profile(eq, "q"), A0=1.0, A1=0.5)
    res = {"resolvent_G": [], "greens_H": [], "forced_volterra": [], "forced_oscillator": [],
           "kinetic_oracle_elec": [], "kinetic_oracle_mag": []}
    prev = {}
    for dt in dts:
        grid = grn.TimeGrid(dt, int(round(t_max / dt)))
        g = grn.resolvent_G(eq, k, grid, with_residues=False)
        h = grn.greens_H(eq, k, grid, with_residues=False)
        res["resolvent_G"].append(grn.volterra_residual(g))
        res["greens_H"].append(grn.memory_ode_residual(h))
        S = slv.source_S(data, grid.t)
        Sj = slv.source_Sj(data, grid.t)
        y = grn.solve_volterra(g.meta["kernel"], S, dt)
        res["forced_volterra"].append(grn.volterra_residual_arrays(g.meta["kernel"], y, S, dt))
        A, _ = grn.solve_memory_oscillator(h.meta["kernel"], h.meta["omega2"], dt, 1.0, 0.5, Sj)
        res["forced_oscillator"].append(grn.oscillator_residual_arrays(
            h.meta["kernel"], h.meta["omega2"], A, dt, 1.0, 0.5, Sj))
        # oracle: self-convergence against the next refinement, on the coarse grid
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            rho_o, _ = slv.kinetic_oracle_elec(eq, data, grid)
            A_o, _ = slv.kinetic_oracle_mag(eq, data, grid)
        for key, arr in (("kinetic_oracle_elec", rho_o), ("kinetic_oracle_mag", A_o)):
            if key in prev:
                coarse = prev[key]
                res[key].append(float(np.max(np.abs(coarse - arr[::2]))))
            prev[key] = arr
    ratios = {k_: [a / b for a, b in zip(v[:-1], v[1:])] for k_, v in res.items()}
    ok = all(3.2 <= r <= 4.8 for v in ratios.values() for r in v)
    return ok, {"residuals": res, "ratios": ratios, "accepted": (3.2, 4.8)}


CRITERIA = [
    (1, "tau0^2 three-route consistency", check_tau0_routes, 5.0),
    (2, "closed-form kernel checks", check_closed_kernels, 5.0),
    (3, "electric dispersion relation", check_electric_branch, 30.0),
    (4, "continuation past kappa0", check_continuation, 30.0),
    (5, "magnetic dispersion relation", check_magnetic_branch, 10.0),
    (6, "spectral stability winding numbers", check_stability, 60.0),
    (7, "Green-function residues", check_residues, 30.0),
    (8, "time stepping vs Bromwich inversion", check_bromwich, 120.0),
    (9, "decay scalings of regular parts", check_decay, 300.0),
    (10, "oracle equivalence and spectral peaks", check_oracles, 300.0),
    (11, "free transport dispersion and mass", check_free_transport, 120.0),
    (12, "order-2 scheme convergence", check_convergence, 120.0),
]


def run_criterion(cid):
    for i, name, fn, budget in CRITERIA:
        if i == cid:
            t0 = time.perf_counter()
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                ok, details = fn()
            dt = time.perf_counter() - t0
            return CheckResult(i, name, bool(ok) and dt <= budget, dt, budget, details)
    raise KeyError(f"no acceptance criterion {cid}")


def run_all(ids=None):
    ids = [c[0] for c in CRITERIA] if ids is None else list(ids)
    return [run_criterion(i) for i in ids]
