"""Command line entry point ``vm-landau``.

Exit codes: 0 success, 1 acceptance report with failing checks,
2 invalid input, 3 numerical convergence failure.
"""
import argparse
import csv
import datetime
import json
import os
import platform
import sys
from importlib import resources

import jsonschema
import numpy as np
import scipy

from . import __version__
from . import acceptance as acc
from . import dispersion as dsp
from . import equilibrium as eqm
from . import green as grn
from . import kernels as ker
from . import solver as slv
from .errors import ConvergenceError, ValidationError

TOLERANCES = {"quadrature_rtol": 1e-12, "three_route_rtol": eqm.THREE_ROUTE_RTOL,
              "root_residual": 1e-10, "route_agreement": slv.ROUTE_TOL}


def _schema(name):
    return json.loads(resources.files("vm_landau").joinpath("schemas", name).read_text())


def load_equilibrium(arg):
    """Build an Equilibrium from a JSON config path or a built-in name."""
    if arg in ("maxwellian", "powerlaw") and not os.path.exists(arg):
        cfg = {"kind": arg} if arg == "maxwellian" else {"kind": "powerlaw", "M": 4.0}
        base = "."
    else:
        try:
            with open(arg) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read equilibrium config {arg}: {exc}") from None
        base = os.path.dirname(os.path.abspath(arg))
    try:
        jsonschema.validate(cfg, _schema("config.schema.json"))
    except jsonschema.ValidationError as exc:
        raise ValidationError(f"config does not match schema: {exc.message}") from None
    cfg = dict(cfg)
    table_path = cfg.pop("table_path", None)
    if table_path is not None:
        path = table_path if os.path.isabs(table_path) else os.path.join(base, table_path)
        try:
            tab = np.genfromtxt(path, delimiter=",", names=True)
            cfg["table"] = (tuple(tab["s"]), tuple(tab["phi"]))
        except (OSError, ValueError) as exc:
            raise ValidationError(f"cannot read table {path} (need columns s,phi): {exc}") from None
    return eqm.build_equilibrium(eqm.EquilibriumSpec(**cfg))


def metadata(command, eq, params):
    return {
        "command": command,
        "equilibrium": {k: v for k, v in eq.spec.to_dict().items() if k != "table"},
        "equilibrium_hash": eq.spec.digest(),
        "tolerances": TOLERANCES,
        "versions": {"vm_landau": __version__, "numpy": np.__version__,
                     "scipy": scipy.__version__, "python": platform.python_version()},
        "parameters": params,
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds"),
    }


def emit_json(doc, path=None):
    jsonschema.validate(doc, _schema("output.schema.json"))
    text = json.dumps(doc, indent=2, sort_keys=True)
    if path in (None, "-"):
        sys.stdout.write(text + "\n")
    else:
        with _open_out(path) as fh:
            fh.write(text + "\n")


def _open_out(path):
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    return open(path, "w", newline="")


def write_csv(path, header, columns):
    rows = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    fh = sys.stdout if path in (None, "-") else _open_out(path)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([f"{x:.17g}" for x in row])
    finally:
        if fh is not sys.stdout:
            fh.close()


def _constants_dict(eq):
    c = eq.constants
    return {"tau0_sq": c.tau0_sq, "tau1_sq": c.tau1_sq, "kappa0_sq": c.kappa0_sq,
            "kappa0": c.kappa0, "q0_sq": c.q0_sq}


# ---------------------------------------------------------------- commands

def cmd_kernels(args):
    eq = load_equilibrium(args.equilibrium)
    if args.n < 2:
        raise ValidationError("--n must be at least 2")
    u = np.linspace(-args.umax, args.umax, args.n)
    if args.dump:
        write_csv(args.dump, ["u", "kappa", "q"], [u, ker.kappa(eq, u), ker.q_kernel(eq, u)])
    emit_json({"metadata": metadata("kernels", eq, {"n": args.n, "umax": args.umax}),
               "result": _constants_dict(eq)}, args.json)
    return 0


def cmd_dispersion(args):
    eq = load_equilibrium(args.equilibrium)
    if args.kmax <= 0 or args.n < 2:
        raise ValidationError("--kmax must be positive and --n at least 2")
    ks = np.linspace(0.0, args.kmax, args.n)
    curves = dsp.mode_curves(eq, ks, args.delta, args.threads)
    cols = [ks, curves.tau_star, curves.nu_star, curves.lambda_elec.real, curves.lambda_elec.imag,
            curves.a_plus.real, curves.a_plus.imag, curves.b_plus.real, curves.b_plus.imag]
    write_csv(args.out, ["k", "tau_star", "nu_star", "re_lambda", "im_lambda",
                         "re_a", "im_a", "re_b", "im_b"], cols)
    side = args.json or (args.out + ".json" if args.out not in (None, "-") else None)
    if side is not None:
        res = _constants_dict(eq)
        res["delta"] = curves.delta
        emit_json({"metadata": metadata("dispersion", eq, {"kmax": args.kmax, "n": args.n,
                                                            "delta": curves.delta}),
                   "result": res}, side)
    return 0


def cmd_green(args):
    eq = load_equilibrium(args.equilibrium)
    if args.tmax <= 0:
        raise ValidationError("--tmax must be positive")
    grid = grn.time_grid(eq, args.k, args.tmax, args.dt)
    header, cols, fits = ["t"], [grid.t], {}
    if args.which in ("G", "both"):
        g = grn.resolvent_G(eq, args.k, grid)
        header += ["re_G", "re_G_osc", "re_G_reg"]
        cols += [g.values.real, g.osc_part.real, g.regular_part.real]
        fits["G"] = _fit_or_none(g.regular_part, grid, args.k, "kt")
        fits["G"]["residues"] = [[a.real, a.imag] for a in g.residues]
    if args.which in ("H", "both"):
        h = grn.greens_H(eq, args.k, grid)
        header += ["re_H", "re_H_osc", "re_H_reg", "re_dH"]
        cols += [h.values.real, h.osc_part.real, h.regular_part.real, h.derivative.real]
        fits["H"] = _fit_or_none(h.regular_part, grid, args.k, "k3t" if args.k <= 0.15 else "kt")
        fits["H"]["residues"] = [[b.real, b.imag] for b in h.residues]
    write_csv(args.out, header, cols)
    if args.report is not None:
        emit_json({"metadata": metadata("green", eq, {"k": args.k, "tmax": grid.t_max, "dt": grid.dt,
                                                       "which": args.which}),
                   "result": fits}, args.report)
    return 0


def _fit_or_none(reg, grid, k, scaling):
    try:
        out = grn.fit_decay(reg, grid.t, k, scaling)
        out["scaling"] = scaling
        return out
    except ValidationError as exc:
        return {"scaling": scaling, "error": str(exc)}


def cmd_simulate(args):
    eq = load_equilibrium(args.equilibrium)
    data = slv.ModeInitialData(args.k, slv.profile(eq, args.profile), slv.profile(eq, args.mag_profile),
                               A0=args.A0, A1=args.A1)
    grid = grn.time_grid(eq, args.k, args.tmax, args.dt)
    sol = slv.compare_with_oracle(eq, data, grid, args.channel, args.nu)
    header, cols = ["t"], [grid.t]
    if sol.rho is not None:
        header += ["re_S", "re_rho", "re_rho_oracle", "abs_discrepancy"]
        cols += [sol.S.real, sol.rho.real, sol.oracle_rho.real, np.abs(sol.rho - sol.oracle_rho)]
    if sol.A is not None:
        header += ["re_A", "re_A_oracle", "abs_discrepancy_A"]
        cols += [sol.A.real, sol.oracle_A.real, np.abs(sol.A - sol.oracle_A)]
    write_csv(args.out, header, cols)
    if args.json is not None:
        emit_json({"metadata": metadata("simulate", eq, {"k": args.k, "tmax": grid.t_max, "dt": grid.dt,
                                                          "profile": args.profile, "channel": args.channel}),
                   "result": {"discrepancy": sol.discrepancy, "oracle": sol.meta}}, args.json)
    return 0


def cmd_report(args):
    eq = load_equilibrium(args.equilibrium)
    ids = None
    if args.criteria:
        try:
            ids = [int(s) for s in args.criteria.split(",")]
        except ValueError:
            raise ValidationError("--criteria takes a comma-separated list of integers") from None
        known = {c[0] for c in acc.CRITERIA}
        if not set(ids) <= known:
            raise ValidationError(f"unknown criteria {sorted(set(ids) - known)}")
    results = []
    for r in acc.run_all(ids):
        print(r.line(), file=sys.stderr)
        results.append(r)
    doc = {"metadata": metadata("report", eq, {"criteria": ids or [c[0] for c in acc.CRITERIA]}),
           "result": {"criteria": [r.to_dict() for r in results],
                      "all_passed": all(r.passed for r in results)}}
    emit_json(doc, args.out)
    return 0 if doc["result"]["all_passed"] else 1


def build_parser():
    p = argparse.ArgumentParser(prog="vm-landau", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("--threads", type=int, default=None, help="worker threads (default: VM_LANDAU_THREADS or cores)")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, required=True):
        sp.add_argument("--equilibrium", required=required, default="maxwellian",
                        help="JSON config (kind, n0, M, table_path) or a built-in name")

    s = sub.add_parser("kernels", help="tabulate kappa(u), q(u) and the model constants")
    common(s)
    s.add_argument("--dump", help="CSV with columns u, kappa, q")
    s.add_argument("--n", type=int, default=201)
    s.add_argument("--umax", type=float, default=0.999)
    s.add_argument("--json", default="-", help="constants JSON (default stdout)")
    s.set_defaults(func=cmd_kernels)

    s = sub.add_parser("dispersion", help="root curves and residues on a k-grid")
    common(s)
    s.add_argument("--kmax", type=float, required=True)
    s.add_argument("--n", type=int, default=256)
    s.add_argument("--delta", type=float, default=None)
    s.add_argument("--out", default="-")
    s.add_argument("--json", default=None, help="sidecar path (default OUT.json)")
    s.set_defaults(func=cmd_dispersion)

    s = sub.add_parser("green", help="time-domain Green functions and their decomposition")
    common(s)
    s.add_argument("--k", type=float, required=True)
    s.add_argument("--tmax", type=float, required=True)
    s.add_argument("--dt", type=float, default=None)
    s.add_argument("--which", choices=("G", "H", "both"), default="both")
    s.add_argument("--out", default="-")
    s.add_argument("--report", nargs="?", const="-", default=None, help="JSON of decay fits")
    s.set_defaults(func=cmd_green)

    s = sub.add_parser("simulate", help="single-mode solution against the kinetic oracle")
    common(s)
    s.add_argument("--k", type=float, required=True)
    s.add_argument("--profile", choices=("kappa", "q", "gauss"), default="kappa")
    s.add_argument("--mag-profile", choices=("kappa", "q", "gauss"), default="q")
    s.add_argument("--A0", type=float, default=0.0)
    s.add_argument("--A1", type=float, default=0.0)
    s.add_argument("--tmax", type=float, required=True)
    s.add_argument("--dt", type=float, default=None)
    s.add_argument("--channel", choices=("elec", "mag", "both"), default="both")
    s.add_argument("--nu", type=int, default=slv.ORACLE_NODES, help="oracle velocity nodes")
    s.add_argument("--out", default="-")
    s.add_argument("--json", default=None)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("report", help="run the acceptance checks")
    common(s, required=False)
    s.add_argument("--criteria", default=None, help="comma-separated subset, e.g. 1,2,7")
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_report)
    return p


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.threads is not None:
        os.environ["VM_LANDAU_THREADS"] = str(args.threads)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"vm-landau: invalid input: {exc}", file=sys.stderr)
        return 2
    except ConvergenceError as exc:
        print(f"vm-landau: numerical failure: {exc}", file=sys.stderr)
        return 3


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
