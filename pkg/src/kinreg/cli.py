"""Batch command line front end.

Subcommands run the verification suites and experiments and emit
deterministic JSON (and optionally CSV) reports: identical (config, seed)
pairs produce byte-identical files. Exit codes: 0 all checks passed,
1 at least one FAIL, 2 invalid configuration.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .geometry import KineticPoint
from .liouville import HalfSpaceRHS, classify, verify_solution
from .polynomials import KineticPolynomial, full_space, tricomi_augmented_space
from .probe import exponent_fit, best_approx_error, gamma0_tricomi_coefficient
from .solver import (
    BoundaryCondition,
    Field,
    HalfStripGrid,
    SolverOptions,
    solve_stationary,
)
from .tricomi import TricomiParams, as_field, cusp_ratio, eval_tricomi, pde_residual, residual_constant
from . import flatten as _flatten

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2


def _seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    return int(os.environ.get("KRL_SEED", "0"))


def _emit(report: dict, out: str | None):
    text = json.dumps(report, sort_keys=True, indent=2)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _status(report: dict) -> int:
    def walk(node):
        if isinstance(node, dict):
            for k, v in node.items():
                if k == "pass" and v is False:
                    yield False
                else:
                    yield from walk(v)
        elif isinstance(node, list):
            for v in node:
                yield from walk(v)

    return EXIT_FAIL if any(ok is False for ok in walk(report)) else EXIT_OK


# ---------------------------------------------------------------------------
# tricomi-verify
# ---------------------------------------------------------------------------


def run_tricomi_verify(args) -> int:
    if args.A <= 0:
        print("error: --A must be positive", file=sys.stderr)
        return EXIT_CONFIG
    try:
        params = TricomiParams(A=args.A, lam=args.lam)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    rng = np.random.RandomState(_seed(args))

    hom_worst = 0.0
    for _ in range(50):
        x, v = rng.uniform(0.05, 2.0), rng.uniform(-1.5, 1.5)
        r = 10.0 ** rng.uniform(-2, 2)
        base = eval_tricomi(params, x, v)
        scaled = eval_tricomi(params, r ** 3 * x, r * v)
        hom_worst = max(hom_worst, abs(scaled - r ** params.homogeneity * base)
                        / (1.0 + r ** params.homogeneity * abs(base)))
    hom_ok = hom_worst <= 1e-10

    want = residual_constant(params)
    consts = []
    for x in np.linspace(0.1, 2.0, 20):
        for v in np.linspace(0.4, 1.5, 10):
            for sv in (v, -v):
                consts.append(pde_residual(params, float(x), float(sv)) / sv ** params.lam)
    consts = np.array(consts)
    resid_rel = float(np.max(np.abs(consts - want)) / abs(want))
    resid_ok = resid_rel <= 1e-3

    ratios = [cusp_ratio(params, x) for x in (1e-6, 1e-3, 1.0)]
    cusp_rel = max(abs(r0 - ratios[0]) for r0 in ratios) / abs(ratios[0])
    cusp_ok = cusp_rel <= 1e-10

    gaps = [abs(eval_tricomi(params, x, 1.0) - eval_tricomi(params, x, -1.0))
            for x in (1e-2, 1e-3, 1e-4)]
    even_ok = gaps[0] > gaps[1] > gaps[2]

    report = {
        "A": args.A,
        "lam": args.lam,
        "homogeneity": {"worst_rel": hom_worst, "pass": bool(hom_ok)},
        "residual_span": {"constant": float(np.mean(consts)), "expected": want,
                          "worst_rel": resid_rel, "pass": bool(resid_ok)},
        "cusp_ratio": {"value": ratios[0], "worst_rel": cusp_rel, "pass": bool(cusp_ok)},
        "boundary_evenness": {"gaps": gaps, "pass": bool(even_ok)},
    }
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write("x,v,tricomi,residual,cusp_ratio\n")
            for x in np.linspace(0.1, 2.0, 16):
                for v in np.linspace(-1.5, 1.5, 16):
                    fh.write(f"{x!r},{v!r},{eval_tricomi(params, x, v)!r},"
                             f"{pde_residual(params, float(x), float(v))!r},"
                             f"{cusp_ratio(params, float(x))!r}\n")
    _emit(report, args.out)
    return _status(report)


# ---------------------------------------------------------------------------
# liouville-classify
# ---------------------------------------------------------------------------


def run_liouville(args) -> int:
    if args.A <= 0:
        print("error: --A must be positive", file=sys.stderr)
        return EXIT_CONFIG
    try:
        with open(args.rhs) as fh:
            p = KineticPolynomial.from_json(fh.read())
        rhs = HalfSpaceRHS(p, args.A)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    res = classify(rhs)
    rep = verify_solution(res, rhs)
    report = {
        "A": args.A,
        "rhs": p.to_json_dict(),
        "is_polynomial": res.is_polynomial,
        "particular": res.particular.to_json_dict(),
        "tricomi_terms": [{"lam": lam, "m": m} for lam, m in res.tricomi_terms],
        "verification": {
            "pde_max_rel_residual": rep.pde_max_rel_residual,
            "trace_gap_rel": rep.trace_gap_rel,
            "growth_constant": rep.growth_constant,
            "pass": rep.passed,
            "notes": rep.notes,
        },
    }
    _emit(report, args.out)
    return _status(report)


# ---------------------------------------------------------------------------
# solve-kfp
# ---------------------------------------------------------------------------


def _tricomi_problem(A: float, grid: HalfStripGrid, bc_mode: str):
    params = TricomiParams(A=A, lam=3)
    C = residual_constant(params)
    h = lambda x, v: C * v ** 3
    exact = lambda x, v: eval_tricomi(params, x, v)
    if bc_mode == "specular":
        bc = BoundaryCondition(at_x0="specular",
                               at_xmax=lambda t, v: exact(grid.x_max, v),
                               at_vmax=lambda t, x, v: exact(x, v))
    else:
        bc = BoundaryCondition(at_x0="inflow",
                               inflow_profile=lambda t, v: exact(0.0, v),
                               at_xmax=lambda t, v: exact(grid.x_max, v),
                               at_vmax=lambda t, x, v: exact(x, v))
    return h, bc, exact


def run_solver(args) -> int:
    if args.A <= 0 or args.nx < 16 or args.nv < 16:
        print("error: need A > 0 and nx, nv >= 16", file=sys.stderr)
        return EXIT_CONFIG
    report = {"A": args.A, "bc": args.bc, "source": args.source}
    sizes = [args.nx] if not args.convergence else [int(s) for s in args.convergence.split(",")]
    rows = []
    last_field = None
    for n in sizes:
        grid = HalfStripGrid(x_max=args.x_max, v_max=args.v_max, nx=n, nv=n)
        if args.source == "tricomi":
            h, bc, exact = _tricomi_problem(args.A, grid, args.bc)
        elif args.source == "zero":
            h = lambda x, v: 0.0
            exact = None
            bc = BoundaryCondition(at_x0=args.bc,
                                   inflow_profile=(lambda t, v: 0.0) if args.bc == "inflow" else None,
                                   at_xmax=lambda t, v: 0.0,
                                   at_vmax=lambda t, x, v: 0.0)
        elif args.source.startswith("file:"):
            try:
                src_field = Field.from_binary(args.source[5:])
            except (OSError, ValueError) as exc:
                print(f"error: {exc}", file=sys.stderr)
                return EXIT_CONFIG
            spline = src_field.interpolator(kind=1)
            h = lambda x, v: float(spline(x, v)[0, 0])
            exact = None
            bc = BoundaryCondition(at_x0=args.bc,
                                   inflow_profile=(lambda t, v: 0.0) if args.bc == "inflow" else None,
                                   at_xmax=lambda t, v: 0.0,
                                   at_vmax=lambda t, x, v: 0.0)
        else:
            print(f"error: unknown source {args.source!r}", file=sys.stderr)
            return EXIT_CONFIG
        fld = solve_stationary(h, bc, args.A, grid, SolverOptions(tol=args.tol))
        last_field = fld
        row = {"n": n, "sweeps": fld.metadata["sweeps"]}
        if exact is not None:
            ex = np.array([[exact(x, v) for v in grid.vs] for x in grid.xs])
            row["max_error"] = float(np.max(np.abs(fld.values - ex)))
        rows.append(row)
    report["runs"] = rows
    if len(rows) > 1 and "max_error" in rows[0]:
        orders = [math.log2(rows[i]["max_error"] / rows[i + 1]["max_error"])
                  for i in range(len(rows) - 1)]
        report["orders"] = orders
        report["pass"] = bool(all(o >= 1.0 for o in orders)
                              and all(rows[i]["max_error"] > rows[i + 1]["max_error"]
                                      for i in range(len(rows) - 1)))
    if args.out and last_field is not None:
        last_field.to_csv(args.out + ".csv")
        last_field.to_binary(args.out + ".kfp")
    _emit(report, (args.out + ".json") if args.out else None)
    return _status(report)


# ---------------------------------------------------------------------------
# probe-exponent
# ---------------------------------------------------------------------------


_SPACES = {
    "p3": lambda A: full_space(3, 1),
    "p4": lambda A: full_space(4, 1),
    "p5": lambda A: full_space(5, 1),
    "p5+tricomi": lambda A: tricomi_augmented_space(A, 1),
}


def run_probe(args) -> int:
    if args.space not in _SPACES:
        print(f"error: unknown space {args.space!r}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        t0, x0, v0 = (float(c) for c in args.z0.split(","))
        radii = [float(r) for r in args.radii.split(",")]
    except ValueError:
        print("error: bad --z0 or --radii", file=sys.stderr)
        return EXIT_CONFIG
    z0 = KineticPoint(t0, x0, v0)
    if args.field == "builtin:tricomi":
        f = as_field(TricomiParams(A=args.A, lam=3))
    else:
        try:
            fld = Field.from_binary(args.field)
        except (OSError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        spline = fld.interpolator()
        f = lambda z: float(spline(z.x[0], z.v[0])[0, 0])
    spec = _SPACES[args.space](args.A)
    report = {"field": args.field, "space": args.space, "z0": [t0, x0, v0]}
    if len(set(radii)) >= 4:
        fit = exponent_fit(f, z0, spec, radii, seed=_seed(args))
        report.update(radii=list(fit.radii), errors=list(fit.errors),
                      slope=fit.slope if math.isfinite(fit.slope) else "exact-fit",
                      r_squared=fit.r_squared)
    else:
        rs = sorted(set(radii), reverse=True)
        errs = [best_approx_error(f, z0, r, spec, seed=_seed(args)) for r in rs]
        report.update(radii=rs, errors=errs, slope=None)
    if args.space == "p5+tricomi" or args.tau:
        if z0.x[0] == 0.0 and z0.v[0] == 0.0:
            rep = gamma0_tricomi_coefficient(f, z0, args.A, radii, seed=_seed(args))
            report["tau"] = rep.tau
            report["tau_stable"] = rep.stable
    _emit(report, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# counterexample-check
# ---------------------------------------------------------------------------


def run_counterexample(args) -> int:
    if args.gamma == "builtin:parabola":
        dom = _flatten.parabola_domain(args.curvature)
    elif args.gamma == "builtin:flat":
        dom = _flatten.flat_domain()
    else:
        print(f"error: unknown domain {args.gamma!r}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        fvv = np.array(json.loads(args.f_hessian), dtype=float)
        if fvv.shape[0] != fvv.shape[1]:
            raise ValueError("hessian must be square")
    except (ValueError, TypeError) as exc:
        print(f"error: bad --f-hessian: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    fm = _flatten.build_flatten(dom)
    hess = fm.d2_phi(np.zeros(2))
    cond = _flatten.counterexample_condition(hess, fvv)
    gap = _flatten.reflection_commutation_check(fm, seed=_seed(args))
    report = {
        "domain": args.gamma,
        "lhs": cond["lhs"],
        "rhs": cond["rhs"],
        "violated": cond["violated"],
        "d2phi_mixed": float(hess[0][0, 1]),
        "reflection_commutation_gap": gap,
        "pass": bool(gap <= 1e-8),
    }
    _emit(report, args.out)
    return _status(report)


# ---------------------------------------------------------------------------
# suite
# ---------------------------------------------------------------------------


def run_suite(args) -> int:
    """Run every check at desk scale and write one combined report."""
    outdir = args.out or "."
    os.makedirs(outdir, exist_ok=True)
    combined = {}
    rc_all = EXIT_OK

    ns = argparse.Namespace(A=1.0, lam=3, csv=None, seed=_seed(args),
                            out=os.path.join(outdir, "tricomi_verify.json"))
    rc_all = max(rc_all, run_tricomi_verify(ns))
    combined["tricomi_verify"] = json.load(open(ns.out))

    rhs_path = os.path.join(outdir, "rhs_v3.json")
    with open(rhs_path, "w") as fh:
        fh.write(KineticPolynomial.monomial(1, 1, bv=(3,)).to_json())
    ns = argparse.Namespace(A=1.0, rhs=rhs_path, seed=_seed(args),
                            out=os.path.join(outdir, "liouville_v3.json"))
    rc_all = max(rc_all, run_liouville(ns))
    combined["liouville_v3"] = json.load(open(ns.out))

    ns = argparse.Namespace(A=1.0, nx=64, nv=64, bc="specular", source="tricomi",
                            convergence="32,64", x_max=1.0, v_max=1.0, tol=1e-10,
                            seed=_seed(args), out=os.path.join(outdir, "solver_tricomi"))
    rc_all = max(rc_all, run_solver(ns))
    combined["solver_tricomi"] = json.load(open(ns.out + ".json"))

    ns = argparse.Namespace(field="builtin:tricomi", space="p5", z0="0,0,0",
                            radii="1,0.5,0.25,0.125", A=1.0, tau=False,
                            seed=_seed(args), out=os.path.join(outdir, "probe_p5.json"))
    rc_all = max(rc_all, run_probe(ns))
    combined["probe_p5"] = json.load(open(ns.out))

    ns = argparse.Namespace(gamma="builtin:parabola", curvature=1.0,
                            f_hessian="[[2,0],[0,-2]]", seed=_seed(args),
                            out=os.path.join(outdir, "counterexample.json"))
    rc_all = max(rc_all, run_counterexample(ns))
    combined["counterexample"] = json.load(open(ns.out))

    _emit(combined, os.path.join(outdir, "suite.json"))
    return rc_all


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kinreg",
                                 description="kinetic boundary-regularity laboratory")
    ap.add_argument("--seed", type=int, default=None,
                    help="sampler seed (default: KRL_SEED env var or 0)")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("tricomi-verify", help="verify the obstruction function")
    p.add_argument("--A", type=float, default=1.0)
    p.add_argument("--lam", type=int, default=3)
    p.add_argument("--csv", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=run_tricomi_verify)

    p = sub.add_parser("liouville-classify", help="classify a half-space right-hand side")
    p.add_argument("--rhs", required=True, help="polynomial JSON file")
    p.add_argument("--A", type=float, default=1.0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=run_liouville)

    p = sub.add_parser("solve-kfp", help="stationary half-strip solve")
    p.add_argument("--nx", type=int, default=64)
    p.add_argument("--nv", type=int, default=64)
    p.add_argument("--A", type=float, default=1.0)
    p.add_argument("--bc", choices=("specular", "inflow"), default="specular")
    p.add_argument("--source", default="tricomi", help="tricomi | zero | file:<path.kfp>")
    p.add_argument("--x-max", type=float, default=1.0)
    p.add_argument("--v-max", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--convergence", default=None, help="comma list of grid sizes")
    p.add_argument("--out", default=None, help="output prefix (.json/.csv/.kfp)")
    p.set_defaults(func=run_solver)

    p = sub.add_parser("probe-exponent", help="best-approximation exponent fit")
    p.add_argument("--field", default="builtin:tricomi")
    p.add_argument("--z0", default="0,0,0")
    p.add_argument("--space", default="p5")
    p.add_argument("--radii", default="1,0.5,0.25,0.125")
    p.add_argument("--A", type=float, default=1.0)
    p.add_argument("--tau", action="store_true", help="also extract the Tricomi coefficient")
    p.add_argument("--out", default=None)
    p.set_defaults(func=run_probe)

    p = sub.add_parser("counterexample-check", help="curvature obstruction test")
    p.add_argument("--gamma", default="builtin:parabola")
    p.add_argument("--curvature", type=float, default=1.0)
    p.add_argument("--f-hessian", dest="f_hessian", default="[[2,0],[0,-2]]")
    p.add_argument("--out", default=None)
    p.set_defaults(func=run_counterexample)

    p = sub.add_parser("suite", help="run every verification at desk scale")
    p.add_argument("--out", default=None, help="output directory")
    p.set_defaults(func=run_suite)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # structured failure surface for batch use
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
