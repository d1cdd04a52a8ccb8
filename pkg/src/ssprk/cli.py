"""Command-line front end.

Subcommands: ssp-radius, verify-order, convert, optimize, integrate,
converge, tvd-sweep, compare-dt, stability-region, catalog.  Exit codes:
0 success, 1 runtime failure, 2 validation failure (bad files, bad
arguments, failed order verification).
"""

import argparse
import json
import math
import os
import sys

import numpy as np

from . import order_conditions as oc
from .catalog import bundled_method_names, load_bundled
from .experiments import (run_convergence, run_predicted_vs_observed,
                          run_tvd_sweep, write_compare_csv, write_sidecar)
from .integrators import integrate
from .methodfile import MethodFileError, load_method, save_method
from .optimizer import (CoConstraints, ImexSearchOptions, SearchSpec,
                        co_optimize, optimize, optimize_imex)
from .problems import problem_catalog
from .ssp import ImexSspQuery, imex_is_feasible, imex_ssp_radius, \
    is_absolutely_monotonic, ssp_radius
from .stability import (StabilityGrid, boundary_csv, imaginary_axis_extent,
                        is_a_stable_sampled, real_axis_crossing,
                        region_boundary)
from .tableau import (ButcherTableau, ImexTableau, ShuOsherForm,
                      TableauError, butcher_to_canonical_shu_osher,
                      shu_osher_to_butcher)

__all__ = ["main"]


class ValidationFailure(Exception):
    """Commands raise this for exit code 2."""


def _load(path_or_name):
    if os.path.exists(path_or_name):
        return load_method(path_or_name)
    try:
        return load_bundled(path_or_name)
    except KeyError:
        raise ValidationFailure(
            f"no such file or bundled method: {path_or_name}")


def _as_rk(method):
    if isinstance(method, ShuOsherForm):
        return shu_osher_to_butcher(method)
    if isinstance(method, ButcherTableau):
        return method
    raise ValidationFailure("this command needs a single tableau, not an "
                            "additive pair")


def _out_file(args, name):
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        return os.path.join(args.out_dir, name)
    return name


def _parse_k(text):
    if text in ("inf", "Inf", "INF"):
        return math.inf
    try:
        value = float(text)
    except ValueError:
        raise ValidationFailure(f"bad K value {text!r}")
    if value <= 0:
        raise ValidationFailure("K must be positive")
    return value


def cmd_ssp_radius(args):
    method = _load(args.method)
    if isinstance(method, ImexTableau):
        k = _parse_k(args.imex_k) if args.imex_k else method.k_designed
        if k is None:
            raise ValidationFailure(
                "pair has no designed K; pass --imex-k")
        r = imex_ssp_radius(ImexSspQuery(method, k))
        cert = imex_is_feasible(ImexSspQuery(method, k),
                                r if math.isfinite(r) else 0.0)
        print(f"{r:.9f}")
        print(f"ratio K = {k}")
    else:
        t = _as_rk(method)
        r = ssp_radius(t)
        cert = is_absolutely_monotonic(t, r if math.isfinite(r) else 0.0)
        print(f"{r:.9f}")
    print(f"binding constraints at the certified radius: "
          f"{len(cert.binding)}")
    for name, i, j, value in cert.binding[:10]:
        loc = f"[{i}]" if j < 0 else f"[{i},{j}]"
        print(f"  {name}{loc} = {value:.3e}")
    return 0


def cmd_verify_order(args):
    method = _load(args.method)
    tol = args.tol
    if isinstance(method, ImexTableau):
        cset = oc.imex_linear_conditions(args.plin)
        pe = args.pe if args.pe else args.p
        pi = args.pi if args.pi else args.p
        if pe and pe >= 3 or (pi and pi >= 3):
            cset = cset + oc.imex_nonlinear_conditions(
                pe, pi, args.implicit_linear)
        report = oc.evaluate(cset, method, tol=tol)
        ok = (report.p_lin_attained >= args.plin
              and report.max_abs_residual() <= tol)
    else:
        t = _as_rk(method)
        cset = oc.rk_nonlinear_conditions(args.p)
        if args.plin > args.p:
            cset = cset + oc.rk_linear_conditions(args.plin)
        report = oc.evaluate(cset, t, tol=tol)
        ok = (report.p_attained >= args.p
              and report.p_lin_attained >= args.plin)
    csv_path = _out_file(args, "order-report.csv")
    report.to_csv(csv_path)
    worst = max(report.rows, key=lambda row: abs(row[1]))
    print(f"max |residual| = {report.max_abs_residual():.3e} "
          f"(worst: {worst[0].id}, order {worst[0].order})")
    print(f"attained: p = {report.p_attained}, "
          f"p_lin = {report.p_lin_attained} at tolerance {tol:g}")
    print(f"report written to {csv_path}")
    print("PASS" if ok else "FAIL")
    return 0 if ok else 1


def cmd_convert(args):
    method = _load(args.method)
    if args.to == "butcher":
        if isinstance(method, ButcherTableau):
            out = method
        else:
            out = shu_osher_to_butcher(method)
    else:
        t = _as_rk(method)
        r = args.r if args.r is not None else ssp_radius(t)
        if not math.isfinite(r):
            raise ValidationFailure("cannot build the canonical form at an "
                                    "unbounded radius; pass --r")
        out = butcher_to_canonical_shu_osher(t, r)
    path = args.output or _out_file(args, "converted.rk")
    save_method(out, path)
    print(f"wrote {path}")
    return 0


def _read_search_spec(path, seed_override=None, threads=1):
    keys = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ValidationFailure(
                        f"{path}:{lineno}: expected key=value, got {line!r}")
                key, _, value = line.partition("=")
                keys[key.strip()] = value.strip()
    except OSError as exc:
        raise ValidationFailure(f"cannot read spec file: {exc}")

    def pop_int(name, default=None):
        return int(keys.pop(name)) if name in keys else default

    def pop_flag(name):
        return keys.pop(name, "false").lower() in ("1", "true", "yes") \
            if name in keys else False

    try:
        s = int(keys.pop("s"))
    except KeyError:
        raise ValidationFailure("spec file needs s=")
    structure = keys.pop("structure", "explicit")
    p = pop_int("p", 2)
    p_lin = pop_int("p_lin")
    imex = None
    if "k" in keys or "pe" in keys or "pi" in keys:
        imex = ImexSearchOptions(
            p_e=pop_int("pe", p), p_i=pop_int("pi", p),
            k=_parse_k(keys.pop("k", "inf")),
            implicit_linear=pop_flag("implicit_linear"),
            allow_negative_implicit=pop_flag("allow_negative_implicit"))
    co = None
    if "min_real_axis" in keys or "min_imag_axis" in keys:
        co = CoConstraints(
            min_real_axis=float(keys.pop("min_real_axis", 0.0)),
            min_imag_axis=float(keys.pop("min_imag_axis", 0.0)))
    multistarts = pop_int("multistarts", 8)
    max_inner = pop_int("max_inner_iter", 400)
    seed = pop_int("seed", 0)
    if seed_override is not None:
        seed = seed_override
    if keys:
        raise ValidationFailure(f"unknown spec keys: {sorted(keys)}")
    return SearchSpec(s=s, structure=structure, p=p, p_lin=p_lin, imex=imex,
                      co_constraints=co, multistarts=multistarts,
                      max_inner_iter=max_inner, seed=seed, threads=threads)


def cmd_optimize(args):
    spec = _read_search_spec(args.spec, seed_override=args.seed,
                             threads=args.threads)
    if spec.co_constraints is not None:
        result = co_optimize(spec)
    elif spec.imex is not None:
        result = optimize_imex(spec)
    else:
        result = optimize(spec)
    method_path = args.output or _out_file(args, "optimized.rk")
    save_method(result.method, method_path)
    log_path = method_path + ".log.json"
    result.to_json(log_path)
    print(f"certified radius: {result.r:.6f}")
    print(f"max equality residual: {result.max_equality_residual:.3e}")
    print(f"termination: {result.termination}")
    if result.stability_metrics:
        print(f"stability metrics: {result.stability_metrics}")
    print(f"wrote {method_path} and {log_path}")
    return 0


def _get_problem(name):
    cat = problem_catalog()
    if name not in cat:
        raise ValidationFailure(
            f"unknown problem {name!r}; available: {sorted(cat)}")
    return cat[name]


def cmd_integrate(args):
    method = _load(args.method)
    problem = _get_problem(args.problem)
    traj = integrate(method, problem.system, problem.u0, args.dt,
                     args.t_final, snapshot_stride=args.stride)
    path = _out_file(args, "trajectory.csv")
    traj.to_csv(path)
    print(f"{len(traj.times)} snapshots -> {path}")
    return 0


def cmd_converge(args):
    method = _load(args.method)
    problem = _get_problem(args.problem)
    dts = [float(t) for t in args.dts.split(",")] if args.dts else None
    path = _out_file(args, f"converge-{args.problem}.csv")
    result = run_convergence(method, problem, dt_list=dts,
                             t_final=args.t_final, out_path=path)
    for dt, err in zip(result.dts, result.errors):
        print(f"dt={dt:.6e}  error={err:.6e}")
    print(f"fitted slope: {result.slope:.3f}")
    print(f"wrote {path}")
    return 0


def cmd_tvd_sweep(args):
    method = _load(args.method)
    problem = _get_problem(args.problem)
    path = _out_file(args, f"tvd-sweep-{args.problem}.csv")
    result = run_tvd_sweep(method, problem, n_steps=args.steps,
                           threshold=args.threshold, out_path=path)
    print(f"predicted lambda: {result.predicted_lambda:.12f}")
    if result.violated:
        print(f"observed lambda*: {result.lambda_star:.12f} "
              f"(bracket width {result.bracket_width:.1e})")
    else:
        print(f"no violation observed up to lambda = "
              f"{result.lambda_star:.6f}")
    print(f"wrote {path}")
    return 0


def cmd_compare_dt(args):
    methods = {}
    for spec in args.methods:
        method = _load(spec)
        if not isinstance(method, ImexTableau):
            raise ValidationFailure(f"{spec} is not an additive pair")
        name = method.name or os.path.basename(spec)
        methods[name] = method
    omegas = [float(w) for w in args.omegas.split(",")]
    problems = {w: _get_problem(f"example-4.2-w{w:g}") for w in omegas}
    baseline = _load(args.baseline) if args.baseline else None
    path = _out_file(args, "compare-dt.csv")
    rows = run_predicted_vs_observed(methods, problems, baseline=baseline,
                                     out_path=path)
    print(write_compare_csv(rows).rstrip())
    print(f"wrote {path}")
    return 0


def cmd_stability_region(args):
    method = _load(args.method)
    if isinstance(method, ImexTableau):
        tab = method.implicit_part
    else:
        tab = _as_rk(method)
    grid = StabilityGrid(args.re_min, args.re_max, args.im_min, args.im_max,
                         args.resolution, args.resolution)
    points = region_boundary(tab, grid)
    csv_path = _out_file(args, "stability-boundary.csv")
    boundary_csv(points, csv_path)
    metrics = {
        "real_crossing": real_axis_crossing(tab, tol=args.axis_tol),
        "imag_extent": imaginary_axis_extent(tab, proximity=args.proximity,
                                             tol=args.axis_tol),
        "a_stable_sampled": is_a_stable_sampled(tab),
    }
    json_path = _out_file(args, "stability-metrics.json")
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(metrics, fh, indent=2)
    print(json.dumps(metrics, indent=2))
    print(f"wrote {csv_path} and {json_path}")
    return 0


def cmd_catalog(args):
    print("bundled methods:")
    for name in bundled_method_names():
        method = load_bundled(name)
        if isinstance(method, ImexTableau):
            kind = f"imex pair, s={method.s}, K={method.k_designed}"
        elif isinstance(method, ShuOsherForm):
            kind = f"canonical form, s={method.s}, r={method.r:.4f}"
        else:
            kind = f"{method.structure}, s={method.s}"
        print(f"  {name:<28} {kind}")
    print("problems:")
    for name, problem in sorted(problem_catalog().items()):
        print(f"  {name:<28} n={problem.system.n}  {problem.description}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ssprk",
        description="Strong-stability-preserving Runge-Kutta toolbox")
    parser.add_argument("--seed", type=int, default=None,
                        help="override random seed where applicable")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--out-dir", default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ssp-radius", help="certified radius of a method")
    p.add_argument("method")
    p.add_argument("--imex-k", default=None,
                   help="forward-Euler ratio K for pairs ('inf' allowed)")
    p.set_defaults(func=cmd_ssp_radius)

    p = sub.add_parser("verify-order", help="order-condition residuals")
    p.add_argument("method")
    p.add_argument("--p", type=int, default=1)
    p.add_argument("--plin", type=int, default=1)
    p.add_argument("--pe", type=int, default=None)
    p.add_argument("--pi", type=int, default=None)
    p.add_argument("--implicit-linear", action="store_true")
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_verify_order)

    p = sub.add_parser("convert", help="switch coefficient forms")
    p.add_argument("method")
    p.add_argument("--to", choices=("butcher", "shu-osher"), required=True)
    p.add_argument("--r", type=float, default=None)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("optimize", help="search for a maximal-radius method")
    p.add_argument("spec", help="key=value spec file")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("integrate", help="fixed-step run on a problem")
    p.add_argument("method")
    p.add_argument("--problem", required=True)
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--t-final", type=float, required=True)
    p.add_argument("--stride", type=int, default=1)
    p.set_defaults(func=cmd_integrate)

    p = sub.add_parser("converge", help="error-decay slope study")
    p.add_argument("method")
    p.add_argument("--problem", required=True)
    p.add_argument("--dts", default=None, help="comma-separated steps")
    p.add_argument("--t-final", type=float, default=None)
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("tvd-sweep", help="total-variation violation sweep")
    p.add_argument("method")
    p.add_argument("--problem", required=True)
    p.add_argument("--steps", type=int, default=20)
    p.add_argument("--threshold", type=float, default=1e-10)
    p.set_defaults(func=cmd_tvd_sweep)

    p = sub.add_parser("compare-dt",
                       help="predicted vs observed step ratios for pairs")
    p.add_argument("methods", nargs="+")
    p.add_argument("--omegas", default="10,100")
    p.add_argument("--baseline", default=None,
                   help="explicit method for the ratio column")
    p.set_defaults(func=cmd_compare_dt)

    p = sub.add_parser("stability-region", help="|R| = 1 contour + metrics")
    p.add_argument("method")
    p.add_argument("--re-min", type=float, default=-3.0)
    p.add_argument("--re-max", type=float, default=1.0)
    p.add_argument("--im-min", type=float, default=-2.0)
    p.add_argument("--im-max", type=float, default=2.0)
    p.add_argument("--resolution", type=int, default=201)
    p.add_argument("--axis-tol", type=float, default=1e-6)
    p.add_argument("--proximity", type=float, default=0.0)
    p.set_defaults(func=cmd_stability_region)

    p = sub.add_parser("catalog", help="list bundled methods and problems")
    p.set_defaults(func=cmd_catalog)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValidationFailure, MethodFileError, TableauError,
            oc.ConditionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
