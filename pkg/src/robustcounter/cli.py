"""Command-line surface: solve model files, derive robust counterparts,
build and solve site-selection instances, run parameter sweeps, and validate
solutions against uncertainty.

Exit codes: 0 optimal/success, 1 usage or parse error, 2 infeasible (or
certification failure), 3 unbounded, 4 limit reached.  All floating-point
output is printed with 6 decimals; CSV files carry full precision.  The
``--json`` flag mirrors every report as a machine-readable object.  The
environment variable ``ROBUSTCOUNTER_SEED`` supplies the default seed.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import validate as validate_mod
from .model import Model, ParseError, export_text, import_text
from .robustify import interval_robust_counterpart, symmetric_robust_counterpart
from .sitesel import InstanceError, build_irc, build_nominal, build_rc, load_instance
from .solver import SolverOptions, solve
from .uncertainty import parse_annotations
from .validate import SweepRow, corner_check, monte_carlo_check, write_sweep_csv

_STATUS_EXIT = {"optimal": 0, "infeasible": 2, "unbounded": 3, "limit_reached": 4}


def _default_seed() -> int:
    return int(os.environ.get("ROBUSTCOUNTER_SEED", "0"))


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 1


def _read_model(path: str) -> Model:
    return import_text(Path(path).read_text())


def _solver_options(args) -> SolverOptions:
    opts = SolverOptions()
    if getattr(args, "max_nodes", None):
        opts.max_nodes = args.max_nodes
    if getattr(args, "time_limit", None):
        opts.time_limit_seconds = args.time_limit
    return opts


def _print_solution(model: Model, sol, as_json: bool, extra=None):
    if as_json:
        payload = {
            "status": sol.status,
            "objective": None if math.isnan(sol.objective) else sol.objective,
            "values": {model.variables[v].name: val for v, val in sol.values.items()},
            "stats": {
                "iterations": sol.stats.iterations,
                "nodes": sol.stats.nodes,
                "cone_cuts": sol.stats.cone_cuts,
            },
        }
        if extra:
            payload.update(extra)
        print(json.dumps(payload, indent=2, sort_keys=True))
        return
    print(f"status: {sol.status}")
    if not math.isnan(sol.objective):
        print(f"objective: {sol.objective:.6f}")
    for v, val in sorted(sol.values.items()):
        if abs(val) > 1e-9:
            print(f"  {model.variables[v].name} = {val:.6f}")


# -- solve -------------------------------------------------------------------


def cmd_solve(args) -> int:
    try:
        model = _read_model(args.model)
    except (OSError, ParseError) as exc:
        return _fail(str(exc))
    sol = solve(model, _solver_options(args))
    _print_solution(model, sol, args.json)
    return _STATUS_EXIT[sol.status]


# -- robustify ----------------------------------------------------------------


def cmd_robustify(args) -> int:
    try:
        model = _read_model(args.model)
        uset = parse_annotations(Path(args.annotations).read_text(), model)
    except (OSError, ParseError, ValueError) as exc:
        return _fail(str(exc))
    try:
        if args.mode == "irc":
            art = interval_robust_counterpart(model, uset, args.eps, args.delta)
        else:
            art = symmetric_robust_counterpart(
                model, uset, args.eps, args.delta, args.kappa
            )
    except ValueError as exc:
        return _fail(str(exc))
    text = export_text(art.model)
    Path(args.output).write_text(text)
    if args.json:
        print(json.dumps({
            "output": args.output,
            "mode": args.mode,
            "constraints": len(art.model.constraints),
            "aux_variables": len(art.aux_u) + len(art.aux_v),
        }, indent=2, sort_keys=True))
    else:
        print(f"wrote {args.mode} counterpart to {args.output} "
              f"({len(art.model.constraints)} constraints)")
    return 0


# -- sitesel -------------------------------------------------------------------


def _build_sitesel(instance, mode: str, eps: float, delta: float, kappa: float,
                   exact: bool) -> Model:
    if mode == "nominal":
        return build_nominal(instance, exact_assignment=exact)
    if mode == "irc":
        return build_irc(instance, eps, delta, exact_assignment=exact)
    return build_rc(instance, eps, delta, kappa, exact_assignment=exact)


def cmd_sitesel(args) -> int:
    try:
        instance = load_instance(args.instance)
        model = _build_sitesel(instance, args.mode, args.eps, args.delta,
                               args.kappa, args.exact_assignment)
    except (InstanceError, ValueError) as exc:
        return _fail(str(exc))
    sol = solve(model, _solver_options(args))
    if sol.status != "optimal":
        _print_solution(model, sol, args.json)
        return _STATUS_EXIT[sol.status]

    def val(name):
        return sol.values[model.variable_by_name(name).id]

    opened = [s.id for s in instance.sites if val(f"y_{s.id}") > 0.5]
    assignments = {
        u.id: [s.id for s in instance.sites if val(f"x_{u.id}_{s.id}") > 0.5]
        for u in instance.units
    }
    budget_row = model.constraint_by_label("budget")
    budget_used = budget_row.lhs.value(sol.values)
    if args.json:
        print(json.dumps({
            "status": sol.status,
            "objective": sol.objective,
            "open_sites": opened,
            "assignments": assignments,
            "budget_used": budget_used,
            "budget": instance.budget,
        }, indent=2, sort_keys=True))
    else:
        print(f"status: {sol.status}")
        print(f"expected utilization: {sol.objective:.6f}")
        print(f"open sites: {', '.join(opened) if opened else '(none)'}")
        for uid, sids in assignments.items():
            print(f"  {uid} -> {', '.join(sids) if sids else '(unassigned)'}")
        print(f"budget used: {budget_used:.6f} of {instance.budget:.6f}")
    return 0


# -- sweep ----------------------------------------------------------------------


def _parse_axis(spec: str, key: str) -> list[float]:
    spec = spec.strip()
    if not spec:
        raise ValueError(f"empty value list for {key}")
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ValueError(f"{key}: range must be start:step:stop, got {spec!r}")
        start, step, stop = (float(p) for p in parts)
        if step <= 0:
            raise ValueError(f"{key}: range step must be positive")
        out = []
        v = start
        while v <= stop + 1e-12:
            out.append(round(v, 12))
            v += step
        return out
    return [float(tok) for tok in spec.split(",") if tok.strip()]


def parse_grid_spec(tokens) -> list[tuple[float, float, float]]:
    """Grid spec like ``eps=0:0.05:0.2 delta=0,0.1 kappa=1,0.14``."""
    axes = {"eps": [0.0], "delta": [0.0], "kappa": [1.0]}
    if not tokens:
        raise ValueError("empty grid specification")
    for token in tokens:
        if "=" not in token:
            raise ValueError(f"grid token {token!r} is not key=values")
        key, spec = token.split("=", 1)
        key = key.strip()
        if key == "epsilon":
            key = "eps"
        if key not in axes:
            raise ValueError(f"unknown grid axis {key!r} (use eps/delta/kappa)")
        axes[key] = _parse_axis(spec, key)
    grid = [(e, d, k)
            for e in axes["eps"] for d in axes["delta"] for k in axes["kappa"]]
    if not grid:
        raise ValueError("empty grid specification")
    return grid


def _sweep_cell(payload) -> tuple[float, float, float, str, float]:
    """Worker for parallel sweeps; rebuilds the model from primitive data."""
    kind, data, mode, exact, point = payload
    eps, delta, kappa = point
    try:
        if kind == "instance":
            instance = load_instance(data)
            model = _build_sitesel(instance, mode, eps, delta, kappa, exact)
        else:
            model_text, annot_text = data
            model = import_text(model_text)
            uset = parse_annotations(annot_text, model)
            if mode == "irc":
                model = interval_robust_counterpart(model, uset, eps, delta).model
            else:
                model = symmetric_robust_counterpart(
                    model, uset, eps, delta, kappa).model
        sol = solve(model)
        return (eps, delta, kappa, sol.status, sol.objective)
    except Exception:
        return (eps, delta, kappa, "error", math.nan)


def cmd_sweep(args) -> int:
    try:
        grid = parse_grid_spec(args.grid)
    except ValueError as exc:
        return _fail(str(exc))
    path = Path(args.input)
    try:
        if path.is_dir():
            load_instance(path)  # validate early for a clean usage error
            payload_of = lambda pt: ("instance", str(path), args.mode, args.exact_assignment, pt)
        else:
            model_text = path.read_text()
            model = import_text(model_text)
            if not args.annotations:
                return _fail("model-file sweeps need --annotations")
            annot_text = Path(args.annotations).read_text()
            parse_annotations(annot_text, model)
            payload_of = lambda pt: ("model", (model_text, annot_text), args.mode, False, pt)
    except (OSError, ParseError, InstanceError, ValueError) as exc:
        return _fail(str(exc))

    points = [(0.0, 0.0, 1.0)] + [p for p in grid if p != (0.0, 0.0, 1.0)]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sweep_cell, [payload_of(p) for p in points]))
    else:
        results = [_sweep_cell(payload_of(p)) for p in points]

    nominal_objective = math.nan
    for eps, delta, kappa, status, objective in results:
        if (eps, delta, kappa) == (0.0, 0.0, 1.0) and status == "optimal":
            nominal_objective = objective
    rows = []
    for eps, delta, kappa, status, objective in results:
        gap = math.nan
        if status == "optimal" and math.isfinite(nominal_objective):
            denom = abs(nominal_objective) if nominal_objective != 0 else 1.0
            gap = (nominal_objective - objective) / denom
        rows.append(SweepRow(eps, delta, kappa, status, objective,
                             nominal_objective, gap))
    with open(args.output, "w", newline="") as fh:
        write_sweep_csv(rows, fh)
    if args.json:
        print(json.dumps({
            "output": args.output,
            "rows": len(rows),
            "nominal_objective": None if math.isnan(nominal_objective)
            else nominal_objective,
        }, indent=2, sort_keys=True))
    else:
        print(f"wrote {len(rows)} sweep rows to {args.output}")
    return 0


# -- validate ---------------------------------------------------------------------


def _load_solution_values(path: str, model: Model) -> dict[int, float]:
    """Read a solution file (the --json output of solve) keyed by name.

    Names missing from the model (counterpart auxiliaries) are ignored; every
    model variable must be covered.
    """
    payload = json.loads(Path(path).read_text())
    by_name = payload["values"] if "values" in payload else payload
    values = {}
    for v in model.variables:
        if v.name not in by_name:
            raise ValueError(f"solution file lacks a value for {v.name!r}")
        values[v.id] = float(by_name[v.name])
    return values


def cmd_validate(args) -> int:
    try:
        model = _read_model(args.model)
        uset = parse_annotations(Path(args.annotations).read_text(), model)
        if args.solution:
            values = _load_solution_values(args.solution, model)
        else:
            sol = solve(model, _solver_options(args))
            if sol.status != "optimal":
                return _fail(f"model solve ended {sol.status}; supply --solution")
            values = sol.values
    except (OSError, ParseError, ValueError) as exc:
        return _fail(str(exc))

    if args.mc:
        est = monte_carlo_check(model, uset, values, args.eps, args.delta,
                                args.mc, args.seed)
        if args.json:
            print(json.dumps({
                "method": "monte_carlo",
                "samples": est.samples,
                "violations": est.violations,
                "frequency": est.frequency,
                "ci_half_width": est.ci_half_width,
                "seed": est.seed,
            }, indent=2, sort_keys=True))
        else:
            print(f"samples: {est.samples}")
            print(f"violation frequency: {est.frequency:.6f} "
                  f"(+/- {est.ci_half_width:.6f}, seed {est.seed})")
        return 0
    try:
        report = corner_check(model, uset, values, args.eps, args.delta)
    except ValueError as exc:
        return _fail(str(exc))
    if args.json:
        print(json.dumps({
            "method": "corner",
            "corners_checked": report.corners_checked,
            "certified": report.certified,
            "worst_violation": {
                model.constraints[cid].label: v
                for cid, v in report.worst_violation.items()
            },
        }, indent=2, sort_keys=True))
    else:
        print(f"corners checked: {report.corners_checked}")
        worst = max(report.worst_violation.values(), default=0.0)
        print(f"worst violation: {worst:.6f}")
        print(f"certified: {'yes' if report.certified else 'no'}")
    return 0 if report.certified else 2


# -- entry point --------------------------------------------------------------------


def _add_robust_params(p, kappa_default=0.14):
    p.add_argument("--eps", type=float, default=0.05,
                   help="uncertainty level (default 0.05)")
    p.add_argument("--delta", type=float, default=0.0,
                   help="infeasibility tolerance (default 0)")
    p.add_argument("--kappa", type=float, default=kappa_default,
                   help=f"reliability level (default {kappa_default})")


def _add_solver_params(p):
    p.add_argument("--max-nodes", type=int, default=None,
                   help="branch-and-bound node limit")
    p.add_argument("--time-limit", type=float, default=None,
                   help="wall-clock limit in seconds")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="robustcounter",
        description="Robust counterparts for mixed-integer linear programs.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true",
                        help="emit machine-readable JSON instead of text")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve a model file", parents=[common])
    p.add_argument("model")
    _add_solver_params(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("robustify", help="derive a robust counterpart",
                       parents=[common])
    p.add_argument("model")
    p.add_argument("annotations")
    p.add_argument("--mode", choices=("irc", "rc"), default="irc")
    _add_robust_params(p)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_robustify)

    p = sub.add_parser("sitesel", help="build and solve a site-selection instance",
                       parents=[common])
    p.add_argument("instance", help="instance directory")
    p.add_argument("--mode", choices=("nominal", "irc", "rc"), default="nominal")
    _add_robust_params(p)
    p.add_argument("--exact-assignment", action="store_true",
                   help="assign each unit to exactly one site")
    _add_solver_params(p)
    p.set_defaults(func=cmd_sitesel)

    p = sub.add_parser("sweep", help="solve across an (eps, delta, kappa) grid",
                       parents=[common])
    p.add_argument("input", help="instance directory or model file")
    p.add_argument("grid", nargs="+",
                   help="e.g. eps=0:0.05:0.2 delta=0,0.1 kappa=1,0.14")
    p.add_argument("--annotations", help="required for model-file sweeps")
    p.add_argument("--mode", choices=("irc", "rc"), default="rc")
    p.add_argument("--exact-assignment", action="store_true")
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--jobs", type=int, default=1,
                   help="parallel workers for sweep cells")
    p.add_argument("-o", "--output", required=True, help="output CSV path")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate", help="check a solution against uncertainty",
                       parents=[common])
    p.add_argument("model", help="nominal model file")
    p.add_argument("annotations")
    p.add_argument("--solution", help="solution JSON (from solve --json); "
                   "defaults to solving the model itself")
    p.add_argument("--corner", action="store_true",
                   help="exhaustive corner certification (default)")
    p.add_argument("--mc", type=int, metavar="N", default=0,
                   help="Monte Carlo estimation with N samples")
    p.add_argument("--eps", type=float, default=0.05)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=_default_seed())
    _add_solver_params(p)
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
