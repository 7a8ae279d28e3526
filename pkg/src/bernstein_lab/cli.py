"""Batch command-line front end.

Subcommands: ``check`` (condition reports for a differential or a map spec
at sample points), ``region`` (CSV scan of the optimal region in
singular-value space), ``rotate`` (seeded rotation search), ``verify``
(discrete identity verification on a built-in or user surface).

Every run is fully determined by its flags (seeds included); the effective
configuration is echoed into the output so results are reproducible byte for
byte.  Exit codes: 0 all checks passed, 1 a condition or gate failed,
2 usage or numerical error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import geometry, linalg, rotations, verification
from .conditions import (check_fc_hjw, check_hemisphere24, check_jost_xin,
                         check_theorem_a)
from .geometry import DomainError, mapspec_from_json, singular_data
from .optimal_region import optimal_condition, region_scan
from .rotations import NonGraphicError, SearchTarget, search_rotation
from .surfaces import builtin_names, builtin_surface

SCHEMA = "bernstein-lab/1"
ALL_CONDITIONS = ("TheoremA", "JostXin", "FC_HJW", "Hemisphere24", "OptimalB")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    return obj


def _dump(payload, out_path):
    text = json.dumps(_jsonable(payload), sort_keys=True, indent=2) + "\n"
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_text(text, out_path):
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _config_echo(args, keys):
    cfg = {"subcommand": args.command}
    for key in keys:
        cfg[key] = _jsonable(getattr(args, key))
    return cfg


def _parse_bool(text):
    value = str(text).strip().lower()
    if value in ("true", "1", "yes"):
        return True
    if value in ("false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected true/false, got {text!r}")


def _load_json(path):
    with open(path) as fh:
        return json.load(fh)


# ---------------------------------------------------------------------------
# check


def _reports_for_jac(jac, names, args):
    n, m = jac.shape
    sd = singular_data(jac)
    lams = sd.lambdas
    reports = []
    for name in names:
        if name == "TheoremA":
            reports.append(check_theorem_a(lams, args.delta, args.kmin))
        elif name == "JostXin":
            reports.append(check_jost_xin(lams))
        elif name == "FC_HJW":
            reports.append(check_fc_hjw(lams, n, m))
        elif name == "Hemisphere24":
            if (n, m) != (2, 2):
                raise ValueError("Hemisphere24 requires n = m = 2")
            signed = np.sign(linalg.det(jac))
            signed = 1.0 if signed == 0 else signed
            reports.append(
                check_hemisphere24(lams[0], signed * lams[1])
            )
        elif name == "OptimalB":
            reports.append(
                optimal_condition(lams, m, epsilon=args.epsilon,
                                  traceless=args.traceless)
            )
        else:
            raise ValueError(f"unknown condition {name!r}")
    return reports


def cmd_check(args):
    data = _load_json(args.input)
    if args.conditions:
        names = tuple(s.strip() for s in args.conditions.split(","))
    else:
        names = None
    entries = []
    if "matrix" in data:
        jac = np.asarray(data["matrix"], dtype=float)
        jacs = [(None, jac)]
    elif "spec" in data:
        spec = mapspec_from_json(data["spec"])
        points = data.get("points")
        if not points:
            raise ValueError("input with a spec needs a 'points' list")
        jacs = [(list(map(float, x)), geometry.jet(spec, x).jac)
                for x in points]
    else:
        raise ValueError("input must contain 'matrix' or 'spec' + 'points'")
    all_pass = True
    for point, jac in jacs:
        n, m = jac.shape
        used = names
        if used is None:
            used = tuple(
                c for c in ALL_CONDITIONS
                if c != "Hemisphere24" or (n, m) == (2, 2)
            )
        reports = _reports_for_jac(jac, used, args)
        all_pass &= all(r.pass_ for r in reports)
        entry = {"reports": [r.to_json() for r in reports]}
        if point is not None:
            entry["point"] = point
        entries.append(entry)
    payload = {
        "schema": SCHEMA,
        "config": _config_echo(
            args, ("input", "conditions", "delta", "kmin", "epsilon",
                   "traceless")),
        "results": entries,
    }
    _dump(payload, args.out)
    return 0 if all_pass else 1


# ---------------------------------------------------------------------------
# region


def _parse_grid_axes(text):
    axes = []
    for part in text.split(","):
        pieces = part.split(":")
        if len(pieces) != 3:
            raise ValueError("grid axis must be lo:hi:steps")
        axes.append((float(pieces[0]), float(pieces[1]), int(pieces[2])))
    return tuple(axes)


def cmd_region(args):
    axes = _parse_grid_axes(args.grid)
    result = region_scan(args.n, args.m, args.traceless, axes,
                         epsilon=args.epsilon)
    config = _config_echo(
        args, ("n", "m", "traceless", "grid", "epsilon", "format"))
    if args.format == "json":
        payload = {
            "schema": SCHEMA,
            "config": config,
            "results": {
                "axes": list(result.axes),
                "epsilon": result.epsilon,
                "min_eigenvalues": result.values,
                "classification": result.classification,
            },
        }
        _dump(payload, args.out)
        return 0
    p = len(axes)
    lines = [
        f"# schema: {SCHEMA}",
        "# config: " + json.dumps(config, sort_keys=True),
        ",".join([f"lambda{i + 1}" for i in range(p)] + ["min_eig", "class"]),
    ]
    for lam, value, label in result.iter_rows():
        lines.append(
            ",".join([repr(v) for v in lam] + [repr(value), label])
        )
    _write_text("\n".join(lines) + "\n", args.out)
    return 0


# ---------------------------------------------------------------------------
# rotate


def cmd_rotate(args):
    data = _load_json(args.input)
    if "matrix" not in data:
        raise ValueError("rotate input must contain 'matrix'")
    a = np.asarray(data["matrix"], dtype=float)
    target = SearchTarget(kind=args.target, delta=args.delta,
                          k_min=args.kmin, epsilon=args.epsilon,
                          traceless=args.traceless)
    outcome = search_rotation(a, target, budget=args.budget, seed=args.seed,
                              group=args.group)
    g = outcome.best_g
    if isinstance(g, rotations.OrthBlock):
        blocks = {"P": g.P, "Q": g.Q, "R": g.R, "S": g.S}
    else:
        blocks = {"P": g.P, "Q": g.Q}
    payload = {
        "schema": SCHEMA,
        "config": _config_echo(
            args, ("input", "target", "budget", "seed", "group", "delta",
                   "kmin", "epsilon", "traceless")),
        "results": {
            "g": g.matrix,
            "blocks": blocks,
            "transformed": outcome.transformed,
            "report": outcome.report.to_json(),
            "objective_trace": [list(t) for t in outcome.objective_trace],
            "evaluations": outcome.evaluations,
        },
    }
    _dump(payload, args.out)
    return 0 if outcome.report.pass_ else 1


# ---------------------------------------------------------------------------
# verify


MINIMALITY_GATES = {True: 1e-6, False: 1e-4}  # analytic vs finite-difference
ORDER_GATE = 1.5


def _node_csv(sample, identity):
    n = sample.n
    mesh = np.meshgrid(*sample.axes, indexing="ij")
    if identity == "gradient":
        grads = np.stack(
            [np.gradient(sample.star_omega, sample.axes[i], axis=i,
                         edge_order=2) for i in range(n)], axis=-1)
        lhs = np.einsum("...lk,...l->...k",
                        sample.tangent_frames[..., :n, :], grads)
        from .optimal_region import rhs_gradient_star_omega

        rhs = rhs_gradient_star_omega(sample.lambdas, sample.sff)
        sl = sample.interior(1)
        header = ([f"x{i + 1}" for i in range(n)]
                  + [f"lhs{k + 1}" for k in range(n)]
                  + [f"rhs{k + 1}" for k in range(n)] + ["err"])
        rows = []
        err = np.max(np.abs(lhs - rhs), axis=-1)
        for idx in np.ndindex(*err[sl].shape):
            full = tuple(i + 1 for i in idx)
            rows.append(
                [mesh[i][full] for i in range(n)]
                + list(lhs[full]) + list(rhs[full]) + [err[full]]
            )
        return header, rows
    from .optimal_region import evaluate_F_direct, rhs_delta_star_omega

    if identity == "laplacian-log":
        lhs = verification.discrete_laplace_beltrami(
            sample, np.log(sample.star_omega))
        rhs = -evaluate_F_direct(sample.lambdas, sample.sff)
    else:
        lhs = verification.discrete_laplace_beltrami(sample,
                                                     sample.star_omega)
        rhs = np.asarray(rhs_delta_star_omega(sample.lambdas, sample.sff))
    sl = sample.interior(2)
    header = [f"x{i + 1}" for i in range(n)] + ["lhs", "rhs", "err"]
    rows = []
    rhs_in = rhs[sl]
    for idx in np.ndindex(*lhs.shape):
        full = tuple(i + 2 for i in idx)
        rows.append([mesh[i][full] for i in range(n)]
                    + [lhs[idx], rhs_in[idx], abs(lhs[idx] - rhs_in[idx])])
    return header, rows


def cmd_verify(args):
    if args.surface:
        spec = builtin_surface(args.surface)
    elif args.input:
        spec = mapspec_from_json(_load_json(args.input))
    else:
        raise ValueError("verify needs --surface or --input")
    grids = [int(g) for g in str(args.grid).split(",")]
    config = _config_echo(
        args, ("surface", "input", "identity", "grid", "nodes_csv"))

    if len(grids) == 1:
        sample = verification.sample_surface(spec, grids[0])
        if args.identity == "minimality":
            stats = verification._minimality_stats(sample)
            gate = MINIMALITY_GATES[spec.has_analytic_derivatives]
            passed = stats.max_abs_error < gate
        else:
            runner = verification.IDENTITY_RUNNERS[args.identity]
            stats = runner(sample)
            passed = True
        if args.nodes_csv and args.identity != "minimality":
            header, rows = _node_csv(sample, args.identity)
            lines = [f"# schema: {SCHEMA}",
                     "# config: " + json.dumps(config, sort_keys=True),
                     ",".join(header)]
            for row in rows:
                lines.append(",".join(repr(float(v)) for v in row))
            with open(args.nodes_csv, "w") as fh:
                fh.write("\n".join(lines) + "\n")
        results = [stats.to_json()]
    else:
        ladder = verification.convergence_study(spec, grids, args.identity)
        results = [s.to_json() for s in ladder]
        if args.identity == "minimality":
            gate = MINIMALITY_GATES[spec.has_analytic_derivatives]
            passed = all(s.max_abs_error < gate for s in ladder)
        else:
            orders = [s.observed_order for s in ladder[1:]]
            passed = all(o is None or o >= ORDER_GATE for o in orders)
    payload = {"schema": SCHEMA, "config": config, "results": results}
    _dump(payload, args.out)
    return 0 if passed else 1


# ---------------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bernstein-lab",
        description="Flatness conditions and identity checks for minimal "
                    "graphs in higher codimension.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common_out(p):
        p.add_argument("--out", default=None, help="output path (default stdout)")

    p = sub.add_parser("check", help="evaluate flatness conditions")
    p.add_argument("--input", required=True,
                   help="JSON file: {'matrix': ...} or {'spec': ..., 'points': ...}")
    p.add_argument("--conditions", default=None,
                   help="comma list from: " + ",".join(ALL_CONDITIONS))
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--kmin", type=float, default=0.1)
    p.add_argument("--epsilon", type=float, default=1e-3)
    p.add_argument("--traceless", type=_parse_bool, default=True)
    p.add_argument("--format", choices=("json",), default="json")
    common_out(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("region", help="scan the optimal region")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--traceless", type=_parse_bool, default=True)
    p.add_argument("--grid", required=True, help="per-axis lo:hi:steps, comma separated")
    p.add_argument("--epsilon", type=float, default=1e-3)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    common_out(p)
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("rotate", help="search for a flattening rotation")
    p.add_argument("--input", required=True, help="JSON file with 'matrix'")
    p.add_argument("--target", choices=("TheoremA", "OptimalB"),
                   default="OptimalB")
    p.add_argument("--budget", type=int, default=2000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--group", choices=("orthogonal", "unitary"),
                   default="orthogonal")
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--kmin", type=float, default=0.1)
    p.add_argument("--epsilon", type=float, default=1e-3)
    p.add_argument("--traceless", type=_parse_bool, default=True)
    p.add_argument("--format", choices=("json",), default="json")
    common_out(p)
    p.set_defaults(func=cmd_rotate)

    p = sub.add_parser("verify", help="discrete identity verification")
    p.add_argument("--surface", choices=builtin_names(), default=None)
    p.add_argument("--input", default=None, help="MapSpec JSON file")
    p.add_argument("--identity",
                   choices=("gradient", "laplacian-log", "laplacian-raw",
                            "minimality"),
                   required=True)
    p.add_argument("--grid", required=True, help="N or N1,N2 (nested)")
    p.add_argument("--nodes-csv", dest="nodes_csv", default=None,
                   help="optional per-node CSV output path")
    p.add_argument("--format", choices=("json",), default="json")
    common_out(p)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, DomainError, NonGraphicError,
            linalg.ConvergenceError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
