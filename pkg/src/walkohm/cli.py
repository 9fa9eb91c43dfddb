"""Command-line entry point.

    walkohm solve      --network FILE --boundary FILE --method exact|relax|mc|chain
    walkohm resistance --network FILE --source a --sink b[,b2,...]
    walkohm chain      --network FILE --absorb v1,v2 --emit N,t,B,Pn --n K
    walkohm edit       --network FILE --script FILE --source a --sink b
    walkohm lattice    --dim D --step sc|bcc|fcc --rmax R --method balls|short|flow
    walkohm tree       --kind binary|deg3|nt2|nt3|nt2.58 --levels N
    walkohm classical  --dim D --model sc|bcc --nmax N --emit u2n,m,u,watson
    walkohm flow       --dim 2|3 --nmax N --rcheck R

JSON output (the default) carries a ``config`` block echoing every option.
Exit status: 0 on success, 1 on a domain error, 2 on a usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from fractions import Fraction

import numpy as np

from . import chains, classical, dirichlet, electric, lattices, rayleigh
from .errors import WalkOhmError
from .network import read_edge_list
from .walks import default_threads


class UsageError(Exception):
    pass


def _csv(text: str) -> list[str]:
    return [t for t in (s.strip() for s in text.split(",")) if t]


def _emit_set(text: str, allowed: set) -> list[str]:
    items = _csv(text)
    bad = [x for x in items if x not in allowed]
    if bad:
        raise UsageError(f"unknown --emit item(s): {', '.join(bad)}")
    return items


# -- subcommands --------------------------------------------------------------

def cmd_solve(args) -> dict:
    net = read_edge_list(args.network)
    problem = dirichlet.read_boundary(args.boundary, net)
    if args.method == "exact":
        sol = dirichlet.solve_exact(problem)
    elif args.method == "relax":
        sol = dirichlet.solve_relaxation(problem, tol=args.tol, max_sweeps=args.max_sweeps)
    elif args.method == "chain":
        sol = chains.dirichlet_via_chain(problem)
    else:
        sol = dirichlet.solve_monte_carlo(problem, args.walks, args.seed, threads=args.threads)
    out = {"method": sol.method, "values": sol.values, "residual": sol.residual}
    if sol.method == "relax":
        out.update(sweeps=sol.iterations, converged=sol.converged)
    if sol.method == "mc":
        out["walks_per_vertex"] = sol.iterations
        out["stderr"] = dict(zip(net.vertices, sol.stderr.tolist()))
    return out


def cmd_resistance(args) -> dict:
    net = read_edge_list(args.network)
    sinks = _csv(args.sink)
    sink = sinks[0] if len(sinks) == 1 else sinks
    emit = _emit_set(args.emit, {"voltages", "currents", "reff", "pesc", "energy"})
    if args.method == "reduce":
        res = electric.reduce_series_parallel(net, args.source, sink)
        out = {"irreducible": res.irreducible, "trace": res.trace}
        if "reff" in emit:
            out["r_eff"] = None if res.r_eff is None else res.r_eff
            out["c_eff"] = None if res.r_eff is None else 1 / res.r_eff
        if "pesc" in emit and res.r_eff is not None:
            out["p_esc"] = 1 / (res.r_eff * net.C(args.source))
        return out
    res = electric.analyze_two_point(net, args.source, sink)
    out = {}
    if "voltages" in emit:
        out["voltages"] = res.v
    if "currents" in emit:
        out["currents"] = [{"from": u, "to": v, "amps": float(i)}
                           for (u, v, _), i in zip(net.edges, res.currents)]
    if "reff" in emit:
        out["r_eff"] = res.r_eff
        out["c_eff"] = res.c_eff
    if "pesc" in emit:
        out["p_esc"] = res.p_esc
    if "energy" in emit:
        out["energy"] = res.energy
    return out


def cmd_chain(args) -> dict:
    net = read_edge_list(args.network)
    ch = chains.make_absorbing(net, _csv(args.absorb))
    emit = _emit_set(args.emit, {"N", "t", "B", "Pn"})
    out = {"absorbing": list(ch.absorbing), "transient": list(ch.transient)}
    if {"N", "t", "B"} & set(emit):
        sol = chains.fundamental_matrix(ch)
        if "N" in emit:
            out["N"] = sol.N
        if "t" in emit:
            out["t"] = sol.t
        if "B" in emit:
            out["B"] = sol.B
    if "Pn" in emit:
        out["order"] = list(ch.labels)
        out["n"] = args.n
        out["Pn"] = chains.power_matrix(ch.P, args.n)
    return out


def cmd_edit(args) -> dict:
    net = read_edge_list(args.network)
    edits = rayleigh.read_edit_script(args.script)
    a, b = args.source, args.sink
    steps = []
    for e in edits:
        if isinstance(e, rayleigh.Short) and (a in e.vertices or b in e.vertices):
            raise UsageError("edit scripts may not short the terminals")
        check = rayleigh.monotonicity_check(net, a, b, e)
        steps.append({"edit": repr(e), "r_before": check.r_before, "r_after": check.r_after,
                      "expected": check.expected, "holds": check.holds})
        net = rayleigh.apply_edit(net, e)
    r0 = steps[0]["r_before"] if steps else electric.effective_resistance(net, a, b)
    r1 = steps[-1]["r_after"] if steps else r0
    return {"r_eff_before": r0, "r_eff_after": r1, "edits": steps}


def cmd_lattice(args) -> dict:
    budget = args.rmax
    if args.method == "short" and args.terms:
        budget = args.terms
    v = lattices.classify_type(args.dim, args.method, budget, args.step)
    return {"verdict": v.verdict, "method": v.method, "evidence": v.evidence}


def cmd_tree(args) -> dict:
    res = lattices.tree_resistance(args.kind, args.levels)
    return {"kind": args.kind, "levels": args.levels, "R": res.R,
            "R_exact": [str(x) for x in res.R[:min(len(res.R), 20)]],
            "limit": res.limit, "self_similarity_ok": res.recurrence_ok,
            "verdict": "Transient" if res.transient else "Recurrent"}


def cmd_classical(args) -> dict:
    emit = _emit_set(args.emit, {"u2n", "m", "u", "watson"})
    out = {}
    if "u2n" in emit:
        k = min(args.nmax, args.terms)
        out["u2n"] = [float(classical.u2n(args.dim, args.model, n)) for n in range(k + 1)]
    if "m" in emit or "u" in emit:
        s = classical.expected_returns(args.dim, args.model, args.nmax)
        if "m" in emit:
            out["m_partial"] = s.partial
            out["m_tail_bound"] = s.tail_bound
            out["m_estimate"] = s.estimate
            out["divergent"] = s.divergent
        if "u" in emit:
            if s.divergent:
                out["u"] = 1.0
            else:
                lo, hi = s.bracket
                out["u_series_bracket"] = [1 - 1 / lo, 1 - 1 / hi]
                out["u_series_estimate"] = 1 - 1 / s.estimate
        if args.dim == 3 and args.model == "sc":
            m = classical.glasser_zucker_m()
            if "m" in emit:
                out["m_closed_form"] = m
            if "u" in emit:
                out["u"] = 1 - 1 / m
    if "watson" in emit:
        if args.dim != 3 or args.model != "sc":
            raise UsageError("the Watson integral is defined for --dim 3 --model sc")
        out["watson_grid"] = args.grid
        out["watson_m"] = classical.watson_integral_check(args.grid)
    return out


def cmd_flow(args) -> dict:
    of = lattices.orthant_flow(args.dim, args.nmax)
    out = {"dim": args.dim, "source_strength": of.source_strength,
           "max_divergence": str(of.max_divergence),
           "level_energy": of.level_energy, "energy_partial_sums": of.energy_partial_sums}
    if args.dim == 3:
        out["bound_12_sum"] = lattices.orthant_energy_bound(args.nmax)
        out["bound_limit"] = 12 * math.pi ** 2 / 6
    checks = []
    for r in range(1, args.rcheck + 1):
        ball = lattices.orthant_ball(args.dim, r)
        checks.append({"r": r, "r_eff": lattices.ball_resistance(ball),
                       "flow_energy": lattices.flow_certificate_bound(
                           ball, lattices.orthant_flow_function(args.dim))})
    if checks:
        out["certificate_checks"] = checks
    return out


COMMANDS = {"solve": cmd_solve, "resistance": cmd_resistance, "chain": cmd_chain,
            "edit": cmd_edit, "lattice": cmd_lattice, "tree": cmd_tree,
            "classical": cmd_classical, "flow": cmd_flow}


# -- parser ----------------------------------------------------------------------

def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=_positive_int, default=None,
                        help="worker threads (default: $WALKOHM_THREADS or 1)")
    common.add_argument("--deterministic", action="store_true",
                        help="omit the timestamp so identical runs give identical bytes")

    p = argparse.ArgumentParser(prog="walkohm", description="Random walks and electric networks.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", parents=[common], help="Dirichlet problem on a network")
    s.add_argument("--network", required=True)
    s.add_argument("--boundary", required=True)
    s.add_argument("--method", choices=("exact", "relax", "mc", "chain"), default="exact")
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--max-sweeps", type=_positive_int, default=100_000)
    s.add_argument("--walks", type=_positive_int, default=10_000)

    s = sub.add_parser("resistance", parents=[common], help="two-point electrical analysis")
    s.add_argument("--network", required=True)
    s.add_argument("--source", required=True)
    s.add_argument("--sink", required=True, help="vertex or comma-separated vertices")
    s.add_argument("--emit", default="voltages,currents,reff,pesc,energy")
    s.add_argument("--method", choices=("solve", "reduce"), default="solve")

    s = sub.add_parser("chain", parents=[common], help="absorbing chain quantities")
    s.add_argument("--network", required=True)
    s.add_argument("--absorb", required=True)
    s.add_argument("--emit", default="N,t,B")
    s.add_argument("--n", type=int, default=1)

    s = sub.add_parser("edit", parents=[common], help="apply shorts, cuts and bridges")
    s.add_argument("--network", required=True)
    s.add_argument("--script", required=True)
    s.add_argument("--source", required=True)
    s.add_argument("--sink", required=True)

    s = sub.add_parser("lattice", parents=[common], help="recurrence evidence for Z^d")
    s.add_argument("--dim", type=int, choices=(1, 2, 3), required=True)
    s.add_argument("--step", choices=("sc", "bcc", "fcc"), default="sc")
    s.add_argument("--rmax", type=_positive_int, default=8)
    s.add_argument("--terms", type=_positive_int, default=None,
                   help="number of series terms for --method short (default: rmax)")
    s.add_argument("--method", choices=("balls", "short", "flow"), default="balls")

    s = sub.add_parser("tree", parents=[common], help="resistance of a tree to level n")
    s.add_argument("--kind", choices=tuple(lattices.TREES), required=True)
    s.add_argument("--levels", type=_positive_int, default=20)

    s = sub.add_parser("classical", parents=[common], help="return probabilities on Z^d")
    s.add_argument("--dim", type=int, choices=(1, 2, 3), required=True)
    s.add_argument("--model", choices=("sc", "bcc"), default="sc")
    s.add_argument("--nmax", type=_positive_int, default=100_000)
    s.add_argument("--terms", type=_positive_int, default=10, help="u2n terms to list")
    s.add_argument("--emit", default="m,u")
    s.add_argument("--grid", type=_positive_int, default=64)

    s = sub.add_parser("flow", parents=[common], help="uniform orthant flow certificate")
    s.add_argument("--dim", type=int, choices=(2, 3), required=True)
    s.add_argument("--nmax", type=_positive_int, default=50)
    s.add_argument("--rcheck", type=int, default=0,
                   help="compare with the orthant ball resistance for r = 1..RCHECK")
    return p


# -- output ------------------------------------------------------------------------

def _jsonable(x, digits: int):
    if isinstance(x, dict):
        return {str(k): _jsonable(v, digits) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v, digits) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist(), digits)
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return int(x)
    if isinstance(x, (float, np.floating, Fraction)):
        f = float(x)
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        if math.isnan(f):
            return "nan"
        return float(f"{f:.{digits}g}")
    if x is None or isinstance(x, str):
        return x
    return str(x)


def _text(obj, indent: str = "") -> list[str]:
    lines = []
    for k, v in obj.items():
        if isinstance(v, dict):
            lines.append(f"{indent}{k}:")
            lines.extend(_text(v, indent + "  "))
        elif isinstance(v, list) and v and isinstance(v[0], dict):
            lines.append(f"{indent}{k}:")
            for item in v:
                lines.append(indent + "  - " + ", ".join(f"{a}={_fmt(b)}" for a, b in item.items()))
        else:
            lines.append(f"{indent}{k}: {_fmt(v)}")
    return lines


def _fmt(v) -> str:
    if isinstance(v, list):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.threads is None:
        args.threads = default_threads()
    config = {k: v for k, v in vars(args).items()}
    try:
        result = COMMANDS[args.command](args)
    except WalkOhmError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=stderr)
        return 1
    except (UsageError, OSError, ValueError) as exc:
        print(f"error: UsageError: {exc}", file=stderr)
        return 2
    report = {"config": config, **result}
    if not args.deterministic:
        report["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    if args.format == "json":
        print(json.dumps(_jsonable(report, 15), indent=2), file=stdout)
    else:
        print("\n".join(_text(_jsonable(report, 6))), file=stdout)
    return 0


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
