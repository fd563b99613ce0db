"""Command-line front end: ``sawitness COMMAND ...``.

Exit status: 0 success / all Equal, 1 Differ or failure, 2 Unknown, 3 bad input.
Reports (``--out``) are JSON with sorted keys and no timestamps, so repeated
runs with the same configuration are byte-identical.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .fileformat import FileFormatError, format_set, load_sets, parse_expressions
from .findset import BudgetExhausted
from .harness import Differ, GridError, grid_connectivity, sets_equal
from .interval import DEFAULT_CERT_BUDGET, track_usage
from .oracle import MissingBound
from .rae import ArityError, classify
from .rewrite import MalformedExpression, NormalizationError, extract_components, \
    eliminate_intersection, normalize_cpfree, normalize_onepass
from .sets import Box, DisjunctBudgetExceeded, shape_bound
from .witness import DEFAULT_MARGIN, WitnessPair, witness_cpfree, witness_onepass

EXIT_OK, EXIT_FAIL, EXIT_UNKNOWN, EXIT_INPUT = 0, 1, 2, 3


class InputError(ValueError):
    pass


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, Path):
        return str(x)
    return x


def _verdict_json(v) -> dict:
    out = {"kind": v.kind}
    if isinstance(v, Differ):
        out.update(witness=_jsonable(v.witness), left=v.left, right=v.right)
    else:
        out.update(samples=v.samples, unknown_rate=round(v.unknown_rate, 6))
        if v.kind == "Equal":
            out["certified"] = v.certified
    return out


def _point_text(p) -> str:
    return "(" + ", ".join(map(str, p)) + ")"


def _box_json(b: Box | None):
    return None if b is None else [[str(lo), str(hi)] for lo, hi in b.intervals]


def _tau_json(tau) -> dict:
    return {"scale": str(tau.scale), "translation": _jsonable(tau.translation)}


# -- commands -----------------------------------------------------------------------

def _load(args):
    env = load_sets(args.sets or [])
    exprs = []
    if getattr(args, "expressions", None):
        path = Path(args.expressions)
        exprs = parse_expressions(path.read_text(), env, args.dim, str(path))
    return env, exprs


def cmd_classify(args):
    _, exprs = _load(args)
    rows, lines = [], []
    for no, e in exprs:
        c = classify(e)
        rows.append({"line": no, "expression": str(e), "arity": e.arity,
                     "cartesian_product_free": c.cartesian_product_free,
                     "positive_one_pass": c.positive_one_pass, "s_occurrences": c.s_occurrences})
        yn = lambda b: "yes" if b else "no"  # noqa: E731
        lines.append(f"line {no}: {e}\n  cartesian-product-free: {yn(c.cartesian_product_free)}"
                     f"\n  positive one-pass: {yn(c.positive_one_pass)}")
    return EXIT_OK, {"expressions": rows}, lines


def _start_box(args) -> Box:
    return Box.cube(Fraction(-1), Fraction(1), args.dim)


def cmd_normalize(args):
    _, exprs = _load(args)
    rows, lines = [], []
    for no, e in exprs:
        c = classify(e)
        row = {"line": no, "expression": str(e)}
        if c.positive_one_pass:
            nf = normalize_onepass(e)
            row["onepass"] = {"indices": list(nf.indices), "k": nf.k, "n": nf.n,
                              "lambda1": str(nf.lambda1), "lambda2": str(nf.lambda2)}
            lines.append(f"line {no}: {nf}")
        if c.cartesian_product_free:
            forms = []
            if e.arity == args.dim:
                nf, V = normalize_cpfree(e, _start_box(args), cert_budget=args.cert_budget)
                forms.append({"component": "root", "form": str(nf), "V": _box_json(V)})
            else:
                V = _start_box(args)
                for comp in extract_components(eliminate_intersection(e)).components:
                    nf, V = normalize_cpfree(comp.expr, V, cert_budget=args.cert_budget)
                    forms.append({"component": f"proj[{','.join(map(str, comp.indices))}]({comp.expr})",
                                  "form": str(nf), "V": _box_json(V)})
            row["cpfree"] = forms
            lines += [f"line {no}: {f['component']} -> {f['form']} on {f['V']}" for f in forms]
        if not (c.positive_one_pass or c.cartesian_product_free):
            lines.append(f"line {no}: no normal form (neither fragment)")
        rows.append(row)
    return EXIT_OK, {"expressions": rows}, lines


def _connectivity_summary(pair: WitnessPair, resolution: Fraction | None):
    tau = pair.tau
    region = shape_bound(tau)
    res = resolution if resolution is not None else tau.scale / 4
    a = grid_connectivity(pair.A, region, res)
    b = grid_connectivity(pair.B, region, res, seeds=pair.B.distinguished_points)
    return {"resolution": str(res), "A_components": a.count, "B_components": b.count,
            "B_seed_components": list(b.seed_components)}


def _witness_result(pair: WitnessPair, exprs, args):
    conn = _connectivity_summary(pair, args.resolution)
    verdicts = [{"line": exprs[v.expr_id][0], "method": v.method, "detail": v.detail,
                 **_verdict_json(v.verdict)} for v in pair.verdicts]
    result = {"tau": _tau_json(pair.tau), "V": _box_json(pair.V),
              "rejected": [_tau_json(t) for t in pair.rejected],
              "A": format_set("A", pair.A), "B": format_set("B", pair.B),
              "connectivity": conn, "verdicts": verdicts}
    kinds = {v.verdict.kind for v in pair.verdicts}
    shapes_ok = conn["A_components"] == 1 and conn["B_components"] == 2
    a_word = "connected" if conn["A_components"] == 1 else f"{conn['A_components']} components"
    b_word = "disconnected" if conn["B_components"] == 2 else f"{conn['B_components']} components"
    if "Differ" in kinds or not shapes_ok:
        status, summary = EXIT_FAIL, "some query separates A and B" if "Differ" in kinds else "shape check failed"
    elif "Unknown" in kinds:
        status, summary = EXIT_UNKNOWN, "some verdicts Unknown"
    else:
        status, summary = EXIT_OK, "all queries Equal"
    lines = [f"tau: scale {pair.tau.scale}, center {_point_text(pair.tau.translation)}",
             f"A {a_word}, B {b_word}, {summary}"]
    lines += [f"  line {r['line']} [{r['method']}]: {r['kind']}" for r in verdicts]
    return status, result, lines


def cmd_witness_cpfree(args):
    _, exprs = _load(args)
    pair = witness_cpfree([e for _, e in exprs], args.dim, cert_budget=args.cert_budget,
                          samples=args.sample_budget, seed=args.seed, margin=args.margin)
    return _witness_result(pair, exprs, args)


def cmd_witness_onepass(args):
    _, exprs = _load(args)
    pair = witness_onepass([e for _, e in exprs], args.dim, samples=args.sample_budget, seed=args.seed)
    return _witness_result(pair, exprs, args)


def _pick(env, name, role):
    if name is None:
        raise InputError(f"--{role} is required")
    if name not in env:
        raise InputError(f"no set named {name!r}")
    return env[name]


def _region_of(*sets) -> Box:
    bounds = [X.declared_bound for X in sets]
    if any(b is None for b in bounds):
        raise InputError("sets compared or gridded need a 'bound' line")
    n = sets[0].num_vars
    return Box([(min(b.intervals[i][0] for b in bounds), max(b.intervals[i][1] for b in bounds))
                for i in range(n)])


def cmd_verify(args):
    env, _ = _load(args)
    X, Y = _pick(env, args.left, "left"), _pick(env, args.right, "right")
    v = sets_equal(X, Y, _region_of(X, Y), args.sample_budget, args.seed)
    status = {"Equal": EXIT_OK, "Differ": EXIT_FAIL, "Unknown": EXIT_UNKNOWN}[v.kind]
    line = f"{args.left} vs {args.right}: {v.kind}"
    if isinstance(v, Differ):
        line += f" at {_point_text(v.witness)} ({v.left} vs {v.right})"
    return status, _verdict_json(v), [line]


def cmd_connectivity(args):
    env, _ = _load(args)
    X = _pick(env, args.set, "set")
    region = _region_of(X)
    res = args.resolution if args.resolution is not None else min(region.widths()) / 16
    g = grid_connectivity(X, region, res, seeds=X.distinguished_points, seed=args.seed)
    result = {"resolution": str(res), "components": g.count, "occupied_cells": g.occupied,
              "seed_components": list(g.seed_components)}
    return EXIT_OK, result, [f"{args.set}: {g.count} component(s) at resolution {res}"
                             f" ({g.occupied} occupied cells)"]


COMMANDS = {
    "classify": cmd_classify,
    "normalize": cmd_normalize,
    "witness-cpfree": cmd_witness_cpfree,
    "witness-onepass": cmd_witness_onepass,
    "verify": cmd_verify,
    "connectivity": cmd_connectivity,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sawitness", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--sets", nargs="*", default=[], metavar="FILE", help="set-definition files")
    common.add_argument("--dim", type=int, default=3, help="ambient dimension n of S (default 3)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--cert-budget", type=int, default=DEFAULT_CERT_BUDGET)
    common.add_argument("--sample-budget", type=int, default=10_000)
    common.add_argument("--resolution", type=_fraction, default=None, help="grid cell width")
    common.add_argument("--margin", type=_fraction, default=DEFAULT_MARGIN)
    common.add_argument("--out", type=Path, default=None, help="write a JSON report here")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("classify", "normalize", "witness-cpfree", "witness-onepass"):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("expressions", help="expression file, one per line")
    p = sub.add_parser("verify", parents=[common])
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p = sub.add_parser("connectivity", parents=[common])
    p.add_argument("--set", required=True)
    return parser


def _config(args) -> dict:
    skip = {"out"}
    return {k: _jsonable(v) for k, v in sorted(vars(args).items()) if k not in skip}


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    args = build_parser().parse_args(argv)
    if args.command.startswith("witness") and args.dim not in (3, 4):
        print("error: witness commands need --dim 3 or 4", file=sys.stderr)
        return EXIT_INPUT
    try:
        with track_usage() as usage:
            status, result, lines = COMMANDS[args.command](args)
    except (FileFormatError, InputError, ArityError, MalformedExpression, MissingBound, GridError,
            OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT
    except (BudgetExhausted, NormalizationError, DisjunctBudgetExceeded) as err:
        print(f"failed: {err}", file=sys.stderr)
        status, result, lines = EXIT_FAIL, {"error": str(err)}, []
        usage = None
    for line in lines:
        print(line, file=stdout)
    if args.out is not None:
        report = {"command": args.command, "config": _config(args), "exit_status": status,
                  "usage": None if usage is None else {"boxes": usage.boxes, "samples": usage.samples},
                  "result": result}
        args.out.write_text(json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n")
    return status


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
