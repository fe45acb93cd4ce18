"""Command-line entry point.

Exit codes: 0 when every check passes, 1 on a check failure, 2 on usage or I/O errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from .errors import (Degenerate, Infeasible, LengthMismatch, NoConvergence, NotAGadget, QuadratureFailure,
                     SWExtrapError, TruncationOverflow, UnknownSuite)

OK, FAIL, USAGE = 0, 1, 2

# errors that report a failed check rather than bad input
CHECK_ERRORS = (NotAGadget, Degenerate, Infeasible, QuadratureFailure, NoConvergence, TruncationOverflow)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _emit(payload: dict, out: str | None = None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _load_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _load_spec(path: str, bits: int | None):
    from .pipeline import build_gadget
    return build_gadget(_load_json(path), bits)


def cmd_validate(args) -> int:
    from .gadgets import validate
    spec = _load_spec(args.gadget, None)
    val = validate(spec, args.qmax)
    out = val.to_dict()
    out["context"] = spec.ctx.summary()
    ok = val.is_gadget and (val.target_error is None or val.target_error <= args.target_tol)
    out["pass"] = bool(ok)
    _emit(out, args.out)
    return OK if ok else FAIL


def cmd_sw_expand(args) -> int:
    from .hamiltonian import to_json_terms
    from .schrieffer_wolff import series_bounds, structural_checks, sw_expand
    spec = _load_spec(args.gadget, None)
    ctx = spec.ctx
    series = sw_expand(ctx, args.qmax, args.strategy)
    bounds = series_bounds(ctx, series)
    st = structural_checks(ctx, series)
    ok = (all(r["pass"] for r in bounds) and st["locality"]
          and max(st["V_hermiticity"], st["T_antihermiticity"], st["block_diagonality"]) <= 1e-10)
    payload = {
        "context": ctx.summary(),
        "q_max": series.q_max,
        "strategy": series.strategy,
        "V": {str(q): to_json_terms(series.v(q)) for q in range(1, series.q_max + 1)},
        "T": {str(q): to_json_terms(series.t(q)) for q in range(1, series.q_max + 1)},
        "H_eff": {str(k): to_json_terms(H) for k, H in enumerate(series.Heff_coeffs)},
        "leaks": {str(q): float(v) for q, v in sorted(series.leak.items())},
        "bounds": bounds,
        "structure": st,
        "pass": bool(ok),
    }
    _emit(payload, args.out)
    return OK if ok else FAIL


def _read_samples(path: str):
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    if rows and not _is_number(rows[0][0]):
        rows = rows[1:]
    if not rows:
        raise LengthMismatch("no samples in file")
    width = {len(r) for r in rows}
    if len(width) != 1 or width.pop() not in (1, 2):
        raise ValueError("samples file needs one column (f) or two columns (x, f)")
    data = np.array([[float(v) for v in r] for r in rows])
    if data.shape[1] == 1:
        return None, data[:, 0]
    return data[:, 0], data[:, 1]


def _is_number(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def cmd_extrapolate(args) -> int:
    from .extrapolation import chebyshev_nodes, richardson
    xs, f = _read_samples(args.samples)
    plan = chebyshev_nodes(len(f), args.xmax)
    if xs is not None:
        order = np.argsort(xs)
        xs, f = xs[order], f[order]
        if np.abs(xs - plan.nodes).max() > 1e-9 * args.xmax:
            raise ValueError("sample abscissae are not the Chebyshev nodes for this x_max")
    est = richardson(plan, f, delta=args.delta, M=args.M)
    out = {"m": plan.m, "x_max": plan.x_max, "alpha": plan.alpha, "nodes": plan.nodes.tolist(),
           "weights": plan.weights.tolist(), "c0_hat": est.c0_hat, "budget": est.budget,
           "M": est.M, "M_is_empirical": args.M is None, "delta": est.delta}
    _emit(out, args.out)
    return OK


def cmd_run(args) -> int:
    from .pipeline import run_config_file
    report = run_config_file(args.config, args.out, args.csv)
    return OK if report.passed else FAIL


def cmd_invariants(args) -> int:
    from .invariants import run_invariants
    rep = run_invariants(args.suite, args.seed, args.sizes)
    ok, n = rep.counts
    if args.out:
        _emit(rep.to_dict(), args.out)
    for r in rep.rows:
        if not r["pass"] or args.verbose:
            print(f"{'PASS' if r['pass'] else 'FAIL'} {r['name']} value={r['value']} bound={r['bound']}")
    print(f"{args.suite}: {ok}/{n} passed")
    return OK if rep.passed else FAIL


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="swextrap", description="Gadget simulation with Schrieffer-Wolff checks and Richardson extrapolation.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("validate", help="check that a gadget reproduces its target")
    v.add_argument("gadget")
    v.add_argument("--qmax", type=int, default=None)
    v.add_argument("--target-tol", type=float, default=1e-8)
    v.add_argument("--out", default=None)
    v.set_defaults(func=cmd_validate)

    s = sub.add_parser("sw-expand", help="compute the Schrieffer-Wolff series of a gadget")
    s.add_argument("gadget")
    s.add_argument("--qmax", type=int, required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--strategy", choices=("auto", "local", "dense"), default="auto")
    s.set_defaults(func=cmd_sw_expand)

    e = sub.add_parser("extrapolate", help="Richardson-extrapolate samples taken at Chebyshev nodes")
    e.add_argument("--samples", required=True)
    e.add_argument("--xmax", type=float, required=True)
    e.add_argument("--delta", type=float, default=0.0)
    e.add_argument("--M", type=float, default=None)
    e.add_argument("--out", default=None)
    e.set_defaults(func=cmd_extrapolate)

    r = sub.add_parser("run", help="run an end-to-end experiment")
    r.add_argument("config")
    r.add_argument("--out", required=True)
    r.add_argument("--csv", default=None)
    r.set_defaults(func=cmd_run)

    i = sub.add_parser("invariants", help="run a seeded property suite")
    i.add_argument("--suite", required=True)
    i.add_argument("--seed", type=int, default=0)
    i.add_argument("--sizes", choices=("minimal", "default"), default="default")
    i.add_argument("--out", default=None)
    i.add_argument("--verbose", action="store_true")
    i.set_defaults(func=cmd_invariants)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"swextrap: {exc}", file=sys.stderr)
        return USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except CHECK_ERRORS as exc:
        print(f"swextrap: check failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return FAIL
    except (UnknownSuite, OSError, ValueError, KeyError, TypeError, SWExtrapError) as exc:
        print(f"swextrap: {type(exc).__name__}: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
