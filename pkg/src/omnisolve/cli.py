"""Command-line pipeline: generate, solve, verify, simulate, sweep.

Exit codes: 0 success, 1 invalid input (message names the violated
invariant), 2 verification or simulation mismatch. Exact rationals are
rendered as "num/den" strings; floats appear only in sweep CSV output.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .constraints import sgo_constraints, slo_constraints
from .instance import (
    Instance,
    InvalidInstance,
    InvalidProbability,
    random_instance,
)
from .lexlp import LexResult, solve_lex
from .netcode import simulate_exchange
from . import predict

__all__ = ["main"]


def _rational(fr: Fraction) -> str:
    return f"{fr.numerator}/{fr.denominator}"


def _parse_groups(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise InvalidInstance(
            f"groups must be a comma-separated integer list, got {text!r}"
        ) from None


def _load_instance(path: str) -> Instance:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InvalidInstance(f"cannot read instance file {path}: {exc}") from exc
    return Instance.from_json(text)


def _constraints(inst: Instance, mode: str):
    return slo_constraints(inst) if mode == "slo" else sgo_constraints(inst)


def _cmd_gen(args) -> int:
    inst = random_instance(
        args.n, args.k, args.p, _parse_groups(args.groups), args.seed
    )
    print(inst.to_json())
    return 0


def _cmd_solve(args) -> int:
    inst = _load_instance(getattr(args, "in"))
    result, method_used, fallback = _solve_with_method(inst, args.mode, args.method)
    out = {
        "mode": args.mode,
        "method_used": method_used,
        "round_sums": [_rational(s) for s in result.round_sums],
        "rates": result.rates.to_strings(),
    }
    if fallback is not None:
        out["fallback_reason"] = fallback
    print(json.dumps(out))
    return 0


def _solve_with_method(inst: Instance, mode: str, method: str):
    """Returns (LexResult, method_used, fallback_reason)."""
    if method == "lp":
        return solve_lex(_constraints(inst, mode)), "lp", None
    if method == "sle":
        solver = predict.slo_sle_solve if mode == "slo" else predict.sgo_sle_solve
    else:
        if inst.num_groups != 2:
            raise InvalidInstance(
                "closed-form method requires exactly two groups"
            )
        solver = predict.slo_closed_form if mode == "slo" else predict.sgo_closed_form
    try:
        rates = solver(inst)
        return LexResult(rates.round_sums(), rates), method, None
    except (predict.NegativeRate, predict.SingularSystem) as exc:
        return solve_lex(_constraints(inst, mode)), "lp", type(exc).__name__


def _cmd_verify(args) -> int:
    inst = _load_instance(getattr(args, "in"))
    mode = args.mode
    lp = solve_lex(_constraints(inst, mode))
    report: dict = {
        "mode": mode,
        "lp_round_sums": [_rational(s) for s in lp.round_sums],
    }
    solver = predict.slo_sle_solve if mode == "slo" else predict.sgo_sle_solve
    consistent = True
    try:
        sle = solver(inst)
        report["sle_round_sums"] = [_rational(s) for s in sle.round_sums()]
        report["sle_equals_lp"] = tuple(sle.round_sums()) == lp.round_sums
        consistent &= report["sle_equals_lp"]
    except (predict.NegativeRate, predict.SingularSystem) as exc:
        report["sle_error"] = f"{type(exc).__name__}: {exc}"
        report["sle_equals_lp"] = False
        consistent = False
    if mode == "slo" and inst.num_groups == 2:
        cert = predict.slo_dual_certificate(inst)
        report["dual_certificate_verified"] = cert.verified
        consistent &= cert.verified
    report["consistent"] = consistent
    print(json.dumps(report))
    return 0 if consistent else 2


def _cmd_simulate(args) -> int:
    inst = _load_instance(getattr(args, "in"))
    lex = solve_lex(_constraints(inst, args.mode))
    report = simulate_exchange(inst, lex.rates, args.mode, args.seed)
    print(json.dumps(report.to_json_dict()))
    return 0 if report.all_achieved else 2


def _cmd_sweep(args) -> int:
    n1_values = [int(x) for x in args.n1.split(",")]
    steps = args.steps
    if steps < 2 or not 0 < args.pmin < args.pmax < 1:
        raise InvalidInstance(
            "sweep needs 0 < pmin < pmax < 1 and at least two steps"
        )
    grid = [
        args.pmin + i * (args.pmax - args.pmin) / (steps - 1) for i in range(steps)
    ]
    out = sys.stdout
    out.write("p,n,n1,e_slo,e_sgo\n")
    for n1 in n1_values:
        for p in grid:
            e = predict.excess_rates(predict.AsymptoticParams(args.n, n1, p))
            out.write(f"{p:.10g},{args.n},{n1},{e.slo:.10g},{e.sgo:.10g}\n")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="omnisolve",
        description="Exact per-round sum-rate solver and verifier for "
        "multi-round cooperative data exchange.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a random instance as JSON")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--p", type=float, required=True)
    g.add_argument("--groups", required=True, help='comma list, e.g. "2,3"')
    g.add_argument("--seed", type=int, required=True)
    g.set_defaults(func=_cmd_gen)

    s = sub.add_parser("solve", help="solve an instance")
    s.add_argument("--mode", choices=("slo", "sgo"), required=True)
    s.add_argument("--in", required=True, help="instance JSON file")
    s.add_argument("--method", choices=("lp", "sle", "closed"), default="lp")
    s.set_defaults(func=_cmd_solve)

    v = sub.add_parser("verify", help="cross-check solver paths")
    v.add_argument("--mode", choices=("slo", "sgo"), required=True)
    v.add_argument("--in", required=True)
    v.set_defaults(func=_cmd_verify)

    m = sub.add_parser("simulate", help="network-coding simulation at optimal rates")
    m.add_argument("--mode", choices=("slo", "sgo"), required=True)
    m.add_argument("--in", required=True)
    m.add_argument("--seed", type=int, required=True)
    m.set_defaults(func=_cmd_simulate)

    w = sub.add_parser("sweep", help="excess-rate sweep as CSV")
    w.add_argument("--n", type=int, required=True)
    w.add_argument("--n1", required=True, help='comma list, e.g. "2,3,4,5"')
    w.add_argument("--pmin", type=float, default=0.01)
    w.add_argument("--pmax", type=float, default=0.99)
    w.add_argument("--steps", type=int, default=99)
    w.set_defaults(func=_cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InvalidInstance, InvalidProbability, predict.InvalidArgument) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except predict.NotTwoGroups as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
