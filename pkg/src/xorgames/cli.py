"""``xorgame`` command line: biases, (p, q) sweeps, strategy checks, reproduction.

Exit codes: 0 success, 1 usage error, 2 acceptance failure, 3 numeric or
construction error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

from .acceptance import grid, run_all
from .classical import MAX_QUESTIONS, classical_bias_exact
from .errors import ConstructionError, DegeneracyError, DomainError, SizeError, XorGameError
from .game import (
    KnowledgeSpec,
    XorGame,
    build_distributed_game,
    build_magic_square_game,
    build_perturbed_and_game,
    sum_many,
)
from .quantum import (
    DEFAULT_RESTARTS,
    DEFAULT_TOL,
    closed_form_region1,
    closed_form_region2,
    in_region1,
    in_region2,
    quantum_bias,
)
from .strategies import (
    build_region1_strategy,
    build_region2_strategy,
    operator_bias,
    simulate_rounds,
    validate_observable,
)

EXIT_OK, EXIT_USAGE, EXIT_ACCEPTANCE, EXIT_NUMERIC = 0, 1, 2, 3

SWEEP_HEADER = ["p", "q", "classical_bias", "quantum_lower", "quantum_upper", "closed_form", "region"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(x) -> str:
    """12 significant digits; Python's float formatting rounds half to even."""
    return format(float(x), ".12g")


def parse_game_token(token: str) -> XorGame:
    """Named game for ``bias sum``: ``and``, ``and:P:Q``, ``chsh``,
    ``magic-square``, ``distributed:PATH`` or ``file:PATH``."""
    kind, _, rest = token.partition(":")
    try:
        if kind == "and":
            if not rest:
                return build_perturbed_and_game(0.5, 0.5)
            p, q = (float(v) for v in rest.split(":"))
            return build_perturbed_and_game(p, q)
        if kind == "chsh" and not rest:
            return build_perturbed_and_game(1.0, 1.0)
        if kind == "magic-square" and not rest:
            return build_magic_square_game()
        if kind == "distributed" and rest:
            return build_distributed_game(KnowledgeSpec.load(rest))
        if kind == "file" and rest:
            return XorGame.from_json(Path(rest).read_text())
    except (ValueError, OSError) as exc:
        raise UsageError(f"bad game spec {token!r}: {exc}") from exc
    raise UsageError(f"unknown game spec {token!r}")


def _game_from_args(args) -> XorGame:
    try:
        if args.kind == "and":
            return build_perturbed_and_game(args.p, args.q)
        if args.kind == "magic-square":
            return build_magic_square_game()
        if args.kind == "distributed":
            return build_distributed_game(KnowledgeSpec.load(args.spec_file))
        if args.kind == "file":
            return XorGame.from_json(Path(args.path).read_text())
        if args.kind == "sum":
            return sum_many(parse_game_token(t) for t in args.specs)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(str(exc)) from exc
    raise UsageError(f"unknown game kind {args.kind!r}")


def _solver_kwargs(args):
    return dict(rank=args.rank, restarts=args.restarts, seed=args.seed, tol=args.tol)


def cmd_bias(args) -> int:
    g = _game_from_args(args)
    classical = classical_bias_exact(g, max_questions=args.max_questions)
    cert = quantum_bias(g, **_solver_kwargs(args))
    report = {
        "game": g.label,
        "m": g.m,
        "n": g.n,
        "classical": classical.to_dict(),
        "quantum": cert.to_dict() | {"value_lower": (1 + cert.lower) / 2, "value_upper": (1 + cert.upper) / 2},
    }
    print(f"game            {g.label} ({g.m}x{g.n} questions)")
    print(f"classical bias  {fmt(classical.bias)}   value {fmt(classical.value)}")
    print(f"quantum bias    {fmt(cert.lower)}   (certified upper {fmt(cert.upper)}, slack {cert.slack:.3g})")
    print(f"quantum value   {fmt((1 + cert.lower) / 2)}")
    if args.out:
        Path(args.out).write_text(json.dumps(report, indent=2))
    return EXIT_OK


def classify(p, q) -> str:
    if abs(p - 0.5) <= 1e-12 and abs(q - 0.5) <= 1e-12:
        return "boundary"
    if q > 0 and abs(2 * p * q - 1) <= 1e-12 and 0.5 <= p <= 1 and q <= 1:
        return "boundary"
    if in_region1(p, q):
        return "1"
    if in_region2(p, q):
        return "2"
    return "none"


def closed_form(p, q):
    if in_region2(p, q):
        return closed_form_region2(p, q)
    if in_region1(p, q):
        return closed_form_region1(p, q)
    return None


def sweep_rows(p_range, q_range, step, seed=0, restarts=DEFAULT_RESTARTS, rank=None, tol=DEFAULT_TOL):
    for lo, hi in (p_range, q_range):
        if not (0.5 <= lo <= hi <= 1):
            raise UsageError(f"range {lo}..{hi} must satisfy 1/2 <= start <= end <= 1")
    if step <= 0:
        raise UsageError("step must be positive")
    for p in grid(*p_range, step):
        for q in grid(*q_range, step):
            g = build_perturbed_and_game(p, q)
            cert = quantum_bias(g, rank=rank, restarts=restarts, seed=seed, tol=tol)
            yield {
                "p": p,
                "q": q,
                "classical_bias": classical_bias_exact(g).bias,
                "quantum_lower": cert.lower,
                "quantum_upper": cert.upper,
                "closed_form": closed_form(p, q),
                "region": classify(p, q),
            }


def write_sweep_csv(rows, out):
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_HEADER)
        count = 0
        for r in rows:
            w.writerow(
                [
                    fmt(r["p"]),
                    fmt(r["q"]),
                    fmt(r["classical_bias"]),
                    fmt(r["quantum_lower"]),
                    fmt(r["quantum_upper"]),
                    "" if r["closed_form"] is None else fmt(r["closed_form"]),
                    r["region"],
                ]
            )
            count += 1
    return count


def cmd_sweep(args) -> int:
    rows = sweep_rows(tuple(args.p), tuple(args.q), args.step, **_solver_kwargs(args))
    try:
        count = write_sweep_csv(rows, args.out)
    except OSError as exc:
        raise UsageError(f"cannot write {args.out}: {exc}") from exc
    print(f"wrote {count} rows to {args.out}")
    return EXIT_OK


def cmd_reproduce(args) -> int:
    results = run_all(args.seed, log=print)
    passed = all(r.passed for r in results)
    report = {"passed": passed, "seed": args.seed, "items": [r.to_dict() for r in results]}
    if args.out:
        Path(args.out).write_text(json.dumps(report, indent=2))
    if not passed:
        failed = ", ".join(f"{r.id}. {r.name}" for r in results if not r.passed)
        print(f"acceptance failed: {failed}", file=sys.stderr)
        return EXIT_ACCEPTANCE
    print("all acceptance items passed")
    return EXIT_OK


def cmd_verify_strategy(args) -> int:
    build = {1: build_region1_strategy, 2: build_region2_strategy}[args.region]
    cf = {1: closed_form_region1, 2: closed_form_region2}[args.region]
    s = build(args.p, args.q)
    g = build_perturbed_and_game(args.p, args.q)
    bias = operator_bias(g, s)
    target = cf(args.p, args.q)
    rep = s.report
    print(f"region {args.region} strategy at p={fmt(args.p)}, q={fmt(args.q)}, local dimension {s.local_dim}")
    if rep.beta is not None:
        print(f"beta            {fmt(rep.beta)}   (printed cos beta = {fmt(rep.printed_cos_beta)})")
    print(f"normalization   {rep.normalization_reading}; repaired Alice ops: {list(rep.repaired)}")
    for who, ops in (("A", s.alice_ops), ("B", s.bob_ops)):
        for i, o in enumerate(ops):
            v = validate_observable(o)
            print(f"  {who}{i:02b}  hermitian defect {v.hermitian_defect:.2e}  involution defect {v.involution_defect:.2e}")
    print(f"exact bias      {fmt(bias)}")
    print(f"closed form     {fmt(target)}   |diff| = {abs(bias - target):.3g}")
    print(f"exact value     {fmt((1 + bias) / 2)}")
    if args.rounds:
        sim = simulate_rounds(g, s, args.rounds, seed=args.seed)
        sigma = math.sqrt(max(sim.win_rate * (1 - sim.win_rate), 1e-300) / args.rounds)
        print(f"win rate        {fmt(sim.win_rate)} over {args.rounds} rounds (sigma {sigma:.2g})")
    if args.out:
        payload = {
            "strategy": s.to_dict(),
            "bias": bias,
            "closed_form": target,
        }
        Path(args.out).write_text(json.dumps(payload))
    return EXIT_OK


def _solver_parent():
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--seed", type=int, default=0)
    parent.add_argument("--rank", type=int, default=None, help="Gram vector dimension (default m+n)")
    parent.add_argument("--restarts", type=int, default=DEFAULT_RESTARTS)
    parent.add_argument("--tol", type=float, default=DEFAULT_TOL)
    return parent


def build_parser() -> argparse.ArgumentParser:
    solver = _solver_parent()
    parser = _Parser(prog="xorgame", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    bias = sub.add_parser("bias", help="classical and quantum bias of a game")
    kinds = bias.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    common = argparse.ArgumentParser(add_help=False, parents=[solver])
    common.add_argument("--max-questions", type=int, default=MAX_QUESTIONS, help="enumeration guard")
    common.add_argument("--out", help="write a JSON report here")

    k = kinds.add_parser("and", parents=[common], help="perturbed nonlocal AND game")
    k.add_argument("--p", type=float, required=True)
    k.add_argument("--q", type=float, required=True)
    kinds.add_parser("magic-square", parents=[common], help="magic-square weighted AND game")
    k = kinds.add_parser("distributed", parents=[common], help="distributed-knowledge game from JSON")
    k.add_argument("--spec-file", required=True)
    k = kinds.add_parser("file", parents=[common], help="game from a JSON game document")
    k.add_argument("path")
    k = kinds.add_parser("sum", parents=[common], help="sum of named games")
    k.add_argument("specs", nargs="+", metavar="SPEC", help=parse_game_token.__doc__.split(":", 1)[1].strip())
    bias.set_defaults(func=cmd_bias)

    sw = sub.add_parser("sweep", parents=[solver], help="tabulate the (p, q) grid as CSV")
    sw.add_argument("--p", type=float, nargs=2, default=[0.5, 1.0], metavar=("START", "END"))
    sw.add_argument("--q", type=float, nargs=2, default=[0.5, 1.0], metavar=("START", "END"))
    sw.add_argument("--step", type=float, default=0.1)
    sw.add_argument("--out", required=True)
    sw.set_defaults(func=cmd_sweep)

    rp = sub.add_parser("reproduce", help="run every acceptance check")
    rp.add_argument("--seed", type=int, default=0)
    rp.add_argument("--out", help="write the JSON report here")
    rp.set_defaults(func=cmd_reproduce)

    vs = sub.add_parser("verify-strategy", help="build and check an explicit quantum strategy")
    vs.add_argument("region", type=int, choices=[1, 2])
    vs.add_argument("--p", type=float, required=True)
    vs.add_argument("--q", type=float, required=True)
    vs.add_argument("--rounds", type=int, default=0)
    vs.add_argument("--seed", type=int, default=0)
    vs.add_argument("--out", help="write the strategy as JSON here")
    vs.set_defaults(func=cmd_verify_strategy)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, DomainError, SizeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConstructionError, DegeneracyError, XorGameError, ArithmeticError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
