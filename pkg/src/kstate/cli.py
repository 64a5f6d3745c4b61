"""Command-line entry point: ``kstate <subcommand> ...``.

Every subcommand writes one artifact (stdout or ``--out``) whose header or
``config`` field records the fully resolved arguments.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import List, Optional

from . import __version__
from ._text import format_rational, format_sequence, parse_rational, parse_sequence
from .automata import decode, encode, predictor_count
from .complexity import BudgetExceeded, profile
from .equivalence import DIVERGED, ComparisonConfig, GuardError, compare, summary_json, sweep
from .network import run_network
from .pool import EXACT, FLOAT, WeightedPool, best_expert_loss, mistake_bound, run_aggregator
from .seqgen import AUTOMATON, KINDS, GeneratorSpec, generate


class UsageError(Exception):
    pass


def emit(text: str, path: Optional[str]) -> None:
    """Write ``text`` to ``path`` (or stdout) unchanged; newline-terminated by the caller."""
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8", newline="\n")
    except OSError as exc:
        raise OSError(f"cannot write output to {path}: {exc.strerror or exc}") from exc


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


def _resolved(args: argparse.Namespace) -> dict:
    skip = {"func", "out"}
    out = {}
    for key, value in sorted(vars(args).items()):
        if key in skip:
            continue
        if isinstance(value, Fraction):
            value = format_rational(value)
        out[key] = value
    out["version"] = __version__
    return out


def _sequence(args) -> List[int]:
    if getattr(args, "sequence_file", None):
        text = Path(args.sequence_file).read_text(encoding="utf-8")
    elif getattr(args, "sequence", None) is not None:
        text = args.sequence
    else:
        raise UsageError("give --sequence or --sequence-file")
    seq = parse_sequence(text)
    bad = [s + 1 for s in seq if s >= args.alphabet]
    if bad:
        raise UsageError(f"sequence uses symbols {sorted(set(bad))} beyond --alphabet {args.alphabet}")
    return seq


def _lam(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


# -- subcommands -------------------------------------------------------------------------------


def cmd_enumerate(args) -> int:
    n = predictor_count(args.k, args.alphabet)
    if not args.audit:
        emit(f"{n}\n", args.out)
        return 0
    limit = min(n, args.audit)
    failures = sum(encode(decode(i, args.k, args.alphabet)) != i for i in range(limit))
    last = decode(n - 1, args.k, args.alphabet)
    emit(dumps({
        "config": _resolved(args),
        "count": n,
        "audited": limit,
        "round_trip_failures": failures,
        "last_index": last.describe(),
    }), args.out)
    return 0 if failures == 0 else 1


def cmd_aggregate(args) -> int:
    seq = _sequence(args)
    pool = WeightedPool.full(args.k, args.alphabet, args.lam, args.mode)
    result = run_aggregator(pool, seq)
    best, witness = best_expert_loss(args.k, args.alphabet, seq)
    n = predictor_count(args.k, args.alphabet)
    bound = mistake_bound(n, best, args.lam) if args.lam > 1 else None
    emit(dumps({
        "config": _resolved(args),
        "trace": result.trace.to_dict(),
        "mistakes": result.trace.cumulative_loss,
        "best_expert_loss": best,
        "best_expert_index": witness,
        "bound": None if bound is None else {"c1": bound.c1, "c2": bound.c2, "value": bound.bound},
        "bound_holds": None if bound is None else bound.holds(result.trace.cumulative_loss),
    }), args.out)
    return 0


def cmd_network(args) -> int:
    seq = _sequence(args)
    trace = run_network(args.k, args.alphabet, args.lam, seq, args.mode)
    emit(dumps({"config": _resolved(args), "trace": trace.to_dict(), "mistakes": trace.cumulative_loss}), args.out)
    return 0


def cmd_compare(args) -> int:
    seq = _sequence(args)
    report = compare(ComparisonConfig(args.k, args.alphabet, args.lam, seq, args.mode))
    payload = report.to_dict()
    payload["config"] = _resolved(args)
    emit(dumps(payload), args.out)
    if args.expect == "agree" and report.verdict == DIVERGED:
        return 2
    return 0


def cmd_sweep(args) -> int:
    summary = sweep(args.k, args.alphabet, args.lam, args.max_length, args.mode,
                    op_budget=args.budget, workers=args.workers)
    config = _resolved(args)
    # worker count never changes the result, keep it out of the bytes
    config.pop("workers", None)
    summary["config"] = config
    emit(summary_json(summary), args.out)
    return 0


def cmd_profile(args) -> int:
    pattern = parse_sequence(args.pattern)
    if not pattern:
        raise UsageError("--pattern must hold at least one symbol")
    if args.alphabet is None:
        args.alphabet = max(pattern) + 1
    curve = profile(pattern, args.kmax, args.alphabet, workers=args.workers)
    if args.format == "csv":
        config = _resolved(args)
        config.pop("workers", None)
        header = "# config: " + json.dumps(config, sort_keys=True) + "\n"
        emit(header + curve.to_csv(), args.out)
    else:
        emit(dumps({
            "config": _resolved(args),
            "pattern": format_sequence(pattern),
            "points": [
                {"K": p.k, "rate": format_rational(p.rate), "witness_index": p.witness,
                 "transient_loss": p.transient_loss, "exact": p.exact, "method": p.method}
                for p in curve.points
            ],
        }), args.out)
    return 0


def cmd_generate(args) -> int:
    automaton = None
    if args.kind == AUTOMATON:
        if args.automaton_index is None or args.automaton_k is None:
            raise UsageError("automaton-filtered needs --automaton-k and --automaton-index")
        automaton = decode(args.automaton_index, args.automaton_k, args.alphabet)
    pattern = parse_sequence(args.pattern) if args.pattern else None
    spec = GeneratorSpec(args.kind, args.length, args.alphabet, pattern, args.seed, automaton)
    try:
        seq = generate(spec)
    except ValueError as exc:
        raise UsageError(str(exc))
    if args.format == "json":
        emit(dumps({"config": _resolved(args), "sequence": [s + 1 for s in seq]}), args.out)
    else:
        emit(format_sequence(seq) + "\n", args.out)
    return 0


# -- parser ------------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kstate", description="Finite-state predictor aggregation experiments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, sequence=True, lam=True, mode=True):
        p.add_argument("--k", type=int, required=True, help="number of states K")
        p.add_argument("--alphabet", type=int, required=True, help="alphabet size |A|")
        if lam:
            p.add_argument("--lambda", dest="lam", type=_lam, default=Fraction(2), help="reward factor, e.g. 3/2")
        if mode:
            p.add_argument("--mode", choices=[EXACT, FLOAT], default=EXACT)
        if sequence:
            p.add_argument("--sequence", help="inline sequence, e.g. a1a2a1")
            p.add_argument("--sequence-file", help="file holding a sequence")
        p.add_argument("--out", help="output path (default stdout)")

    p = sub.add_parser("enumerate", help="count K-state predictors, optionally audit indexing")
    common(p, sequence=False, lam=False, mode=False)
    p.add_argument("--audit", type=int, default=0, help="round-trip the first N indices")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("aggregate", help="weighted majority over all K-state predictors")
    common(p)
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("network", help="run the reduced K-node network")
    common(p)
    p.set_defaults(func=cmd_network)

    p = sub.add_parser("compare", help="pool vs network on one sequence")
    common(p)
    p.add_argument("--expect", choices=["agree"], help="exit 2 if the verdict is 'diverged'")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep", help="compare on every sequence of a given length")
    common(p, sequence=False)
    p.add_argument("--max-length", type=int, required=True)
    p.add_argument("--budget", type=int, default=10**9, help="member-step budget")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("profile", help="best error rate of K-state predictors on a periodic pattern")
    p.add_argument("--pattern", required=True, help="one period, e.g. a1a1a2")
    p.add_argument("--kmax", type=int, required=True)
    p.add_argument("--alphabet", type=int, default=None, help="defaults to the largest symbol in the pattern")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("generate", help="emit a sequence")
    p.add_argument("--kind", choices=KINDS, required=True)
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--alphabet", type=int, default=2)
    p.add_argument("--pattern")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--automaton-k", type=int)
    p.add_argument("--automaton-index", type=int)
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    try:
        return args.func(args)
    except (UsageError, GuardError, BudgetExceeded, ValueError, IndexError, MemoryError, OverflowError) as exc:
        print(f"kstate {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"kstate {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
