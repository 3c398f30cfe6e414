"""Command-line front end.

Exit codes: 0 success, 1 a verify criterion failed, 2 invalid input,
3 the request exceeds an exhaustive-enumeration guard.
"""
from __future__ import annotations

import argparse
import math
import sys
from typing import Any, Callable, Sequence

from cardcyclic import acceptance, io, limits
from cardcyclic.exact import (
    TABLE_MAX_N,
    SizeError,
    exact_table,
    first_pos_prob,
    last_pos_prob,
    separation_distance,
    tv_to_uniform,
)
from cardcyclic.montecarlo import (
    WalkConfig,
    convolution_walk,
    estimate_event_A,
    joint_position_sample,
    sample_first_card_hist,
    sample_last_card_hist,
    sample_position_hist,
)

EXIT_OK, EXIT_FAILED, EXIT_INVALID, EXIT_SIZE = 0, 1, 2, 3
GRID_MAX_POINTS = 10**6


class UsageError(ValueError):
    pass


def parse_grid(text: str) -> list[float]:
    """``a:b:step`` to the points ``a, a + step, ..., <= b``."""
    try:
        a, b, step = (float(t) for t in text.split(":"))
    except ValueError:
        raise UsageError(f"malformed grid {text!r}, expected a:b:step") from None
    if not (math.isfinite(a) and math.isfinite(b) and step > 0 and b >= a):
        raise UsageError(f"malformed grid {text!r}")
    count = math.floor((b - a) / step + 1e-9) + 1
    if count > GRID_MAX_POINTS:
        raise UsageError(f"grid has {count} points, limit is {GRID_MAX_POINTS}")
    return [min(b, round(a + i * step, 12)) for i in range(count)]


def _need(args: argparse.Namespace, *names: str) -> None:
    missing = [f"--{n}" for n in names if getattr(args, n, None) is None]
    if missing:
        raise UsageError(f"{args.command} needs {', '.join(missing)}")


def _prob_cols(p) -> dict[str, Any]:
    if p.is_exact:
        return {"numerator": p.numerator, "denominator": p.denominator, "float": p.value, "mode": "exact"}
    return {"numerator": "", "denominator": "", "float": p.value, "mode": "log"}


# --- exact -------------------------------------------------------------------


def cmd_exact(args):
    if args.n < 1:
        raise UsageError("--n must be positive")
    if args.n > TABLE_MAX_N:
        raise SizeError(f"exact table limited to n <= {TABLE_MAX_N} ({TABLE_MAX_N}! = 40320 permutations)")
    table = exact_table(args.n)
    rows = [
        {"permutation": str(s), "numerator": p.numerator, "denominator": p.denominator, "float": p.value}
        for s, p in table.items()
    ]
    tv, sep = tv_to_uniform(args.n, table), separation_distance(args.n)
    summary = {"tv_to_uniform": tv, "tv_float": float(tv), "separation": sep, "separation_float": float(sep)}
    return rows, {"command": "exact", "n": args.n}, summary


# --- marginal ----------------------------------------------------------------


def cmd_marginal(args):
    n = args.n
    if n < 1:
        raise UsageError("--n must be positive")
    if args.all == (args.j is not None):
        raise UsageError("give exactly one of --j or --all")
    cards = range(1, n + 1) if args.all else [args.j]
    fn = first_pos_prob if args.which == "first" else last_pos_prob
    rows = []
    for j in cards:
        if not 1 <= j <= n:
            raise UsageError(f"--j {j} outside 1..{n}")
        p = fn(n, j, args.mode)
        row = {"j": j, **_prob_cols(p)}
        if args.rescale:
            row["n_p"] = n * p.value
        rows.append(row)
    config = {"command": "marginal", "n": n, "which": args.which, "mode": args.mode, "rescale": args.rescale}
    return rows, config, None


# --- limits ------------------------------------------------------------------


def _in_unit(name: str, v: float | None) -> float:
    if v is None:
        raise UsageError(f"--{name} is required for this kind")
    if not 0.0 <= v <= 1.0:
        raise UsageError(f"--{name} must lie in [0, 1]")
    return v


LIMIT_KINDS: dict[str, tuple[str, str, Callable[[argparse.Namespace], Callable[[float], float]]]] = {
    # kind: (grid variable, value column, builder)
    "G": ("y", "G", lambda a: lambda y: limits.G(_in_unit("b", a.b), y)),
    "F": ("x", "F", lambda a: lambda x: limits.F(_in_unit("b", a.b), x)),
    "f": ("x", "f", lambda a: lambda x: limits.f_density(_in_unit("b", a.b), x)),
    "E": ("b", "E", lambda a: limits.expected_pos),
    "h": ("b", "h", lambda a: lambda b: limits.h_density(_in_unit("x", a.x), b)),
    "gamma": ("d", "gamma", lambda a: lambda d: limits.gamma_limit(_in_unit("b", a.b), d)),
    "final": ("d", "final_pos", lambda a: lambda d: limits.final_pos_map(_in_unit("b", a.b), d)),
    "xbreak": ("b", "x_break", lambda a: limits.x_break),
    "first": ("x", "density", lambda a: limits.first_pos_limit("macroscopic")),
    "first-meso": ("x", "density", lambda a: limits.first_pos_limit("mesoscopic")),
    "last": ("x", "density", lambda a: limits.last_pos_limit().density),
    "pair": ("b2", "P", lambda a: lambda b2: limits.pair_inversion_prob(_in_unit("b", a.b), b2)),
}


def cmd_limits(args):
    config = {"command": "limits", "kind": args.kind}
    if args.kind == "constants":
        c = limits.named_constants().as_dict()
        c["E_b_star"] = limits.expected_pos(c["b_star"])
        c["E_0"] = limits.expected_pos(0.0)
        rows = [{"name": k, "value": round(v, 12)} for k, v in c.items()]
        return rows, config, None
    var, col, build = LIMIT_KINDS[args.kind]
    if args.grid is None:
        raise UsageError("--grid a:b:step is required")
    fn = build(args)
    grid = parse_grid(args.grid)
    if args.kind != "first-meso" and (grid[0] < 0 or grid[-1] > 1):
        raise UsageError("grid must lie in [0, 1]")
    config.update({"grid": args.grid, "b": args.b, "x": args.x})
    return [{var: g, col: fn(g)} for g in grid], config, None


# --- simulate ----------------------------------------------------------------


def _check_sim(args) -> None:
    if args.n < 1:
        raise UsageError("--n must be positive")
    if args.reps < 1:
        raise UsageError("--reps must be positive")
    if not 0 <= args.seed < 2**64:
        raise UsageError("--seed must fit in 64 unsigned bits")
    if args.threads < 1:
        raise UsageError("--threads must be positive")


def _hist_output(h, args):
    config = {"command": "simulate", "kind": args.kind, **h.config()}
    return h.rows(), config, None


def cmd_simulate(args):
    _check_sim(args)
    n, reps, seed, threads = args.n, args.reps, args.seed, args.threads
    kind = args.kind
    if kind == "position":
        _need(args, "card")
        if not 1 <= args.card <= n:
            raise UsageError(f"--card {args.card} outside 1..{n}")
        return _hist_output(sample_position_hist(n, args.card, reps, seed, threads), args)
    if kind == "first":
        return _hist_output(sample_first_card_hist(n, reps, seed, threads), args)
    if kind == "last":
        return _hist_output(sample_last_card_hist(n, reps, seed, threads), args)
    if kind == "joint":
        _need(args, "cards")
        try:
            cards = [int(c) for c in args.cards.split(",")]
        except ValueError:
            raise UsageError(f"--cards must be comma-separated integers, got {args.cards!r}") from None
        if len(cards) < 2:
            raise UsageError("--cards needs at least two cards")
        sample = joint_position_sample(n, cards, reps, seed, threads)
        rows = [
            {"card": c, "position": k, "count": int(v)}
            for i, c in enumerate(sample.cards)
            for k, v in enumerate(sample.marginal(i).bins, start=1)
            if v
        ]
        summary = {
            "independence_gap": sample.independence_gap(0, 1),
            "left_of_frequency": sample.left_of_frequency(0, 1),
            "left_of_limit": limits.pair_inversion_prob(min(1.0, cards[0] / n), min(1.0, cards[1] / n)),
        }
        config = {"command": "simulate", "kind": kind, "n": n, "cards": cards, "reps": reps, "seed": seed}
        return rows, config, summary
    if kind == "event":
        _need(args, "M", "L")
        if not args.M > 0:
            raise UsageError("--M must be positive")
        if not 1 <= args.L < n:
            raise UsageError("--L must satisfy 1 <= L < n")
        est = estimate_event_A(n, args.M, args.L, reps, seed, threads)
        rows = [{
            "n": n, "M": args.M, "L": args.L, "reps": reps, "hits": est.hits,
            "estimate": est.estimate, "stderr": est.stderr, "uniform": est.uniform, "gap": est.gap,
        }]
        config = {"command": "simulate", "kind": kind, "n": n, "M": args.M, "L": args.L, "reps": reps, "seed": seed}
        return rows, config, None
    if kind == "walk":
        _need(args, "m")
        if args.m < 1:
            raise UsageError("--m must be at least 1")
        report = convolution_walk(WalkConfig(n, args.m, reps, seed), threads)
        rows = [
            {
                "m": s.m,
                "tv": s.tv,
                "stderr": s.stderr,
                "statistic": s.statistic,
                "tv_numerator": s.tv_exact.numerator if s.tv_exact is not None else "",
                "tv_denominator": s.tv_exact.denominator if s.tv_exact is not None else "",
            }
            for s in report.steps
        ]
        config = {
            "command": "simulate", "kind": kind, "n": n, "m": args.m,
            "reps": reps if not report.exact else None, "seed": seed if not report.exact else None,
            "result": report.kind,
        }
        return rows, config, None
    raise UsageError(f"unknown simulate kind {kind!r}")


# --- verify ------------------------------------------------------------------


def cmd_verify(args) -> int:
    if args.threads < 1:
        raise UsageError("--threads must be positive")
    numbers = None
    if args.only:
        try:
            numbers = [int(t) for t in args.only.split(",")]
        except ValueError:
            raise UsageError("--only takes comma-separated criterion numbers") from None
        unknown = [k for k in numbers if k not in acceptance.CRITERIA]
        if unknown:
            raise UsageError(f"unknown criteria {unknown}")
    results = acceptance.run_all(numbers, args.threads, echo=lambda s: print(s, flush=True))
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed")
    return EXIT_OK if passed == len(results) else EXIT_FAILED


# --- parser ------------------------------------------------------------------


def _output_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None, help="output file (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cardcyclic", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exact", help="full probability table for n <= 8")
    p.add_argument("--n", type=int, required=True)
    _output_flags(p)

    p = sub.add_parser("marginal", help="first/last position marginals")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--which", choices=("first", "last"), required=True)
    p.add_argument("--j", type=int)
    p.add_argument("--all", action="store_true")
    p.add_argument("--rescale", action="store_true", help="add an n*p column")
    p.add_argument("--mode", choices=("auto", "exact", "log"), default="auto")
    _output_flags(p)

    p = sub.add_parser("limits", help="tabulate limit laws and constants")
    p.add_argument("--kind", choices=(*LIMIT_KINDS, "constants"), required=True)
    p.add_argument("--grid")
    p.add_argument("--b", type=float)
    p.add_argument("--x", type=float)
    _output_flags(p)

    p = sub.add_parser("simulate", help="seeded Monte Carlo")
    p.add_argument("kind", choices=("position", "first", "last", "joint", "event", "walk"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--card", type=int)
    p.add_argument("--cards")
    p.add_argument("--M", type=float)
    p.add_argument("--L", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--reps", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    _output_flags(p)

    p = sub.add_parser("verify", help="run the acceptance checks")
    p.add_argument("--only", help="comma-separated criterion numbers")
    p.add_argument("--threads", type=int, default=1)
    return parser


COMMANDS = {"exact": cmd_exact, "marginal": cmd_marginal, "limits": cmd_limits, "simulate": cmd_simulate}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            return cmd_verify(args)
        rows, config, summary = COMMANDS[args.command](args)
        text = io.render(rows, config, args.format, summary)
    except SizeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    io.write(text, args.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
