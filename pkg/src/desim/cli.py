"""Command line front end: run scenarios, sweep waiting times, validate.

Exit codes: 0 success, 1 usage error, 2 simulation contract error (an
unhandled process failure or an in-run argument violation). Deadlock of the
classic party is a normal, expected outcome and exits 0 with a report line.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import IO, Iterable

from .kernel import Environment, KernelError
from .scenarios import (
    VARIANTS,
    CounterConfig,
    TraceRecord,
    build_party,
    counter_scenario,
    detect_deadlock,
)
from .stats import MM1Params, mm1_expected_wait, mm1_simulate, sweep, to_csv

__all__ = ["main", "emit_trace", "console_main"]

SCENARIOS = VARIANTS + ("counter",)

# Default time precision in human output: the counter model is traditionally
# reported at one decimal, the philosopher traces at six.
DEFAULT_PRECISION = {"counter": 1}
FALLBACK_PRECISION = 6

KS_CRITICAL_1PCT_10K = 0.01628  # 1.628 / sqrt(10_000)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # noqa: D102 - argparse hook
        raise _UsageError(message)


def emit_trace(records: Iterable[TraceRecord], fmt: str = "human",
               precision: int = 6) -> str:
    """Render trace records, one per line; empty input yields empty output."""
    if fmt == "human":
        lines = [f"{r.actor} {r.message} @{r.time:.{precision}f}" for r in records]
    elif fmt == "jsonl":
        lines = [
            json.dumps({"time": r.time, "actor": r.actor, "message": r.message})
            for r in records
        ]
    else:
        raise ValueError(f"unknown trace format {fmt!r}")
    if not lines:
        return ""
    return "\n".join(lines) + "\n"


def _parse_n_range(text: str) -> list[int]:
    """Accept '5' or an inclusive range 'A..B'."""
    if ".." in text:
        lo_text, _, hi_text = text.partition("..")
        lo, hi = int(lo_text), int(hi_text)
        if hi < lo:
            raise ValueError(f"empty range {text!r}")
        return list(range(lo, hi + 1))
    return [int(text)]


def _build_parser() -> _Parser:
    parser = _Parser(prog="desim", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario and print its trace")
    run.add_argument("--scenario", required=True, choices=SCENARIOS)
    run.add_argument("--n", type=int, default=None,
                     help="party size (default 5) or customer count (default 10)")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--until", type=float, default=None,
                     help="time horizon; default runs to exhaustion")
    run.add_argument("--diag", action="store_true",
                     help="emit per-event trace lines for philosopher scenarios")
    run.add_argument("--format", choices=("human", "jsonl"), default="human")
    run.add_argument("--precision", type=int, default=None,
                     help="decimals for times in human output")
    run.add_argument("--output", default=None, help="file path; default stdout")

    swp = sub.add_parser("sweep", help="waiting time vs party size, CSV output")
    swp.add_argument("--scenario", required=True, choices=VARIANTS)
    swp.add_argument("--n", default="2..19",
                     help="party size or inclusive range 'A..B' (default 2..19)")
    swp.add_argument("--until", type=float, default=50000.0)
    swp.add_argument("--seeds", type=int, default=10,
                     help="number of base seeds (0..k-1) per cell")
    swp.add_argument("--workers", type=int, default=1,
                     help="parallel cell runners; rows stay in (n, seed) order")
    swp.add_argument("--format", choices=("csv",), default="csv")
    swp.add_argument("--output", default=None)

    val = sub.add_parser("validate", help="known-answer checks of the kernel")
    val.add_argument("--customers", type=int, default=100_000)
    val.add_argument("--seed", type=int, default=0)
    return parser


def _write(stream: IO[str], path: str | None, text: str) -> None:
    if path is None:
        stream.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _cmd_run(args, stdout: IO[str]) -> int:
    precision = args.precision
    if precision is None:
        precision = DEFAULT_PRECISION.get(args.scenario, FALLBACK_PRECISION)
    if precision < 0:
        raise _UsageError("--precision must be >= 0")
    if args.until is not None and args.until < 0:
        raise _UsageError("--until must be >= 0")

    env = Environment(args.seed)
    out: list[str] = []
    if args.scenario == "counter":
        n = 10 if args.n is None else args.n
        if n < 1:
            raise _UsageError("--n must be >= 1 for the counter scenario")
        result = counter_scenario(env, CounterConfig(n_customers=n), args.until)
        out.append(emit_trace(result.trace, args.format, precision))
    else:
        n = 5 if args.n is None else args.n
        if n < 2:
            raise _UsageError("--n must be >= 2 for a philosopher party")
        trace = [] if args.diag else None
        party = build_party(env, n, args.scenario, trace=trace)
        outcome = env.run(args.until)
        if trace is not None:
            out.append(emit_trace(trace, args.format, precision))
        if args.format == "human":
            counts = [c.count for c in party.chopsticks]
            mean_waiting = sum(ph.waiting for ph in party.philosophers) / n
            if outcome.exhausted and detect_deadlock(party.chopsticks):
                out.append(f"DEADLOCK detected at t={outcome.at:.{precision}f}; "
                           f"counts={counts}\n")
            elif outcome.exhausted:
                out.append(f"exhausted at t={outcome.at:.{precision}f}\n")
            else:
                out.append(f"reached horizon at t={outcome.at:.{precision}f}\n")
            out.append(f"mean waiting time {mean_waiting:.{precision}f}\n")
    _write(stdout, args.output, "".join(out))
    return 0


def _cmd_sweep(args, stdout: IO[str]) -> int:
    try:
        ns = _parse_n_range(args.n)
    except ValueError as exc:
        raise _UsageError(str(exc)) from None
    if min(ns) < 2:
        raise _UsageError("party sizes must be >= 2")
    if args.seeds < 1:
        raise _UsageError("--seeds must be >= 1")
    if not args.until > 0:
        raise _UsageError("--until must be > 0")
    if args.workers < 1:
        raise _UsageError("--workers must be >= 1")
    results = sweep(args.scenario, ns, args.until, range(args.seeds),
                    workers=args.workers)
    _write(stdout, args.output, to_csv(results))
    return 0


def _cmd_validate(args, stdout: IO[str]) -> int:
    checks: list[tuple[str, bool, str]] = []

    from .rng import Rng
    import math

    rng = Rng(args.seed)
    draws = sorted(rng.expovariate_mean(10.0) for _ in range(10_000))
    n = len(draws)
    ks = 0.0
    for i, x in enumerate(draws):
        cdf = 1.0 - math.exp(-x / 10.0)
        ks = max(ks, (i + 1) / n - cdf, cdf - i / n)
    checks.append((
        "exponential draws vs analytic CDF (KS, 1% level)",
        ks < KS_CRITICAL_1PCT_10K,
        f"statistic {ks:.5f} vs bound {KS_CRITICAL_1PCT_10K}",
    ))

    for lam, mu in ((0.05, 0.1), (0.01, 0.1)):
        params = MM1Params(lam, mu)
        expected = mm1_expected_wait(params)
        observed = mm1_simulate(params, args.customers, args.seed)
        within = abs(observed - expected) <= 0.1 * expected
        checks.append((
            f"M/M/1 mean queue wait (arrival {lam}, service {mu})",
            within,
            f"observed {observed:.4f} vs expected {expected:.4f} (10% band)",
        ))

    failed = False
    for name, ok, detail in checks:
        stdout.write(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}\n")
        failed = failed or not ok
    return 2 if failed else 0


def main(argv: list[str] | None = None, stdout: IO[str] | None = None,
         stderr: IO[str] | None = None) -> int:
    stdout = stdout if stdout is not None else sys.stdout
    stderr = stderr if stderr is not None else sys.stderr
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "run":
            return _cmd_run(args, stdout)
        if args.command == "sweep":
            return _cmd_sweep(args, stdout)
        return _cmd_validate(args, stdout)
    except _UsageError as exc:
        stderr.write(f"usage error: {exc}\n")
        return 1
    except (KernelError, ValueError) as exc:
        stderr.write(f"simulation error: {exc}\n")
        return 2


def console_main() -> None:
    sys.exit(main())
