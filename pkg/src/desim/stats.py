"""Replication harness: seeded runs, waiting-time sweeps, CSV, M/M/1 oracle.

Every cell of a sweep runs in a fresh environment under a seed derived by
hashing (base seed, variant, party size), so results do not depend on cell
order and any row can be reproduced in isolation. The M/M/1 single-server
queue, whose mean queue wait has the closed form lambda / (mu * (mu -
lambda)), serves as a known-answer check that the kernel, processes and
resources compose correctly.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterable, NamedTuple

from .kernel import Environment
from .process import spawn
from .resources import Resource
from .rng import Rng
from .scenarios import build_party, detect_deadlock

__all__ = [
    "Rng",
    "SweepResult",
    "simulate",
    "derive_seed",
    "sweep",
    "CSV_HEADER",
    "to_csv",
    "CsvRow",
    "parse_csv",
    "MM1Params",
    "mm1_expected_wait",
    "mm1_simulate",
]


@dataclass(frozen=True)
class SweepResult:
    """Waiting-time aggregate of one seeded party run.

    ``exhausted_at`` is the stop time when the run ran out of events before
    the horizon (the deadlock signature for the classic variant), else None.
    """

    variant: str
    n: int
    t: float
    seed: int
    mean_waiting: float
    deadlocked: bool
    per_philosopher: tuple[float, ...]
    exhausted_at: float | None = None


def simulate(n: int, t: float, variant: str = "ordered", seed: int = 0) -> SweepResult:
    """Run one fresh party for up to ``t`` time units and aggregate waiting."""
    if not isinstance(n, int) or n < 2:
        raise ValueError(f"party size must be an integer >= 2, got {n!r}")
    if not t > 0:
        raise ValueError(f"horizon must be > 0, got {t!r}")
    env = Environment(seed)
    party = build_party(env, n, variant)
    outcome = env.run(until=t)
    per = tuple(ph.waiting for ph in party.philosophers)
    deadlocked = outcome.exhausted and detect_deadlock(party.chopsticks)
    return SweepResult(
        variant=variant,
        n=n,
        t=float(t),
        seed=seed,
        mean_waiting=sum(per) / n,
        deadlocked=deadlocked,
        per_philosopher=per,
        exhausted_at=outcome.at if outcome.exhausted else None,
    )


def derive_seed(base_seed: int, variant: str, n: int) -> int:
    """Mix a base seed with the cell coordinates into an independent seed.

    SHA-256 over the decimal rendering of the inputs, truncated to 64 bits;
    stable across platforms and runs.
    """
    text = f"{base_seed}:{variant}:{n}".encode("ascii")
    return int.from_bytes(hashlib.sha256(text).digest()[:8], "big")


def _run_cell(cell: tuple[int, float, str, int]) -> SweepResult:
    n, t, variant, seed = cell
    return simulate(n, t, variant, seed)


def sweep(variant: str, n_values: Iterable[int], t: float,
          seeds: Iterable[int], workers: int | None = None) -> list[SweepResult]:
    """Cross product of party sizes and base seeds, one independent run each.

    Results are ordered by (n, seed position). Each cell's seed is derived
    from its own coordinates, so a cell rerun alone matches its sweep row and
    cells may run in parallel (``workers`` > 1) without affecting results.
    """
    ns = list(n_values)
    bases = list(seeds)
    if not ns or not bases:
        raise ValueError("sweep needs at least one party size and one seed")
    cells = [
        (n, t, variant, derive_seed(base, variant, n))
        for n in ns
        for base in bases
    ]
    if workers is not None and workers > 1:
        from multiprocessing import Pool

        with Pool(workers) as pool:
            return pool.map(_run_cell, cells, chunksize=1)
    return [_run_cell(cell) for cell in cells]


CSV_HEADER = "variant,n,t,seed,mean_waiting,deadlocked"


def to_csv(results: Iterable[SweepResult]) -> str:
    """Render sweep rows as CSV (UTF-8 text, LF endings, repr-exact floats)."""
    lines = [CSV_HEADER]
    for r in results:
        deadlocked = "true" if r.deadlocked else "false"
        lines.append(f"{r.variant},{r.n},{r.t!r},{r.seed},{r.mean_waiting!r},{deadlocked}")
    return "\n".join(lines) + "\n"


class CsvRow(NamedTuple):
    variant: str
    n: int
    t: float
    seed: int
    mean_waiting: float
    deadlocked: bool


def parse_csv(text: str) -> list[CsvRow]:
    """Parse sweep CSV back into rows; floats round-trip exactly."""
    lines = [line for line in text.split("\n") if line]
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError("missing or malformed CSV header")
    rows = []
    for line in lines[1:]:
        variant, n, t, seed, mean_waiting, deadlocked = line.split(",")
        if deadlocked not in ("true", "false"):
            raise ValueError(f"malformed deadlocked flag {deadlocked!r}")
        rows.append(CsvRow(variant, int(n), float(t), int(seed),
                           float(mean_waiting), deadlocked == "true"))
    return rows


@dataclass(frozen=True)
class MM1Params:
    """Single-server queue rates; requires stability (arrival < service)."""

    arrival_rate: float
    service_rate: float

    def __post_init__(self) -> None:
        if not 0 < self.arrival_rate < self.service_rate:
            raise ValueError(
                f"need 0 < arrival_rate < service_rate, got "
                f"{self.arrival_rate!r}, {self.service_rate!r}")


def mm1_expected_wait(params: MM1Params) -> float:
    """Closed-form mean time in queue: arrival / (service * (service - arrival))."""
    lam = params.arrival_rate
    mu = params.service_rate
    return lam / (mu * (mu - lam))


def mm1_simulate(params: MM1Params, n_customers: int, seed: int = 0) -> float:
    """Observed mean queue wait of ``n_customers`` through a capacity-1 server.

    Poisson arrivals at ``arrival_rate``, exponential service at
    ``service_rate``; the wait is measured from request to grant.
    """
    if n_customers < 0:
        raise ValueError(f"n_customers must be >= 0, got {n_customers!r}")
    if n_customers == 0:
        return 0.0
    env = Environment(seed)
    server = Resource(env, capacity=1)
    mean_service = 1.0 / params.service_rate
    mean_gap = 1.0 / params.arrival_rate
    waits: list[float] = []

    def customer():
        arrived = env.now
        grant = server.request()
        yield grant
        waits.append(env.now - arrived)
        yield env.timeout(env.rng.expovariate_mean(mean_service))
        server.release(grant)

    def arrivals():
        for i in range(n_customers):
            spawn(env, customer(), name=f"mm1-customer-{i}")
            yield env.timeout(env.rng.expovariate_mean(mean_gap))

    spawn(env, arrivals(), name="mm1-arrivals")
    env.run()
    return sum(waits) / len(waits)
