"""Reference models built on the kernel: dining philosophers and a service counter.

Four party variants are provided. ``classic`` philosophers pick up their
assigned chopstick pair as given, which lets the party deadlock. ``ordered``
philosophers sort their pair by a global creation order, which provably
cannot deadlock. ``bowl`` adds a shared rice container drained by meals and
restocked periodically by a chef. ``impatient`` philosophers additionally cap
how long they wait for rice, give the chopsticks back when they give up, and
demand a bigger meal on the next attempt.

The counter scenario models direct process interaction instead of resource
sharing: customers queue tickets into a service line and wake the operator by
interrupting it when it has dozed off on an empty line.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Optional

from .kernel import Environment, Event, RunOutcome, any_of
from .process import Interrupted, Process, spawn
from .resources import Container, Resource

__all__ = [
    "PhilosopherState",
    "PhilosopherConfig",
    "ChefConfig",
    "CounterConfig",
    "TraceRecord",
    "GaveUp",
    "CustomerFailed",
    "Philosopher",
    "Chef",
    "Party",
    "VARIANTS",
    "build_party",
    "detect_deadlock",
    "CustomerRecord",
    "CounterResult",
    "counter_scenario",
]

VARIANTS = ("classic", "ordered", "bowl", "impatient")


class PhilosopherState(Enum):
    THINKING = "thinking"
    HUNGRY = "hungry"
    HUNGRY_WITH_ONE = "hungry-with-one-chopstick"
    EATING = "eating"


# Legal state transitions; the give-up edge only occurs for impatient diners.
ALLOWED_TRANSITIONS = {
    (PhilosopherState.THINKING, PhilosopherState.HUNGRY),
    (PhilosopherState.HUNGRY, PhilosopherState.HUNGRY_WITH_ONE),
    (PhilosopherState.HUNGRY_WITH_ONE, PhilosopherState.EATING),
    (PhilosopherState.EATING, PhilosopherState.THINKING),
}
GIVE_UP_TRANSITION = (PhilosopherState.HUNGRY_WITH_ONE, PhilosopherState.THINKING)


class TraceRecord(NamedTuple):
    """One diagnostic line: who did what, when."""

    time: float
    actor: str
    message: str


@dataclass(frozen=True)
class PhilosopherConfig:
    """Timing constants and behavior flags for one philosopher.

    Delays are means of exponential distributions except the fixed pause
    before reaching for the second chopstick. ``max_food_wait`` only matters
    for impatient diners and defaults to half the chef's restock period.
    """

    think_mean: float = 10.0
    eat_mean: float = 10.0
    second_pick_delay: float = 1.0
    portion: float = 20.0
    max_food_wait: float = 75.0
    ordered: bool = False
    impatient: bool = False

    def __post_init__(self) -> None:
        for name in ("think_mean", "eat_mean", "second_pick_delay",
                     "portion", "max_food_wait"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class ChefConfig:
    restock_period: float = 150.0

    def __post_init__(self) -> None:
        if not self.restock_period > 0:
            raise ValueError("restock_period must be positive")


@dataclass(frozen=True)
class CounterConfig:
    service_delay: float = 10.0
    n_customers: int = 10
    fail_one_in: int = 10

    def __post_init__(self) -> None:
        if not self.service_delay > 0:
            raise ValueError("service_delay must be positive")
        if self.n_customers < 1:
            raise ValueError("n_customers must be >= 1")
        if self.fail_one_in < 1:
            raise ValueError("fail_one_in must be >= 1")


class GaveUp(Exception):
    """A meal attempt timed out waiting for food.

    Carries the two chopstick request handles so the parent loop can still
    release them: once the attempt subprocess has failed, the exception
    payload is the only way the handles can travel back.
    """

    @property
    def handles(self):
        return self.args


class CustomerFailed(Exception):
    """Service of a customer's ticket failed."""


class Philosopher:
    """One diner: think, grab two chopsticks (and maybe rice), eat, repeat.

    Instruments itself with the accumulated ``waiting`` time between wanting
    to eat and having everything needed to eat, the meal/give-up counters,
    and (optionally) a state transition log and trace records.
    """

    def __init__(self, env: Environment, chopsticks, my_id: int,
                 config: PhilosopherConfig | None = None,
                 bowl: Container | None = None,
                 trace: list[TraceRecord] | None = None,
                 record_transitions: bool = False):
        config = config or PhilosopherConfig()
        pair = tuple(chopsticks)
        if len(pair) != 2:
            raise ValueError("a philosopher needs exactly two chopsticks")
        if config.impatient and bowl is None:
            raise ValueError("impatient philosophers need a bowl to give up on")
        if config.ordered:
            pair = tuple(sorted(pair, key=lambda c: c.serial))
        self.env = env
        self.id = my_id
        self.config = config
        self.chopsticks = pair
        self.bowl = bowl
        self.waiting = 0.0
        self.meals = 0
        self.meal_size = config.portion
        self.give_ups = 0        # consecutive give-ups since the last meal
        self.total_give_ups = 0
        self.rice_consumed = 0.0
        self.state = PhilosopherState.THINKING
        self.transitions: list[tuple[float, PhilosopherState, PhilosopherState]] | None = (
            [] if record_transitions else None)
        self._trace = trace
        self.handle = spawn(env, self._run(), name=f"philosopher-{my_id}")

    def _diag(self, message: str) -> None:
        trace = self._trace
        if trace is not None:
            trace.append(TraceRecord(self.env.now, f"P{self.id}", message))

    def _enter(self, state: PhilosopherState) -> None:
        if self.transitions is not None:
            self.transitions.append((self.env.now, self.state, state))
        self.state = state

    def _run(self):
        env = self.env
        cfg = self.config
        rng = env.rng
        while True:
            yield env.timeout(rng.expovariate_mean(cfg.think_mean))
            self._enter(PhilosopherState.HUNGRY)
            attempt = spawn(env, self._get_hungry(self.meal_size),
                            name=f"philosopher-{self.id}-attempt")
            try:
                rq1, rq2 = yield attempt
            except GaveUp as gave_up:
                rq1, rq2 = gave_up.handles
                self.give_ups += 1
                self.total_give_ups += 1
                self.meal_size += cfg.portion
                self._enter(PhilosopherState.THINKING)
            else:
                self._enter(PhilosopherState.EATING)
                self.meals += 1
                yield env.timeout(rng.expovariate_mean(cfg.eat_mean))
                self.meal_size = cfg.portion
                self.give_ups = 0
                self._enter(PhilosopherState.THINKING)
            self.chopsticks[0].release(rq1)
            self.chopsticks[1].release(rq2)
            self._diag("released the chopsticks")

    def _get_hungry(self, meal_size: float):
        env = self.env
        cfg = self.config
        start_waiting = env.now
        self._diag("requested chopstick")
        rq1 = self.chopsticks[0].request()
        yield rq1
        self._enter(PhilosopherState.HUNGRY_WITH_ONE)
        self._diag("obtained chopstick")
        yield env.timeout(cfg.second_pick_delay)
        self._diag("requested another chopstick")
        rq2 = self.chopsticks[1].request()
        yield rq2
        self._diag("obtained another chopstick")
        if self.bowl is not None:
            if cfg.impatient:
                request = self.bowl.get(meal_size)
                yield any_of(env, [request, env.timeout(cfg.max_food_wait)])
                if request.processed:
                    self._diag("reserved food")
                    self.rice_consumed += meal_size
                else:
                    self._diag("gave up")
                    self.waiting += env.now - start_waiting
                    # The abandoned withdrawal must not drain stock later.
                    self.bowl.cancel_get(request)
                    raise GaveUp(rq1, rq2)
            else:
                yield self.bowl.get(meal_size)
                self._diag("reserved food")
                self.rice_consumed += meal_size
        self.waiting += env.now - start_waiting
        return rq1, rq2


class Chef:
    """Tops the bowl back up to capacity every ``restock_period`` time units."""

    def __init__(self, env: Environment, bowl: Container,
                 config: ChefConfig | None = None):
        self.env = env
        self.bowl = bowl
        self.config = config or ChefConfig()
        self.total_restocked = 0.0
        self.handle = spawn(env, self._replenish(), name="chef")

    def _replenish(self):
        env = self.env
        bowl = self.bowl
        period = self.config.restock_period
        while True:
            yield env.timeout(period)
            if bowl.level < bowl.capacity:
                amount = bowl.capacity - bowl.level
                yield bowl.put(amount)
                self.total_restocked += amount


@dataclass
class Party:
    philosophers: list[Philosopher]
    chopsticks: list[Resource]
    bowl: Container | None = None
    chef: Chef | None = None


BOWL_CAPACITY = 1000.0


def build_party(env: Environment, n: int, variant: str,
                trace: list[TraceRecord] | None = None,
                record_transitions: bool = False) -> Party:
    """Wire ``n`` philosophers and chopsticks in a ring for one variant.

    Philosopher ``i`` is handed (chopstick ``i``, chopstick ``(i+1) mod n``);
    the bowl variants add a full rice container and a chef.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    if not isinstance(n, int) or n < 2:
        raise ValueError(f"a party needs at least 2 philosophers, got {n!r}")
    bowl = chef = None
    if variant in ("bowl", "impatient"):
        bowl = Container(env, init=BOWL_CAPACITY, capacity=BOWL_CAPACITY)
        chef = Chef(env, bowl)
    config = PhilosopherConfig(ordered=variant != "classic",
                               impatient=variant == "impatient")
    chopsticks = [Resource(env, capacity=1) for _ in range(n)]
    philosophers = [
        Philosopher(env, (chopsticks[i], chopsticks[(i + 1) % n]), i,
                    config, bowl, trace, record_transitions)
        for i in range(n)
    ]
    return Party(philosophers, chopsticks, bowl, chef)


def detect_deadlock(chopsticks) -> bool:
    """Deadlock heuristic for an exhausted run: two or more chopsticks held."""
    return sum(1 for c in chopsticks if c.count > 0) >= 2


@dataclass
class CustomerRecord:
    index: int
    arrival: Optional[float] = None
    service_start: Optional[float] = None
    departure: Optional[float] = None
    failed: bool = False


@dataclass
class CounterResult:
    trace: list[TraceRecord]
    customers: list[CustomerRecord]
    outcome: RunOutcome


def counter_scenario(env: Environment, config: CounterConfig | None = None,
                     until: float | None = None) -> CounterResult:
    """Run the service-counter model and return its trace and per-customer log.

    Customers arrive with exponential interarrival gaps, append a ticket
    event to the service line and wake the operator if it fell asleep. The
    operator serves the head ticket after exactly ``service_delay``, failing
    one service in ``fail_one_in`` on average; with nothing to do it sleeps
    on an event nobody ever triggers until a customer interrupts it.
    """
    cfg = config or CounterConfig()
    trace: list[TraceRecord] = []
    line: deque[Event] = deque()
    records = [CustomerRecord(i) for i in range(cfg.n_customers)]
    owner: dict[Event, CustomerRecord] = {}
    idle = False

    def emit(actor: str, message: str) -> None:
        trace.append(TraceRecord(env.now, actor, message))

    def customer(record: CustomerRecord):
        record.arrival = env.now
        emit("Customer", "arrived")
        ticket = env.event()
        line.append(ticket)
        owner[ticket] = record
        if idle:
            counter_handle.interrupt()
        try:
            yield ticket
        except CustomerFailed:
            record.failed = True
            record.departure = env.now
            emit("Customer", "failed (and left)")
        else:
            record.departure = env.now
            emit("Customer", "left")

    def customer_generator():
        for record in records:
            spawn(env, customer(record), name=f"customer-{record.index}")
            yield env.timeout(env.rng.expovariate_mean(cfg.service_delay))

    def counter():
        nonlocal idle
        while True:
            if line:
                ticket = line.popleft()
                owner[ticket].service_start = env.now
                yield env.timeout(cfg.service_delay)
                if env.rng.randint(0, cfg.fail_one_in - 1) == cfg.fail_one_in - 1:
                    ticket.fail(CustomerFailed())
                else:
                    ticket.succeed()
            else:
                idle = True
                emit("The operator", "fell asleep")
                try:
                    yield env.event()
                except Interrupted:
                    idle = False
                    emit("The operator", "woke up")

    spawn(env, customer_generator(), name="customer-generator")
    counter_handle: Process = spawn(env, counter(), name="counter")
    outcome = env.run(until)
    return CounterResult(trace, records, outcome)
