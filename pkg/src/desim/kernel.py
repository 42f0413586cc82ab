"""Simulation core: clock, future event list, event lifecycle, run loop.

An :class:`Environment` owns a monotone clock and a priority queue of
triggered events (the future event list). Everything else in the package
is layered on top of the four event-lifecycle primitives defined here:
create pending, trigger (schedule), process, and the success/failure
outcome that processing delivers to callbacks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from heapq import heappop, heappush
from typing import Any, Callable, Iterable, Optional

from .rng import Rng

__all__ = [
    "URGENT",
    "NORMAL",
    "EventState",
    "Event",
    "Environment",
    "RunOutcome",
    "KernelError",
    "LifecycleError",
    "UnhandledFailureError",
    "EventFailed",
    "Condition",
    "any_of",
    "all_of",
]

# Scheduling priorities: smaller runs earlier at equal time. Internal
# bookkeeping (process starts, interrupt deliveries) uses URGENT so it wins
# ties against ordinary timeouts and grants.
URGENT = 0
NORMAL = 1


class KernelError(Exception):
    """Base class for simulation contract violations."""


class LifecycleError(KernelError):
    """An event or handle was driven through an illegal state transition."""


class UnhandledFailureError(KernelError):
    """A failure outcome was processed with nobody observing it.

    Carries the original cause and, when the failed event was a process
    completion, the name of the failing process.
    """

    def __init__(self, cause: Any, process_name: str | None = None):
        self.cause = cause
        self.process_name = process_name
        who = f"process {process_name!r}" if process_name else "an event"
        super().__init__(f"unhandled failure in {who}: {cause!r}")


class EventFailed(Exception):
    """Delivered to a waiter when an event fails with a non-exception cause."""

    def __init__(self, cause: Any):
        self.cause = cause
        super().__init__(cause)


class EventState(Enum):
    PENDING = "pending"
    TRIGGERED = "triggered"
    PROCESSED = "processed"


# Cached members: enum attribute lookups are measurable in the event loop.
_PENDING = EventState.PENDING
_TRIGGERED = EventState.TRIGGERED
_PROCESSED = EventState.PROCESSED


class Event:
    """One-shot occurrence with a pending -> triggered -> processed lifecycle.

    A processed event carries exactly one outcome: success with a value or
    failure with a cause. Callbacks registered before processing fire exactly
    once, in registration order, when the event is processed.
    """

    __slots__ = ("env", "eid", "state", "callbacks", "_ok", "_value",
                 "_observed", "_sched_time", "_sched_priority")

    def __init__(self, env: "Environment"):
        self.env = env
        self.eid = eid = env._eid_counter
        env._eid_counter = eid + 1
        self.state = _PENDING
        self.callbacks: list[Callable[["Event"], None]] = []
        self._ok: bool | None = None
        self._value: Any = None
        self._observed = False
        self._sched_time: float | None = None
        self._sched_priority = NORMAL

    # -- observation --------------------------------------------------

    @property
    def pending(self) -> bool:
        return self.state is _PENDING

    @property
    def triggered(self) -> bool:
        return self.state is _TRIGGERED

    @property
    def processed(self) -> bool:
        """True iff the event has been processed (outcome delivered)."""
        return self.state is _PROCESSED

    @property
    def succeeded(self) -> bool:
        return self.state is _PROCESSED and self._ok is True

    @property
    def failed(self) -> bool:
        return self.state is _PROCESSED and self._ok is False

    @property
    def value(self) -> Any:
        """Success value; raises unless the event succeeded."""
        if not self.succeeded:
            raise LifecycleError(f"{self!r} has no success value")
        return self._value

    @property
    def failure_cause(self) -> Any:
        """Failure cause; raises unless the event failed."""
        if not self.failed:
            raise LifecycleError(f"{self!r} has no failure cause")
        return self._value

    @property
    def schedule_key(self) -> tuple[float, int, int] | None:
        """(time, priority, sequence) this event was queued under, if any."""
        if self._sched_time is None:
            return None
        return (self._sched_time, self._sched_priority, self.eid)

    # -- lifecycle ----------------------------------------------------

    def succeed(self, value: Any = None) -> None:
        """Set a success outcome and queue the event at the current time."""
        if self.state is not _PENDING:
            raise LifecycleError(f"cannot succeed {self!r}: not pending")
        self._ok = True
        self._value = value
        self.env.schedule(self)

    def fail(self, cause: Any) -> None:
        """Set a failure outcome and queue the event at the current time.

        The cause is delivered verbatim to waiters; if it is an exception
        instance it is raised as-is at their yield points, otherwise it is
        wrapped in :class:`EventFailed`.
        """
        if self.state is not _PENDING:
            raise LifecycleError(f"cannot fail {self!r}: not pending")
        self._ok = False
        self._value = cause
        self.env.schedule(self)

    def add_callback(self, callback: Callable[["Event"], None]) -> None:
        """Register a callback invoked with this event when it is processed."""
        if self.state is _PROCESSED:
            raise LifecycleError(f"cannot add a callback to processed {self!r}")
        self.callbacks.append(callback)

    # -- composition --------------------------------------------------

    def __or__(self, other: "Event") -> "Condition":
        return any_of(self.env, [self, other])

    def __and__(self, other: "Event") -> "Condition":
        return all_of(self.env, [self, other])

    def _process_name(self) -> str | None:
        # Overridden by Process so unhandled-failure diagnostics can name
        # the failing process.
        return None

    def __repr__(self) -> str:
        return f"<{type(self).__name__} #{self.eid} {self.state.value}>"


@dataclass(frozen=True)
class RunOutcome:
    """How a run ended: queue exhausted, or the time horizon was reached."""

    exhausted: bool
    at: float

    @property
    def reached_horizon(self) -> bool:
        return not self.exhausted


class Environment:
    """Single-threaded simulation environment.

    Owns the clock (``now``), the future event list, the event id counter
    and one seeded random stream. An environment must only ever be driven
    from one thread; independent environments are fully isolated and may
    run in parallel.
    """

    def __init__(self, seed: int = 0):
        self._now = 0.0
        self._queue: list[tuple[float, int, int, Event]] = []
        self._eid_counter = 0
        self.rng = Rng(seed)
        # Optional instrumentation: called with each event right after its
        # callbacks have run. Used by invariant-checking tests; None-cost
        # when unset.
        self.on_processed: Optional[Callable[[Event], None]] = None

    def _next_eid(self) -> int:
        eid = self._eid_counter
        self._eid_counter = eid + 1
        return eid

    @property
    def now(self) -> float:
        """Current simulation time."""
        return self._now

    def event(self) -> Event:
        """Create a fresh pending event owned by this environment."""
        return Event(self)

    def schedule(self, event: Event, priority: int = NORMAL,
                 delay: float = 0.0) -> None:
        """Queue a pending event for processing at ``now + delay``.

        Ties at equal time are broken by priority (smaller first), then by
        event creation sequence. An event already triggered or processed
        cannot be scheduled again.
        """
        if event.state is not _PENDING:
            raise LifecycleError(f"cannot schedule {event!r}: not pending")
        if event.env is not self:
            raise LifecycleError(f"{event!r} belongs to a different environment")
        if not (delay >= 0.0 and math.isfinite(delay)):
            raise ValueError(f"delay must be finite and >= 0, got {delay!r}")
        event.state = _TRIGGERED
        time = self._now + delay
        event._sched_time = time
        event._sched_priority = priority
        heappush(self._queue, (time, priority, event.eid, event))

    def timeout(self, delay: float, value: Any = None) -> Event:
        """Event that succeeds ``delay`` time units from now."""
        ev = Event(self)
        ev._ok = True
        ev._value = value
        self.schedule(ev, NORMAL, delay)
        return ev

    def step(self) -> bool:
        """Process the next queued event; returns False iff the queue is empty.

        Advances the clock to the event's scheduled time, marks it processed
        and runs its callbacks in registration order. A failure outcome that
        no waiter observes raises :class:`UnhandledFailureError`.
        """
        if not self._queue:
            return False
        entry = heappop(self._queue)
        event = entry[3]
        self._now = entry[0]
        event.state = _PROCESSED
        if event._ok is None:
            # Scheduled directly without an explicit outcome: plain success.
            event._ok = True
        callbacks = event.callbacks
        event.callbacks = ()  # type: ignore[assignment]
        for callback in callbacks:
            callback(event)
        if event._ok is False and not event._observed:
            raise UnhandledFailureError(event._value, event._process_name())
        if self.on_processed is not None:
            self.on_processed(event)
        return True

    def run(self, until: float | None = None) -> RunOutcome:
        """Step until the queue is empty or the next event lies beyond ``until``.

        Events scheduled exactly at ``until`` are processed. On reaching the
        horizon the clock is advanced to ``until``; if the queue empties
        strictly before the horizon (or no horizon was given) the outcome is
        exhaustion with the clock at the last processed time.
        """
        queue = self._queue
        if until is None:
            while self.step():
                pass
            return RunOutcome(exhausted=True, at=self._now)
        horizon = float(until)
        if not math.isfinite(horizon) or horizon < self._now:
            raise ValueError(f"until must be finite and >= now, got {until!r}")
        while queue and queue[0][0] <= horizon:
            self.step()
        if not queue and self._now < horizon:
            return RunOutcome(exhausted=True, at=self._now)
        self._now = horizon
        return RunOutcome(exhausted=False, at=horizon)

    def __repr__(self) -> str:
        return f"<Environment now={self._now} queued={len(self._queue)}>"


class Condition(Event):
    """Composite over a fixed set of events (all-of or any-of).

    Succeeds with a mapping of the constituents processed at the moment the
    condition was met, in constituent order. The first failing constituent
    fails the composite with the same cause; constituent failures are counted
    as observed by the composite whether they arrive before or after it
    triggers, so a losing branch cannot abort the run.
    """

    __slots__ = ("_events", "_need")

    def __init__(self, env: Environment, events: Iterable[Event], need_all: bool):
        events = list(events)
        if not events:
            raise ValueError("composite event over an empty list")
        for ev in events:
            if ev.env is not env:
                raise LifecycleError(f"{ev!r} belongs to a different environment")
        super().__init__(env)
        self._events = events
        self._need = len(events) if need_all else 1
        for ev in events:
            if ev.processed:
                self._on_constituent(ev)
            else:
                ev.add_callback(self._on_constituent)

    def _on_constituent(self, ev: Event) -> None:
        if ev._ok is False:
            ev._observed = True
            if self.state is EventState.PENDING:
                self.fail(ev._value)
            return
        if self.state is not EventState.PENDING:
            return
        done = sum(1 for e in self._events if e.processed)
        if done >= self._need:
            self.succeed({e: e._value for e in self._events if e.processed})


def any_of(env: Environment, events: Iterable[Event]) -> Condition:
    """Event processed once the first of ``events`` is processed."""
    return Condition(env, events, need_all=False)


def all_of(env: Environment, events: Iterable[Event]) -> Condition:
    """Event processed once every one of ``events`` is processed."""
    return Condition(env, events, need_all=True)
