"""Deterministic multiplexing of logical actors onto one thread.

Every logical actor runs in its own greenlet. The deque's atomics hook hands
control back to the driver *before* each atomic step, so one driver step is
"let this actor perform its next atomic access and run up to the one after
it". Back-off pauses become yields, and each operation starts with a gate
yield, which makes "which actor invokes next" a scheduling decision too.

A :class:`Schedule` is a list of ``(actor, steps)`` pairs. Replaying the same
schedule against the same tapes on a fresh deque reproduces the history
exactly, stamps included: the logical clock counts driver steps plus
invoke/response records, and nothing else.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from greenlet import getcurrent, greenlet

from ..nodestore import PoolExhausted
from .history import HistoryEvent
from .oracle import EMPTY, EXHAUSTED, OK

__all__ = [
    "Driver",
    "Schedule",
    "ScheduleExhausted",
    "StepBudgetExceeded",
    "run_schedule",
    "explore",
    "ExploreStats",
    "lp_points",
]

Tape = Sequence[Tuple[str, Optional[object]]]
Schedule = List[Tuple[int, int]]


class ScheduleExhausted(Exception):
    """The schedule ended while operations were still unfinished."""

    def __init__(self, driver: "Driver") -> None:
        self.driver = driver
        stuck = {a: (e.op, e.arg) for a, e in driver.current.items() if e is not None}
        super().__init__(f"schedule ended after {driver.steps} steps; in flight: {stuck}")


class StepBudgetExceeded(Exception):
    """More driver steps than allowed: treated as a hang."""


class Driver:
    """Step-level scheduler for one deque and one tape per actor.

    ``on_step(driver)`` runs after every step; ``on_quiescent(driver)`` runs
    whenever the number of operations in flight drops back to zero. ``freeze``
    lists ``(actor, site, phase, occurrence)`` tuples: once that actor passes
    the probe the ``occurrence``-th time, it stops being scheduled until
    :meth:`resume` is called.
    """

    def __init__(
        self,
        deque,
        tapes: Sequence[Tape],
        *,
        on_step: Optional[Callable[["Driver"], None]] = None,
        on_quiescent: Optional[Callable[["Driver"], None]] = None,
        freeze: Iterable[Tuple[int, str, str, int]] = (),
        step_budget: Optional[int] = None,
        record_decisions: bool = True,
        record_probes: bool = True,
    ) -> None:
        self.deque = deque
        self.tapes = [list(t) for t in tapes]
        self.on_step = on_step
        self.on_quiescent = on_quiescent
        self.step_budget = step_budget
        self.record_decisions = record_decisions
        self.record_probes = record_probes
        self.freeze_at = {(a, s, p): n for a, s, p, n in freeze}
        self.frozen: set = set()
        self.finished: set = set()
        self.events: List[HistoryEvent] = []
        self.current: Dict[int, Optional[HistoryEvent]] = {a: None for a in range(len(tapes))}
        self.probes: Dict[int, List[Tuple[str, str, int]]] = {}  # id(event) -> hits
        self.clock = 0
        self.steps = 0
        self.in_flight = 0
        self.chosen: List[int] = []
        self.enabled_log: List[Tuple[int, ...]] = []
        self._counts: Dict[Tuple[int, str, str], int] = {}
        self._running = -1
        self._main = getcurrent()
        self._switch_main = self._main.switch
        self._enabled: List[int] = list(range(len(tapes)))
        self._greenlets = [greenlet(self._body, parent=self._main) for _ in tapes]
        deque.set_hook(self._hook)
        deque.probe = self._probe
        for a, g in enumerate(self._greenlets):
            self._running = a
            g.switch(a)
            if g.dead:
                self._retire(a)
        self._running = -1

    # -- actor side -------------------------------------------------------------

    def _hook(self, kind, obj, idx) -> None:
        # _running is -1 whenever the driver itself touches the deque
        if self._running >= 0:
            self._switch_main()

    def _probe(self, site: str, phase: str) -> None:
        a = self._running
        if self.record_probes:
            e = self.current[a]
            if e is not None:
                self.probes.setdefault(id(e), []).append((site, phase, self.clock))
        if self.freeze_at:
            key = (a, site, phase)
            n = self._counts.get(key, 0) + 1
            self._counts[key] = n
            if self.freeze_at.get(key) == n:
                self.frozen.add(a)
                if a in self._enabled:
                    self._enabled.remove(a)

    def _body(self, actor: int) -> None:
        dq = self.deque
        for op, arg in self.tapes[actor]:
            self._main.switch()  # gate: the invocation itself is a decision
            self.clock += 1
            e = HistoryEvent(actor, op, arg, invoke=self.clock)
            self.events.append(e)
            self.current[actor] = e
            self.in_flight += 1
            if op.startswith("push"):
                try:
                    getattr(dq, op)(arg)
                    result = OK
                except PoolExhausted:
                    result = EXHAUSTED
            else:
                r = getattr(dq, op)()
                result = EMPTY if r is None else r
            self.clock += 1
            e.result, e.response = result, self.clock
            self.current[actor] = None
            self.in_flight -= 1

    # -- scheduler side ---------------------------------------------------------

    def enabled(self) -> List[int]:
        return list(self._enabled)

    def done(self) -> bool:
        return len(self.finished) == len(self._greenlets)

    def _retire(self, actor: int) -> None:
        self.finished.add(actor)
        if actor in self._enabled:
            self._enabled.remove(actor)

    def step(self, actor: int) -> None:
        if actor not in self._enabled:
            raise ValueError(f"actor {actor} is not enabled")
        if self.step_budget is not None and self.steps >= self.step_budget:
            raise StepBudgetExceeded(f"step budget of {self.step_budget} exhausted")
        if self.record_decisions:
            self.enabled_log.append(tuple(self._enabled))
            self.chosen.append(actor)
        busy = self.in_flight
        self._running = actor
        g = self._greenlets[actor]
        g.switch()
        self._running = -1
        self.steps += 1
        self.clock += 1
        if g.dead:
            self._retire(actor)
        if self.on_step is not None:
            self.on_step(self)
        if busy and not self.in_flight and self.on_quiescent is not None:
            self.on_quiescent(self)

    def resume(self, actor: int) -> None:
        if actor in self.frozen:
            self.frozen.discard(actor)
            if actor not in self.finished:
                self._enabled.append(actor)
                self._enabled.sort()

    def default_choice(self, last: Optional[int]) -> Optional[int]:
        """Keep running ``last`` if it can run, else the lowest enabled actor."""
        en = self._enabled
        if not en:
            return None
        return last if last in en else en[0]

    def run_to_completion(self, last: Optional[int] = None) -> None:
        while True:
            a = self.default_choice(last)
            if a is None:
                return
            self.step(a)
            last = a

    def run_actor(self, actor: int, max_steps: Optional[int] = None) -> None:
        """Run one actor alone until it finishes, freezes or uses ``max_steps``."""
        n = 0
        while actor in self._enabled:
            if max_steps is not None and n >= max_steps:
                return
            self.step(actor)
            n += 1

    @property
    def history(self) -> List[HistoryEvent]:
        return self.events

    def close(self) -> None:
        """Drop the hooks so the deque can be used directly again."""
        self.deque.set_hook(None)
        self.deque.probe = None


def run_schedule(deque, tapes: Sequence[Tape], schedule: Schedule, *, finish: bool = False, **kw) -> List[HistoryEvent]:
    """Execute ``tapes`` under ``schedule`` and return the recorded history.

    A pair naming an actor that has finished is cut short. With ``finish``
    the remaining work runs under the default policy afterwards; otherwise an
    unfinished run raises :class:`ScheduleExhausted`.
    """
    d = Driver(deque, tapes, **kw)
    try:
        last = None
        for actor, n in schedule:
            for _ in range(n):
                if actor not in d._enabled:
                    break
                d.step(actor)
                last = actor
        if finish:
            d.run_to_completion(last)
        elif not d.done():
            raise ScheduleExhausted(d)
        return d.history
    finally:
        d.close()


def _to_pairs(decisions: Sequence[int]) -> Schedule:
    out: Schedule = []
    for a in decisions:
        if out and out[-1][0] == a:
            out[-1] = (a, out[-1][1] + 1)
        else:
            out.append((a, 1))
    return out


@dataclass
class ExploreStats:
    schedules: int = 0
    steps: int = 0
    max_depth: int = 0


def explore(
    make_deque: Callable[[], object],
    tapes: Sequence[Tape],
    visit: Callable[[Driver], None],
    *,
    preemptions: int = 2,
    max_schedules: Optional[int] = None,
    **driver_kw,
) -> ExploreStats:
    """Run every schedule with at most ``preemptions`` preemptive switches.

    A switch is preemptive when the previously running actor could have
    continued. Each schedule runs on a fresh deque from ``make_deque``;
    ``visit`` receives the finished driver (its deque, history and decision
    log). The search is stateless: a schedule is a decision prefix followed by
    the default policy, and children deviate from their parent once, beyond
    the parent's prefix.
    """
    stats = ExploreStats()
    stack: List[Tuple[List[int], int]] = [([], 0)]
    while stack:
        prefix, cost = stack.pop()
        d = Driver(make_deque(), tapes, record_decisions=True, **driver_kw)
        try:
            last = None
            for a in prefix:
                d.step(a)
                last = a
            d.run_to_completion(last)
        finally:
            d.close()
        stats.schedules += 1
        stats.steps += d.steps
        stats.max_depth = max(stats.max_depth, d.steps)
        visit(d)
        if max_schedules is not None and stats.schedules >= max_schedules:
            break
        chosen, enabled = d.chosen, d.enabled_log
        # beyond the prefix the run followed the default policy, which never
        # preempts, so every child starts from the prefix's cost
        for i in range(len(prefix), len(chosen)):
            prev = chosen[i - 1] if i else None
            can_continue = prev is not None and prev in enabled[i]
            for alt in enabled[i]:
                if alt == chosen[i]:
                    continue
                extra = 1 if can_continue else 0
                if cost + extra <= preemptions:
                    stack.append((chosen[:i] + [alt], cost + extra))
    return stats


def lp_points(driver: Driver, sites: Dict[str, str]) -> Dict[int, int]:
    """Linearization stamps claimed by the probes, for :func:`check_by_points`.

    ``sites`` maps an operation (or ``<op>_empty`` for a pop that found the
    deque empty) to its probe site. A CAS site counts at its last successful
    pass, a read site at its last pass.
    """
    out: Dict[int, int] = {}
    for e in driver.events:
        key = e.op + ("_empty" if e.result is EMPTY else "")
        site = sites.get(key)
        hits = driver.probes.get(id(e), [])
        stamp = None
        for s, phase, clock in hits:
            if s == site and phase in ("ok", "read"):
                stamp = clock
        if stamp is not None:
            out[id(e)] = stamp
    return out
