"""Real-thread stress runs.

Two shapes are provided:

* :func:`run_windowed` lines all actors up on a barrier, lets each perform a
  few operations concurrently, and checks the window's history while the
  deque is quiescent. A window is checked against the deque state observed at
  the previous barrier and must end in the state observed at this one, so a
  sequence of passing windows covers the whole run.
* :func:`run_free` lets the actors run their tapes without pauses and returns
  the full history for an optional audit.

Push values are ``(actor << 32) | sequence`` so every pushed value is unique.
"""
from __future__ import annotations

import sys
import threading
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from ..nodestore import PoolExhausted
from .checker import check_linearizable
from .history import HistoryEvent, Recorder
from .invariants import check_well_formed
from .oracle import EMPTY, EXHAUSTED, OK

__all__ = [
    "DEFAULT_MIX",
    "make_tapes",
    "apply_op",
    "WindowFailure",
    "StressReport",
    "run_windowed",
    "run_free",
    "drain",
    "fast_switching",
]

#: PushRight, PushLeft, PopRight, PopLeft weights
DEFAULT_MIX = (0.25, 0.25, 0.25, 0.25)
_MIX_ORDER = ("push_right", "push_left", "pop_right", "pop_left")

Tape = List[Tuple[str, Optional[int]]]


def make_tapes(actors: int, ops: int, seed: int, mix: Sequence[float] = DEFAULT_MIX) -> List[Tape]:
    """Per-actor operation tapes; identical for identical arguments."""
    p = np.asarray(mix, dtype=float)
    if p.shape != (4,) or (p < 0).any() or p.sum() <= 0:
        raise ValueError("mix needs four non-negative weights with a positive sum")
    p = p / p.sum()
    rng = np.random.default_rng(seed)
    tapes = []
    for a in range(actors):
        kinds = rng.choice(4, size=ops, p=p)
        tapes.append(
            [
                (_MIX_ORDER[k], (a << 32) | i if k < 2 else None)
                for i, k in enumerate(kinds.tolist())
            ]
        )
    return tapes


def apply_op(dq, op: str, arg):
    """Run one operation and return its result in history form."""
    if op == "push_left" or op == "push_right":
        try:
            getattr(dq, op)(arg)
        except PoolExhausted:
            return EXHAUSTED
        return OK
    r = getattr(dq, op)()
    return EMPTY if r is None else r


@contextmanager
def fast_switching(interval: float = 1e-5):
    """Ask the interpreter to switch threads far more often than usual."""
    old = sys.getswitchinterval()
    sys.setswitchinterval(interval)
    try:
        yield
    finally:
        sys.setswitchinterval(old)


class WindowFailure(AssertionError):
    def __init__(self, message: str, window: int, history: List[HistoryEvent]) -> None:
        super().__init__(f"window {window}: {message}")
        self.window = window
        self.history = history


@dataclass
class StressReport:
    windows: int = 0
    operations: int = 0
    exhausted: int = 0


def run_windowed(
    dq,
    tapes: Sequence[Tape],
    *,
    per_window: int = 1,
    check: bool = True,
    on_window: Optional[Callable[[object, List[HistoryEvent]], None]] = None,
) -> StressReport:
    """Run ``tapes`` on real threads in barrier-separated windows.

    After each window the barrier action checks, while every actor waits,
    that the window's history is linearizable from the previous snapshot to
    the current one and that the structure is well formed. The first failure
    aborts the run and is raised as :class:`WindowFailure`.
    """
    n = len(tapes)
    length = max((len(t) for t in tapes), default=0)
    rounds = -(-length // per_window)
    report = StressReport()
    state = {"snapshot": tuple(dq.snapshot()), "recorder": Recorder(), "window": 0}
    errors: List[BaseException] = []

    def checkpoint() -> None:
        rec = state["recorder"]
        events = rec.events
        if not events:
            return
        now = tuple(dq.snapshot())
        report.windows += 1
        report.operations += len(events)
        report.exhausted += sum(1 for e in events if e.result is EXHAUSTED)
        try:
            if check:
                check_well_formed(dq)
                verdict = check_linearizable(events, initial=state["snapshot"], final=now)
                if not verdict.ok:
                    raise WindowFailure(verdict.describe(), state["window"], events)
            if on_window is not None:
                on_window(dq, events)
        except BaseException as exc:
            errors.append(exc)
            raise
        state["snapshot"] = now
        state["recorder"] = Recorder()
        state["window"] += 1

    barrier = threading.Barrier(n, action=checkpoint)

    def worker(actor: int) -> None:
        tape = tapes[actor]
        try:
            for r in range(rounds):
                barrier.wait()
                rec = state["recorder"]
                for op, arg in tape[r * per_window : (r + 1) * per_window]:
                    e = rec.invoke(actor, op, arg)
                    rec.respond(e, apply_op(dq, op, arg))
            barrier.wait()
        except threading.BrokenBarrierError:
            return
        except BaseException as exc:  # surface assertion failures from the deque
            errors.append(exc)
            barrier.abort()

    threads = [threading.Thread(target=worker, args=(a,), name=f"actor-{a}") for a in range(n)]
    with fast_switching():
        for t in threads:
            t.start()
        for t in threads:
            t.join()
    if errors:
        raise errors[0]
    return report


def run_free(dq, tapes: Sequence[Tape], *, record: bool = True) -> List[HistoryEvent]:
    """Run every tape concurrently with no pauses; return the history."""
    rec = Recorder()
    errors: List[BaseException] = []
    start = threading.Barrier(len(tapes))

    def worker(actor: int) -> None:
        try:
            start.wait()
            for op, arg in tapes[actor]:
                if record:
                    e = rec.invoke(actor, op, arg)
                    rec.respond(e, apply_op(dq, op, arg))
                else:
                    apply_op(dq, op, arg)
        except BaseException as exc:
            errors.append(exc)

    threads = [threading.Thread(target=worker, args=(a,)) for a in range(len(tapes))]
    with fast_switching():
        for t in threads:
            t.start()
        for t in threads:
            t.join()
    if errors:
        raise errors[0]
    return rec.events


def drain(dq) -> List[object]:
    """Pop everything from the left; return the values in order."""
    out = []
    while True:
        v = dq.pop_left()
        if v is None:
            return out
        out.append(v)
