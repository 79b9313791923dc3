"""Linearizability checking for deque histories.

The exhaustive checker searches for a total order of the operations that
extends real-time precedence (``a`` precedes ``b`` when ``a`` responds before
``b`` is invoked) and replays through :func:`sequential_apply` with matching
results. Visited ``(linearized-set, abstract-state)`` pairs are memoized, so
the search is exhaustive and each configuration is expanded once.

Pending operations may be linearized (with whatever result the oracle
produces) or dropped. Pushes refused with ``EXHAUSTED`` have no abstract
effect and are ignored.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Mapping, Optional, Sequence, Tuple

from .history import HistoryEvent
from .oracle import EXHAUSTED, sequential_apply

__all__ = ["Verdict", "HistoryTooLarge", "check_linearizable", "check_by_points"]

_INF = float("inf")


class HistoryTooLarge(Exception):
    """Search budget exhausted: the verdict is inconclusive, not a failure."""


@dataclass
class Verdict:
    ok: bool
    order: List[HistoryEvent] = field(default_factory=list)
    final_state: Optional[Tuple] = None
    explored: int = 0
    #: operations that could not be placed after the longest valid prefix
    blocked: List[HistoryEvent] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok

    def describe(self) -> str:
        if self.ok:
            return f"linearizable ({len(self.order)} ops, {self.explored} configurations)"
        lines = [f"NOT linearizable after {self.explored} configurations; longest valid prefix:"]
        lines += [f"  {e.actor}:{e.op}({'' if e.arg is None else e.arg}) -> {e.result}" for e in self.order]
        lines.append("no candidate fits next among:")
        lines += [f"  {e.actor}:{e.op}({'' if e.arg is None else e.arg}) -> {e.result}" for e in self.blocked]
        return "\n".join(lines)


def check_linearizable(
    history: Sequence[HistoryEvent],
    *,
    initial: Sequence = (),
    final: Optional[Sequence] = None,
    max_configurations: int = 2_000_000,
) -> Verdict:
    """Exhaustive search for a linearization of ``history``.

    ``initial`` is the abstract state before the first operation; if ``final``
    is given, a witness must also end in exactly that state.
    """
    ops = sorted((e for e in history if e.result is not EXHAUSTED), key=lambda e: e.invoke)
    n = len(ops)
    inv = [e.invoke for e in ops]
    resp = [_INF if e.response is None else e.response for e in ops]
    pending = [e.response is None for e in ops]
    complete_mask = 0
    for i in range(n):
        if not pending[i]:
            complete_mask |= 1 << i
    final_t = None if final is None else tuple(final)

    seen = set()
    explored = 0
    best: List[int] = []
    best_blocked: List[int] = []

    # Each frame: (done mask, state, candidate list, next candidate position)
    start = tuple(initial)
    stack = [[0, start, None, 0]]
    path: List[int] = []
    while stack:
        frame = stack[-1]
        done, state, cands, pos = frame
        if cands is None:
            if done & complete_mask == complete_mask and (final_t is None or state == final_t):
                return Verdict(True, [ops[i] for i in path], state, explored)
            key = (done, state)
            if key in seen:
                stack.pop()
                if path:
                    path.pop()
                continue
            seen.add(key)
            explored += 1
            if explored > max_configurations:
                raise HistoryTooLarge(f"more than {max_configurations} configurations")
            cands = frame[2] = _candidates(done, n, inv, resp)
            if len(path) > len(best):
                best = list(path)
                best_blocked = list(cands)
        if pos >= len(cands):
            stack.pop()
            if path:
                path.pop()
            continue
        frame[3] = pos + 1
        i = cands[pos]
        e = ops[i]
        result, nstate = sequential_apply(state, e.op, e.arg)
        # a pending operation accepts whatever result the oracle produces
        if not pending[i] and result != e.result:
            continue
        path.append(i)
        stack.append([done | (1 << i), nstate, None, 0])
    return Verdict(
        False,
        [ops[i] for i in best],
        None,
        explored,
        [ops[i] for i in best_blocked],
    )


def _candidates(done: int, n: int, inv, resp) -> List[int]:
    """Operations that may be linearized next: not done, invoked before the
    earliest response among the remaining operations."""
    first = (~done & (done + 1)).bit_length() - 1
    out = []
    horizon = _INF
    for i in range(first, n):
        if done >> i & 1:
            continue
        if inv[i] > horizon:
            break
        out.append(i)
        if resp[i] < horizon:
            horizon = resp[i]
    # drop anything invoked after the horizon that slipped in before it shrank
    return [i for i in out if inv[i] < horizon]


def check_by_points(
    history: Sequence[HistoryEvent],
    points: Mapping[int, int],
    *,
    initial: Sequence = (),
    final: Optional[Sequence] = None,
) -> Verdict:
    """Fast path: order operations by claimed linearization stamps and replay.

    ``points`` maps ``id(event)`` to the logical time of its linearization
    point. Every complete, effective operation needs a point inside its
    interval; the verdict fails otherwise.
    """
    ops = [e for e in history if e.result is not EXHAUSTED]
    for e in ops:
        p = points.get(id(e))
        if p is None or not e.invoke <= p <= (e.response if e.response is not None else p):
            return Verdict(False, [], None, 0, [e])
    ordered = sorted(ops, key=lambda e: points[id(e)])
    state = tuple(initial)
    for k, e in enumerate(ordered):
        result, state = sequential_apply(state, e.op, e.arg)
        if e.response is not None and result != e.result:
            return Verdict(False, ordered[:k], None, k, [e])
    if final is not None and state != tuple(final):
        return Verdict(False, ordered, state, len(ordered), [])
    return Verdict(True, ordered, state, len(ordered))
