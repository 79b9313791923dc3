"""Structural checks on a deque's node store.

Quiescent checks (:func:`check_well_formed`, :func:`check_balance`) are only
meaningful when no operation is in flight. :func:`check_mark_order` and
:class:`MarkMonitor` hold at every step and are cheap enough to run after
each one on small pools.
"""
from __future__ import annotations

from typing import Dict, Tuple

from ..nodestore import HEAD, TAIL

__all__ = [
    "InvariantViolation",
    "check_well_formed",
    "check_balance",
    "check_mark_order",
    "MarkMonitor",
]


class InvariantViolation(AssertionError):
    pass


def check_well_formed(dq) -> list:
    """The next chain from head and the prev chain from tail are exact reverses.

    Also requires every chained node to be allocated and unmarked. Returns the
    chain (node indices, head side first).
    """
    pool = dq.pool
    fwd = dq.next_chain()
    back = []
    i = dq._peek_prev(TAIL)
    limit = pool.total_nodes()
    while i != HEAD:
        back.append(i)
        if len(back) > limit:
            raise InvariantViolation("prev chain does not reach head")
        i = dq._peek_prev(i)
    back.reverse()
    if fwd != back:
        raise InvariantViolation(f"next chain {fwd} and reversed prev chain {back} differ")
    for n in fwd:
        if pool.is_free(n):
            raise InvariantViolation(f"chained node {n} is on the free list")
        if dq._peek_marked(n):
            raise InvariantViolation(f"chained node {n} is marked at quiescence")
    if dq._peek_next(TAIL) != TAIL or dq._peek_prev(HEAD) != HEAD:
        raise InvariantViolation("sentinel self-links were overwritten")
    return fwd


def check_balance(dq) -> None:
    """Every unlinked node is back on the free list and counts match the links.

    A free node must carry exactly the claim bit; an allocated node's count
    must equal the number of link words (plus the handle, for sentinels) that
    point at it.
    """
    pool = dq.pool
    chain = dq.next_chain()
    free = pool.free_list()
    expected_free = pool.total_nodes() - 2 - len(chain)
    if len(free) != expected_free or len(set(free)) != len(free):
        raise InvariantViolation(
            f"free list holds {len(free)} nodes, expected {expected_free} (chain length {len(chain)})"
        )
    on_list = set(free)
    structural = dq.structural_refs()
    for i in pool.node_indices():
        raw = pool.refs.peek(i)
        if i in on_list:
            if raw != 1:
                raise InvariantViolation(f"free node {i} has raw count {raw}")
        elif raw & 1 or raw >> 1 != structural[i]:
            raise InvariantViolation(
                f"node {i}: count {raw >> 1} (raw {raw}) but {structural[i]} structural references"
            )


def check_mark_order(dq) -> None:
    """No node may have its prev link marked while its next link is not.

    Only applies to the split-link variant; the packed variant has one mark.
    """
    pw, nw = dq._prev, dq._next
    for i in dq.pool.node_indices():
        if pw.peek(i) & 1 and not nw.peek(i) & 1:
            raise InvariantViolation(f"node {i}: prev marked before next")


class MarkMonitor:
    """Deletion marks are never cleared during one lifetime of a node.

    Lifetimes are told apart by the pool's per-node generation counter, which
    ``malloc_node`` bumps on every allocation. A freshly allocated node still
    carries the mark of its previous life until its links are initialised, so
    a mark only counts once the node has been seen unmarked in the current
    generation.
    """

    def __init__(self, dq) -> None:
        self.dq = dq
        # node -> (generation, armed): armed once seen unmarked, then marked
        self.state: Dict[int, Tuple[int, int]] = {}

    def __call__(self, *_ignored) -> None:
        dq, pool = self.dq, self.dq.pool
        gen = pool.generation
        state = self.state
        for i in pool.node_indices():
            g = gen.peek(i)
            marked = dq._peek_marked(i)
            prev = state.get(i)
            phase = prev[1] if prev is not None and prev[0] == g else 0
            if phase == 0:
                phase = 0 if marked else 1
            elif phase == 1 and marked:
                phase = 2
            elif phase == 2 and not marked:
                raise InvariantViolation(f"mark of node {i} cleared in generation {g}")
            state[i] = (g, phase)
