"""Shared plumbing for the two deque variants."""
from __future__ import annotations

from typing import Callable, List, Optional

from .backoff import DEFAULT_BACKOFF, BackoffConfig, BackoffState
from .nodestore import HEAD, LEFT, TAIL, NodePool

#: ``probe(site, phase)``; phase is ``"pre"`` before a CAS, ``"ok"``/``"fail"``
#: after it, or ``"read"`` right after a linearizing read.
Probe = Callable[[str, str], None]


class CapacityTooSmall(ValueError):
    pass


class CapacityTooLarge(ValueError):
    pass


class DequeBase:
    """Handle owning a node pool, the two sentinels and the configuration."""

    #: site label of each operation's linearization point, keyed by outcome
    LINEARIZATION_SITES: dict = {}
    #: CAS sites reachable from each public operation
    CAS_SITES: dict = {}

    pool: NodePool

    def __init__(
        self,
        backoff: Optional[BackoffConfig],
        debug: bool,
        recheck_prev: bool = True,
        count_before_link: bool = True,
        hold_old_prev: bool = True,
    ) -> None:
        self.backoff = backoff or DEFAULT_BACKOFF
        self.debug = debug
        #: read the target's link word before confirming ``prev.next == node``
        #: in the prev-pointer repair loop (see ``_help_insert``)
        self.recheck_prev = recheck_prev
        #: count a reference before the CAS that publishes it, instead of
        #: after; otherwise a concurrent unlink can release the new reference
        #: first and free a node that is still linked and held
        self.count_before_link = count_before_link
        #: keep a count on the prev target seen by the repair loop until its
        #: CAS is done; otherwise that node can be freed and reused, and the
        #: CAS succeeds against a new node that happens to share the index
        self.hold_old_prev = hold_old_prev
        self.probe: Optional[Probe] = None

    def _prev_snapshot(self, node: int):
        """``(word, held)``: node's prev word, counted when ``hold_old_prev``."""
        if self.hold_old_prev:
            return self.pool.read_word(node, LEFT)
        pool = self.pool
        return pool.links[pool.layout.field_of[LEFT]].load(node), None

    def _release_held(self, held: Optional[int]) -> None:
        if held is not None:
            self.pool.release_node(held)

    def set_hook(self, hook) -> None:
        """Route every atomic step (and back-off) through ``hook``."""
        self.pool.set_hook(hook)

    def _backoff(self, bo: BackoffState) -> None:
        delay = bo.next_delay()
        hook = self.pool._hook
        if hook is not None:
            hook("backoff", bo, delay)
        else:
            bo.pause(delay)

    # -- quiescent inspection -----------------------------------------------

    def next_chain(self) -> List[int]:
        """Node indices on the next chain from head to tail (exclusive)."""
        out = []
        i = self._peek_next(HEAD)
        limit = self.pool.total_nodes()
        while i != TAIL:
            out.append(i)
            i = self._peek_next(i)
            if len(out) > limit:
                raise AssertionError("next chain does not reach tail")
        return out

    def snapshot(self) -> List[object]:
        """Abstract state: values of unmarked nodes on the next chain."""
        pool = self.pool
        return [pool.values.peek(i) for i in self.next_chain() if not self._peek_marked(i)]

    def _peek_next(self, i: int) -> int:
        raise NotImplementedError

    def _peek_prev(self, i: int) -> int:
        raise NotImplementedError

    def _peek_marked(self, i: int) -> bool:
        raise NotImplementedError

    def structural_refs(self) -> List[int]:
        """Expected logical count of every node, derived from live link words.

        Only meaningful at quiescence: each link word of an allocated node owns
        one reference, and the handle owns one reference to each sentinel.
        """
        pool = self.pool
        counts = [0] * pool.total_nodes()
        counts[HEAD] += 1
        counts[TAIL] += 1
        for i in pool.node_indices():
            if pool.is_free(i):
                continue
            for t in pool.layout.owned([arr.peek(i) for arr in pool.links]):
                counts[t] += 1
        return counts
