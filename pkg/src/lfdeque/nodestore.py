"""Pre-allocated node pool with lock-free reference-counted reclamation.

Counts follow the Valois scheme as corrected by Michael and Scott. The raw
count word holds ``2 * references + claim``:

* a node on the free list has the claim bit set (raw ``1``);
* ``copy`` adds 2, ``release`` subtracts 2;
* the releaser that takes raw to exactly 0 tries ``cas(0 -> 1)`` to claim the
  node and, on success, releases the references held by the node's link words
  and pushes it on the free list.

A reader may bump the count of a node that was reclaimed a moment ago. The
read is then revalidated against the link word and the bump undone; because a
free node always carries the claim bit, such transient bumps can never
trigger a second reclamation.

Storage never moves and is never returned to the system, so following a stale
index is always a safe memory access; only the count decides reuse.
"""
from __future__ import annotations

from typing import Callable, List, Optional, Sequence, Tuple

from .atomics import AtomicWord, StepHook, WordArray

__all__ = [
    "LEFT",
    "RIGHT",
    "HEAD",
    "TAIL",
    "PoolExhausted",
    "LinkLayout",
    "NodePool",
]

LEFT, RIGHT = 0, 1
HEAD, TAIL = 0, 1

_IDX_BITS = 40
_IDX_MASK = (1 << _IDX_BITS) - 1
_STAMP_MASK = (1 << (64 - _IDX_BITS)) - 1


class PoolExhausted(Exception):
    """No free node is left (and the pool may not grow)."""


class LinkLayout:
    """How a variant encodes node references and deletion marks in link words.

    ``fields`` is the number of link words per node. ``field_of[direction]``
    picks the word holding that direction and ``decode(word, direction)``
    returns ``(target_index, marked)``. ``owned(words)`` lists every target a
    node's link words hold a counted reference to, given those words in
    field order.
    """

    fields: int = 1
    field_of: Sequence[int] = (0, 0)

    def decode(self, word: int, direction: int):
        raise NotImplementedError

    def owned(self, words: Sequence[int]) -> List[int]:
        raise NotImplementedError


class NodePool:
    """Fixed or growable pool of deque nodes.

    Indices 0 and 1 are reserved for the head and tail sentinels. A growable
    pool adds whole segments on demand; a slot in the segment directory is
    claimed with test-and-set, so concurrent growers never fight over one.
    """

    def __init__(
        self,
        capacity: int,
        layout: LinkLayout,
        *,
        growable: bool = False,
        segment_bits: Optional[int] = None,
        max_nodes: int = 1 << 28,
        debug: bool = False,
    ) -> None:
        if capacity < 2:
            raise ValueError("capacity must be at least 2 (the sentinels)")
        if segment_bits is None:
            segment_bits = 12 if growable else max(1, (capacity - 1).bit_length())
        seg_size = 1 << segment_bits
        if growable:
            capacity = -(-capacity // seg_size) * seg_size
            max_segments = max(1, max_nodes // seg_size)
        else:
            max_segments = 1
            if capacity > seg_size:
                raise ValueError("capacity exceeds a single segment")
        self.layout = layout
        self.growable = growable
        self.debug = debug
        self.capacity = capacity
        self.segment_size = seg_size
        self.max_segments = max_segments

        self.refs = WordArray("refs", segment_bits, max_segments)
        self.links = [WordArray(f"link{j}", segment_bits, max_segments) for j in range(layout.fields)]
        self.pool_next = WordArray("pool_next", segment_bits, max_segments)
        self.values = WordArray("values", segment_bits, max_segments)
        self.generation = WordArray("generation", segment_bits, max_segments)
        self._arrays = [self.refs, *self.links, self.pool_next, self.values, self.generation]
        self.free_head = AtomicWord(0, name="free_head")
        self.segments = AtomicWord(0, name="segments")
        claim_bits = max(1, (max_segments - 1).bit_length())
        self.segment_claims = WordArray("segment_claims", claim_bits, 1)
        self.segment_claims.install_segment(0)
        self._hook: Optional[StepHook] = None

        n_initial = -(-capacity // seg_size)
        for slot in range(n_initial):
            self.segment_claims.poke(slot, 1)
            self._install(slot)
        self.segments._value = n_initial
        # Thread the initial free list without atomics: nothing else can see it yet.
        nxt = 0
        for i in range(capacity - 1, 1, -1):
            self.pool_next.poke(i, nxt)
            nxt = i + 1
        self.free_head._value = nxt

    # -- instrumentation ------------------------------------------------------

    def set_hook(self, hook: Optional[StepHook]) -> None:
        self._hook = hook
        for arr in (*self._arrays, self.segment_claims):
            arr.hook = hook
        self.free_head.hook = hook
        self.segments.hook = hook

    # -- segments ---------------------------------------------------------------

    def _install(self, slot: int) -> None:
        self.refs.install_segment(slot, 1)
        for arr in (*self.links, self.pool_next, self.values, self.generation):
            arr.install_segment(slot)

    def _grow(self) -> int:
        """Claim and install a fresh segment; return one of its nodes."""
        slot = self.segments.load()
        while True:
            if slot >= self.max_segments:
                raise PoolExhausted("segment directory full")
            if self.segment_claims.tas(slot):
                break
            slot += 1
        self._install(slot)
        self.segments.faa(1)
        base = slot * self.segment_size
        mine = base
        first, last = base + 1, base + self.segment_size - 1
        for i in range(first, last):
            self.pool_next.poke(i, i + 2)
        while True:
            h = self.free_head.load()
            self.pool_next.store(last, h & _IDX_MASK)
            stamp = ((h >> _IDX_BITS) + 1) & _STAMP_MASK
            if self.free_head.cas(h, (stamp << _IDX_BITS) | (first + 1)):
                break
        return mine

    # -- free list ------------------------------------------------------------

    def _pop_free(self) -> int:
        while True:
            h = self.free_head.load()
            top = h & _IDX_MASK
            if top == 0:
                return -1
            nxt = self.pool_next.load(top - 1)
            stamp = ((h >> _IDX_BITS) + 1) & _STAMP_MASK
            if self.free_head.cas(h, (stamp << _IDX_BITS) | nxt):
                return top - 1

    def _push_free(self, i: int) -> None:
        while True:
            h = self.free_head.load()
            self.pool_next.store(i, h & _IDX_MASK)
            stamp = ((h >> _IDX_BITS) + 1) & _STAMP_MASK
            if self.free_head.cas(h, (stamp << _IDX_BITS) | (i + 1)):
                return

    # -- public contract ------------------------------------------------------

    def malloc_node(self) -> int:
        """Take a node off the free list with a count of one held by the caller."""
        i = self._pop_free()
        if i < 0:
            if not self.growable:
                raise PoolExhausted("node pool exhausted")
            i = self._grow()
        old = self.refs.faa(i, 1)
        if self.debug and not old & 1:
            raise AssertionError(f"allocated node {i} was not on the free list (raw={old})")
        self.generation.poke(i, self.generation.peek(i) + 1)
        return i

    def copy_node(self, i: int) -> int:
        self.refs.faa(i, 2)
        return i

    def release_node(self, i: int) -> None:
        old = self.refs.faa(i, -2)
        if self.debug and old < 2:
            raise AssertionError(f"release of node {i} with no reference (raw={old})")
        if old == 2 and self.refs.cas(i, 0, 1):
            self._reclaim(i)

    def _reclaim(self, i: int) -> None:
        # Iterative: a dead chain of any length is freed without recursion.
        work = [i]
        layout, links = self.layout, self.links
        while work:
            n = work.pop()
            targets = layout.owned([arr.peek(n) for arr in links])
            self._push_free(n)
            for t in targets:
                old = self.refs.faa(t, -2)
                if self.debug and old < 2:
                    raise AssertionError(f"owned reference to {t} missing (raw={old})")
                if old == 2 and self.refs.cas(t, 0, 1):
                    work.append(t)

    def release_references(self, i: int) -> None:
        """Drop the references held by ``i``'s link words (node must be dead)."""
        for t in self.layout.owned([arr.peek(i) for arr in self.links]):
            self.release_node(t)

    def read_link(self, n: int, direction: int, accept_marked: bool = False) -> Optional[int]:
        """Counted dereference of ``n``'s link in ``direction``.

        Returns ``None`` without acquiring anything when the link is marked and
        ``accept_marked`` is false.
        """
        arr = self.links[self.layout.field_of[direction]]
        decode = self.layout.decode
        refs = self.refs
        while True:
            w = arr.load(n)
            t, d = decode(w, direction)
            if d and not accept_marked:
                return None
            refs.faa(t, 2)
            t2, d2 = decode(arr.load(n), direction)
            if t2 == t and (accept_marked or not d2):
                return t
            self.release_node(t)

    def read_word(self, n: int, direction: int) -> Tuple[int, int]:
        """Load ``n``'s link word for ``direction`` and count its target.

        Returns ``(word, target)``. The word was current while the count was
        held, so the target cannot be recycled until it is released.
        """
        arr = self.links[self.layout.field_of[direction]]
        decode = self.layout.decode
        while True:
            w = arr.load(n)
            t = decode(w, direction)[0]
            self.refs.faa(t, 2)
            if arr.load(n) == w:
                return w, t
            self.release_node(t)

    # -- inspection (quiescent use only) -----------------------------------------

    def refcount(self, i: int) -> int:
        """Logical reference count (claim bit stripped)."""
        return self.refs.peek(i) >> 1

    def is_free(self, i: int) -> bool:
        return bool(self.refs.peek(i) & 1)

    def free_list(self) -> List[int]:
        out = []
        top = self.free_head.value & _IDX_MASK
        while top:
            out.append(top - 1)
            top = self.pool_next.peek(top - 1)
            if len(out) > self.total_nodes():
                raise AssertionError("free list is cyclic")
        return out

    def total_nodes(self) -> int:
        return self.segments.value * self.segment_size if self.growable else self.capacity

    def node_indices(self) -> range:
        return range(self.total_nodes())

    def usable_slots(self) -> int:
        return self.total_nodes() - 2
