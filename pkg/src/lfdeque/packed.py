"""Lock-free deque whose per-node link word packs ``(prev, next, deleted)``.

The next pointers form the authoritative singly linked list; prev pointers
are hints that always point at or left of the true predecessor. Every
structural update is one CAS on one packed word.

Bit layout of a link word with ``k`` index bits::

    bit 2k      deleted
    bits k..2k  next index
    bits 0..k   prev index

so ``2k + 1`` must fit the word: ``k <= 15`` (32 768 nodes) on 32-bit words,
``k <= 31`` on 64-bit words.
"""
from __future__ import annotations

from typing import List, Optional, Sequence

from ._base import CapacityTooLarge, CapacityTooSmall, DequeBase
from .backoff import BackoffConfig, BackoffState
from .nodestore import HEAD, LEFT, RIGHT, TAIL, LinkLayout, NodePool

__all__ = ["PackedLayout", "PackedDeque", "max_index_bits"]


def max_index_bits(word_bits: int) -> int:
    return (word_bits - 1) // 2


class PackedLayout(LinkLayout):
    fields = 1
    field_of = (0, 0)

    def __init__(self, k: int) -> None:
        self.k = k
        self.mask = (1 << k) - 1
        self.mark = 1 << (2 * k)

    def pack(self, prev: int, nxt: int, deleted: bool = False) -> int:
        return prev | (nxt << self.k) | (self.mark if deleted else 0)

    def unpack(self, word: int):
        k, m = self.k, self.mask
        return word & m, (word >> k) & m, bool(word >> (2 * k))

    def decode(self, word: int, direction: int):
        if direction == LEFT:
            return word & self.mask, bool(word & self.mark)
        return (word >> self.k) & self.mask, bool(word & self.mark)

    def owned(self, words: Sequence[int]) -> List[int]:
        w = words[0]
        return [w & self.mask, (w >> self.k) & self.mask]


class PackedDeque(DequeBase):
    """Fixed-capacity lock-free deque (pool of ``capacity`` nodes incl. sentinels).

    ``push_left``/``push_right`` raise :class:`PoolExhausted` when no node is
    free; ``pop_left``/``pop_right`` return ``None`` on an empty deque.
    """

    LINEARIZATION_SITES = {
        "push_left": "L12",
        "push_right": "R11",
        "pop_left": "PL3",
        "pop_left_empty": "PL3",
        "pop_right": "PR15",
        "pop_right_empty": "PR4",
    }
    CAS_SITES = {
        "push_left": ("L12", "P7"),
        "push_right": ("R11", "P7"),
        "pop_left": ("PL15", "DN28", "HI23"),
        "pop_right": ("PR15", "DN28", "HI23"),
    }

    def __init__(
        self,
        capacity: int,
        *,
        index_bits: int = 20,
        word_bits: int = 64,
        backoff: Optional[BackoffConfig] = None,
        debug: bool = False,
        recheck_prev: bool = True,
        count_before_link: bool = True,
        hold_old_prev: bool = True,
    ) -> None:
        super().__init__(backoff, debug, recheck_prev, count_before_link, hold_old_prev)
        if index_bits > max_index_bits(word_bits):
            raise ValueError(f"{index_bits} index bits do not fit a {word_bits}-bit word")
        if capacity < 2:
            raise CapacityTooSmall("capacity must be at least 2")
        if capacity > 1 << index_bits:
            raise CapacityTooLarge(f"capacity {capacity} exceeds 2**{index_bits}")
        self.index_bits = index_bits
        self.word_bits = word_bits
        self.layout = lay = PackedLayout(index_bits)
        self.pool = pool = NodePool(capacity, lay, debug=debug)
        self._link = pool.links[0]
        self._k = index_bits
        self._m = lay.mask
        self._D = lay.mark
        # head.prev and tail.next point at themselves
        self._link.poke(HEAD, lay.pack(HEAD, TAIL))
        self._link.poke(TAIL, lay.pack(HEAD, TAIL))
        pool.refs.poke(HEAD, 2 * 3)
        pool.refs.poke(TAIL, 2 * 3)

    # -- helpers --------------------------------------------------------------

    def _create_node(self, value) -> int:
        i = self.pool.malloc_node()  # C1
        self.pool.values.poke(i, value)  # C2
        return i

    def _cas(self, node: int, old: int, new: int, site: str, count: Optional[int] = None) -> bool:
        """CAS on ``node``'s link word.

        ``count`` names a node (held by the caller) that the new word links
        to; its count gains the new reference when the CAS succeeds.
        """
        probe = self.probe
        early = count is not None and self.count_before_link
        if early:
            self.pool.copy_node(count)
        if probe is not None:
            probe(site, "pre")
        if self.debug and old & self._D and not new & self._D:
            raise AssertionError(f"{site}: CAS would clear the deletion mark of {node}")
        ok = self._link.cas(node, old, new)
        if probe is not None:
            probe(site, "ok" if ok else "fail")
        if count is not None:
            if early and not ok:
                self.pool.release_node(count)
            elif ok and not early:
                self.pool.copy_node(count)
        return ok

    # -- public operations ----------------------------------------------------

    def push_left(self, value) -> None:
        pool, link, k, m = self.pool, self._link, self._k, self._m
        bo = BackoffState(self.backoff)
        node = self._create_node(value)  # L1
        prev = pool.copy_node(HEAD)  # L2
        nxt = pool.read_link(prev, RIGHT)  # L3
        while True:
            link1 = link.load(prev)  # L5
            if (link1 >> k) & m != nxt:  # L6
                pool.release_node(nxt)  # L7
                nxt = pool.read_link(prev, RIGHT)  # L8
                continue
            link.store(node, prev | (nxt << k))  # L10
            link2 = (link1 & m) | (node << k)  # L11
            if self._cas(prev, link1, link2, "L12", count=node):  # L13
                break
            self._backoff(bo)  # L15
        self._push_common(node, nxt, bo)  # L16

    def push_right(self, value) -> None:
        pool, link, k, m, D = self.pool, self._link, self._k, self._m, self._D
        bo = BackoffState(self.backoff)
        node = self._create_node(value)  # R1
        nxt = pool.copy_node(TAIL)  # R2
        prev = pool.read_link(nxt, LEFT)  # R3
        while True:
            link1 = link.load(prev)  # R5
            # the R6 mark test reads the word just loaded from prev
            if (link1 >> k) & m != nxt or link1 & D:  # R6
                prev = self._help_insert(prev, nxt, bo)  # R7
                continue
            link.store(node, prev | (nxt << k))  # R9
            link2 = (link1 & m) | (node << k)  # R10
            if self._cas(prev, link1, link2, "R11", count=node):  # R12
                break
            self._backoff(bo)  # R14
        self._push_common(node, nxt, bo)  # R15

    def _push_common(self, node: int, nxt: int, bo: BackoffState) -> None:
        pool, link, k, m, D = self.pool, self._link, self._k, self._m, self._D
        while True:
            link1 = link.load(nxt)  # P2
            link2 = node | (((link1 >> k) & m) << k)  # P3
            nl = link.load(node)
            if link1 & D or nl & D or (nl >> k) & m != nxt:  # P4-P5
                break
            if self._cas(nxt, link1, link2, "P7", count=node):  # P8
                pool.release_node(link1 & m)  # P9
                if link.load(node) & D:  # P10
                    prev2 = pool.copy_node(node)  # P11
                    prev2 = self._help_insert(prev2, nxt, bo)  # P12
                    pool.release_node(prev2)  # P13
                break
            self._backoff(bo)  # P15
        pool.release_node(nxt)  # P16
        pool.release_node(node)  # P17

    def pop_left(self):
        pool, link, k, m, D = self.pool, self._link, self._k, self._m, self._D
        probe = self.probe
        bo = BackoffState(self.backoff)
        prev = pool.copy_node(HEAD)  # PL1
        while True:
            node = pool.read_link(prev, RIGHT)  # PL3
            if probe is not None:
                probe("PL3", "read")
            if node == TAIL:  # PL4
                pool.release_node(node)
                pool.release_node(prev)
                return None
            link1 = link.load(node)  # PL8
            if link1 & D:  # PL9
                self._delete_next(node, bo)  # PL10
                pool.release_node(node)  # PL11
                continue
            nxt = pool.copy_node((link1 >> k) & m)  # PL13
            if self._cas(node, link1, link1 | D, "PL15"):
                self._delete_next(node, bo)  # PL16
                prev = self._help_insert(prev, nxt, bo)  # PL17
                pool.release_node(prev)  # PL18
                pool.release_node(nxt)  # PL19
                value = pool.values.peek(node)  # PL20
                break
            pool.release_node(node)  # PL22
            pool.release_node(nxt)  # PL23
            self._backoff(bo)  # PL24
        self._remove_cross_reference(node)  # PL25
        pool.release_node(node)  # PL26
        return value

    def pop_right(self):
        pool, link, k, m, D = self.pool, self._link, self._k, self._m, self._D
        probe = self.probe
        bo = BackoffState(self.backoff)
        nxt = pool.copy_node(TAIL)  # PR1
        while True:
            node = pool.read_link(nxt, LEFT)  # PR3
            link1 = link.load(node)  # PR4
            if probe is not None:
                probe("PR4", "read")
            if (link1 >> k) & m != nxt or link1 & D:  # PR5
                node = self._help_insert(node, nxt, bo)  # PR6
                pool.release_node(node)  # PR7
                continue
            if node == HEAD:  # PR9
                pool.release_node(nxt)
                pool.release_node(node)
                return None
            prev = pool.copy_node(link1 & m)  # PR13
            if self._cas(node, link1, link1 | D, "PR15"):
                self._delete_next(node, bo)  # PR16
                prev = self._help_insert(prev, nxt, bo)  # PR17
                pool.release_node(prev)  # PR18
                pool.release_node(nxt)  # PR19
                value = pool.values.peek(node)  # PR20
                break
            pool.release_node(prev)  # PR22
            pool.release_node(node)  # PR23
            self._backoff(bo)  # PR24
        self._remove_cross_reference(node)  # PR25
        pool.release_node(node)  # PR26
        return value

    # -- helping --------------------------------------------------------------

    def _delete_next(self, node: int, bo: BackoffState) -> None:
        pool, link, k, m, D = self.pool, self._link, self._k, self._m, self._D
        lastlink_d = True  # DN1
        prev = pool.read_link(node, LEFT, True)  # DN2
        nxt = pool.read_link(node, RIGHT, True)  # DN3
        while True:
            if prev == nxt:  # DN5
                break
            if link.load(nxt) & D:  # DN6
                next2 = pool.read_link(nxt, RIGHT, True)  # DN7
                pool.release_node(nxt)  # DN8
                nxt = next2
                continue
            prev2 = pool.read_link(prev, RIGHT)  # DN11
            if prev2 is None:  # DN12
                if not lastlink_d:  # DN13
                    self._delete_next(prev, bo)  # DN14
                    lastlink_d = True
                prev2 = pool.read_link(prev, LEFT, True)  # DN16
                pool.release_node(prev)  # DN17
                prev = prev2
                continue
            link1 = (link.load(prev) & m) | (prev2 << k)  # DN20
            if prev2 != node:  # DN21
                lastlink_d = False
                pool.release_node(prev)  # DN23
                prev = prev2
                continue
            pool.release_node(prev2)  # DN26
            if self.count_before_link:
                # node's successor is not held here, so count it with a read
                succ = pool.read_link(node, RIGHT, True)  # DN29
                link2 = (link1 & m) | (succ << k)  # DN27
                if self._cas(prev, link1, link2, "DN28"):
                    pool.release_node(node)  # DN30
                    break
                pool.release_node(succ)
            else:
                link2 = (link1 & m) | (((link.load(node) >> k) & m) << k)  # DN27
                if self._cas(prev, link1, link2, "DN28"):
                    pool.copy_node(link2 >> k)  # DN29
                    pool.release_node(node)  # DN30
                    break
            self._backoff(bo)  # DN32
        pool.release_node(prev)  # DN33
        pool.release_node(nxt)  # DN34

    def _help_insert(self, prev: int, node: int, bo: BackoffState) -> int:
        pool, link, k, m, D = self.pool, self._link, self._k, self._m, self._D
        recheck = self.recheck_prev
        lastlink_d = True  # HI1
        while True:
            held = None
            if recheck:
                # Snapshot node's link before confirming prev.next == node, so
                # a push landing between the two fails the CAS below instead
                # of having its prev update overwritten.
                early, held = self._prev_snapshot(node)  # HI12, moved ahead of HI3
            prev2 = pool.read_link(prev, RIGHT)  # HI3
            if prev2 is None:  # HI4
                self._release_held(held)
                if not lastlink_d:  # HI5
                    self._delete_next(prev, bo)  # HI6
                    lastlink_d = True
                prev2 = pool.read_link(prev, LEFT, True)  # HI8
                pool.release_node(prev)  # HI9
                prev = prev2
                continue
            if recheck:
                link1 = early
            else:
                link1, held = self._prev_snapshot(node)  # HI12
            if link1 & D:  # HI13
                self._release_held(held)
                pool.release_node(prev2)
                break
            if prev2 != node:  # HI16
                self._release_held(held)
                lastlink_d = False
                pool.release_node(prev)  # HI18
                prev = prev2
                continue
            pool.release_node(prev2)  # HI21
            link2 = prev | (((link1 >> k) & m) << k)  # HI22
            ok = self._cas(node, link1, link2, "HI23", count=prev)  # HI24
            self._release_held(held)
            if ok:
                pool.release_node(link1 & m)  # HI25
                if link.load(prev) & D:  # HI26
                    continue
                break
            self._backoff(bo)  # HI28
        return prev

    def _remove_cross_reference(self, node: int) -> None:
        pool, link, k, m, D = self.pool, self._link, self._k, self._m, self._D
        while True:
            link1 = link.load(node)  # RC2
            prev = link1 & m  # RC3
            if link.load(prev) & D:  # RC4
                prev2 = pool.read_link(prev, LEFT, True)  # RC5
                link.store(node, prev2 | (((link1 >> k) & m) << k) | D)  # RC6
                pool.release_node(prev)  # RC7
                continue
            nxt = (link1 >> k) & m  # RC9
            if link.load(nxt) & D:  # RC10
                next2 = pool.read_link(nxt, RIGHT, True)  # RC11
                link.store(node, (link1 & m) | (next2 << k) | D)  # RC12
                pool.release_node(nxt)  # RC13
                continue
            break

    # -- inspection -------------------------------------------------------------

    def _peek_next(self, i: int) -> int:
        return (self._link.peek(i) >> self._k) & self._m

    def _peek_prev(self, i: int) -> int:
        return self._link.peek(i) & self._m

    def _peek_marked(self, i: int) -> bool:
        return bool(self._link.peek(i) & self._D)

    def link_fields(self, i: int):
        """``(prev, next, deleted)`` of node ``i`` (unhooked read)."""
        return self.layout.unpack(self._link.peek(i))
