"""Lock-free deque with prev and next links in separate words.

Each link word is ``(target << 1) | deleted``. No CAS ever touches both
directions at once, so splitting the link lifts the index-width bound of the
packed variant; the pool grows by whole segments instead.

Ordering rule: a node's next link is always marked before its prev link. Pops
mark next; ``_delete_next`` marks prev on entry.
"""
from __future__ import annotations

from typing import List, Optional, Sequence

from ._base import CapacityTooSmall, DequeBase
from .backoff import BackoffConfig, BackoffState
from .nodestore import HEAD, LEFT, RIGHT, TAIL, LinkLayout, NodePool

__all__ = ["DirLayout", "DynamicDeque"]


class DirLayout(LinkLayout):
    fields = 2
    field_of = (0, 1)

    def decode(self, word: int, direction: int):
        return word >> 1, bool(word & 1)

    def owned(self, words: Sequence[int]) -> List[int]:
        return [words[0] >> 1, words[1] >> 1]


class DynamicDeque(DequeBase):
    """Unbounded lock-free deque backed by a growable segmented pool.

    ``capacity`` sets the initial pool size. With ``growable=False`` the pool
    is fixed and pushes raise :class:`PoolExhausted` exactly like
    :class:`PackedDeque`.
    """

    LINEARIZATION_SITES = {
        "push_left": "L11",
        "push_right": "R10",
        "pop_left": "PL3",
        "pop_left_empty": "PL3",
        "pop_right": "PR11",
        "pop_right_empty": "PR4",
    }
    CAS_SITES = {
        "push_left": ("L11", "P5"),
        "push_right": ("R10", "P5"),
        "pop_left": ("PL13", "DN4", "DN30", "HI22"),
        "pop_right": ("PR11", "DN4", "DN30", "HI22"),
    }

    def __init__(
        self,
        capacity: int = 4096,
        *,
        growable: bool = True,
        segment_bits: Optional[int] = None,
        backoff: Optional[BackoffConfig] = None,
        debug: bool = False,
        recheck_prev: bool = True,
        count_before_link: bool = True,
        hold_old_prev: bool = True,
        stop_on_next_mark: bool = True,
    ) -> None:
        super().__init__(backoff, debug, recheck_prev, count_before_link, hold_old_prev)
        self.stop_on_next_mark = stop_on_next_mark
        if capacity < 2:
            raise CapacityTooSmall("capacity must be at least 2")
        self.layout = DirLayout()
        self.pool = pool = NodePool(
            capacity, self.layout, growable=growable, segment_bits=segment_bits, debug=debug
        )
        self._prev, self._next = pool.links
        self._prev.poke(HEAD, HEAD << 1)
        self._next.poke(HEAD, TAIL << 1)
        self._prev.poke(TAIL, HEAD << 1)
        self._next.poke(TAIL, TAIL << 1)
        pool.refs.poke(HEAD, 2 * 3)
        pool.refs.poke(TAIL, 2 * 3)

    # -- helpers --------------------------------------------------------------

    def _create_node(self, value) -> int:
        i = self.pool.malloc_node()  # C1
        self.pool.values.poke(i, value)  # C2
        return i

    def _cas(self, words, node: int, old: int, new: int, site: str, count: Optional[int] = None) -> bool:
        """CAS on one of ``node``'s link words; ``count`` as in PackedDeque._cas."""
        probe = self.probe
        early = count is not None and self.count_before_link
        if early:
            self.pool.copy_node(count)
        if probe is not None:
            probe(site, "pre")
        if self.debug and old & 1 and not new & 1:
            raise AssertionError(f"{site}: CAS would clear the deletion mark of {node}")
        ok = words.cas(node, old, new)
        if probe is not None:
            probe(site, "ok" if ok else "fail")
        if count is not None:
            if early and not ok:
                self.pool.release_node(count)
            elif ok and not early:
                self.pool.copy_node(count)
        return ok

    def _check_mark_order(self, node: int) -> None:
        if self._prev.peek(node) & 1 and not self._next.peek(node) & 1:
            raise AssertionError(f"prev of node {node} marked before next")

    # -- public operations ----------------------------------------------------

    def push_left(self, value) -> None:
        pool, pw, nw = self.pool, self._prev, self._next
        bo = BackoffState(self.backoff)
        node = self._create_node(value)  # L1
        prev = pool.copy_node(HEAD)  # L2
        nxt = pool.read_link(prev, RIGHT)  # L3
        while True:
            if nw.load(prev) != nxt << 1:  # L5
                pool.release_node(nxt)  # L6
                nxt = pool.read_link(prev, RIGHT)  # L7
                continue
            pw.store(node, prev << 1)  # L9
            nw.store(node, nxt << 1)  # L10
            if self._cas(nw, prev, nxt << 1, node << 1, "L11", count=node):  # L12
                break
            self._backoff(bo)  # L14
        self._push_common(node, nxt, bo)  # L15

    def push_right(self, value) -> None:
        pool, pw, nw = self.pool, self._prev, self._next
        bo = BackoffState(self.backoff)
        node = self._create_node(value)  # R1
        nxt = pool.copy_node(TAIL)  # R2
        prev = pool.read_link(nxt, LEFT)  # R3
        while True:
            if nw.load(prev) != nxt << 1:  # R5
                prev = self._help_insert(prev, nxt, bo)  # R6
                continue
            pw.store(node, prev << 1)  # R8
            nw.store(node, nxt << 1)  # R9
            if self._cas(nw, prev, nxt << 1, node << 1, "R10", count=node):  # R11
                break
            self._backoff(bo)  # R13
        self._push_common(node, nxt, bo)  # R14

    def _push_common(self, node: int, nxt: int, bo: BackoffState) -> None:
        pool, pw, nw = self.pool, self._prev, self._next
        while True:
            link1 = pw.load(nxt)  # P2
            if link1 & 1 or nw.load(node) != nxt << 1:  # P3
                break
            if self._cas(pw, nxt, link1, node << 1, "P5", count=node):  # P6
                pool.release_node(link1 >> 1)  # P7
                if pw.load(node) & 1:  # P8
                    prev2 = pool.copy_node(node)  # P9
                    prev2 = self._help_insert(prev2, nxt, bo)  # P10
                    pool.release_node(prev2)  # P11
                break
            self._backoff(bo)  # P13
        pool.release_node(nxt)  # P14
        pool.release_node(node)  # P15

    def pop_left(self):
        pool, nw = self.pool, self._next
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
            link1 = nw.load(node)  # PL8
            if link1 & 1:  # PL9
                self._delete_next(node, bo)  # PL10
                pool.release_node(node)  # PL11
                continue
            if self._cas(nw, node, link1, link1 | 1, "PL13"):
                self._delete_next(node, bo)  # PL14
                nxt = pool.read_link(node, RIGHT, True)  # PL15
                prev = self._help_insert(prev, nxt, bo)  # PL16
                pool.release_node(prev)  # PL17
                pool.release_node(nxt)  # PL18
                value = pool.values.peek(node)  # PL19
                break
            pool.release_node(node)  # PL21
            self._backoff(bo)  # PL22
        self._remove_cross_reference(node)  # PL23
        pool.release_node(node)  # PL24
        return value

    def pop_right(self):
        pool, nw = self.pool, self._next
        probe = self.probe
        bo = BackoffState(self.backoff)
        nxt = pool.copy_node(TAIL)  # PR1
        node = pool.read_link(nxt, LEFT)  # PR2
        while True:
            link1 = nw.load(node)  # PR4
            if probe is not None:
                probe("PR4", "read")
            if link1 != nxt << 1:
                node = self._help_insert(node, nxt, bo)  # PR5
                continue
            if node == HEAD:  # PR7
                pool.release_node(node)
                pool.release_node(nxt)
                return None
            if self._cas(nw, node, nxt << 1, (nxt << 1) | 1, "PR11"):
                self._delete_next(node, bo)  # PR12
                prev = pool.read_link(node, LEFT, True)  # PR13
                prev = self._help_insert(prev, nxt, bo)  # PR14
                pool.release_node(prev)  # PR15
                pool.release_node(nxt)  # PR16
                value = pool.values.peek(node)  # PR17
                break
            self._backoff(bo)  # PR19
        self._remove_cross_reference(node)  # PR20
        pool.release_node(node)  # PR21
        return value

    # -- helping --------------------------------------------------------------

    def _delete_next(self, node: int, bo: BackoffState) -> None:
        pool, pw, nw = self.pool, self._prev, self._next
        while True:
            link1 = pw.load(node)  # DN2
            if link1 & 1 or self._cas(pw, node, link1, link1 | 1, "DN4"):  # DN3-DN4
                break
        if self.debug:
            self._check_mark_order(node)
        lastlink_d = True  # DN5
        prev = pool.read_link(node, LEFT, True)  # DN6
        nxt = pool.read_link(node, RIGHT, True)  # DN7
        while True:
            if prev == nxt:  # DN9
                break
            if nw.load(nxt) & 1:  # DN10
                next2 = pool.read_link(nxt, RIGHT, True)  # DN11
                pool.release_node(nxt)  # DN12
                nxt = next2
                continue
            prev2 = pool.read_link(prev, RIGHT)  # DN15
            if prev2 is None:  # DN16
                if not lastlink_d:  # DN17
                    self._delete_next(prev, bo)  # DN18
                    lastlink_d = True
                prev2 = pool.read_link(prev, LEFT, True)  # DN20
                pool.release_node(prev)  # DN21
                prev = prev2
                continue
            if prev2 != node:  # DN24
                lastlink_d = False
                pool.release_node(prev)  # DN26
                prev = prev2
                continue
            pool.release_node(prev2)  # DN29
            if self._cas(nw, prev, node << 1, nxt << 1, "DN30", count=nxt):  # DN31
                pool.release_node(node)  # DN32
                break
            self._backoff(bo)  # DN34
        pool.release_node(prev)  # DN35
        pool.release_node(nxt)  # DN36

    def _help_insert(self, prev: int, node: int, bo: BackoffState) -> int:
        pool, pw = self.pool, self._prev
        nw = self._next
        recheck, stop_on_next = self.recheck_prev, self.stop_on_next_mark
        lastlink_d = True  # HI1
        while True:
            held = None
            if recheck:
                early, held = self._prev_snapshot(node)  # HI12 moved ahead of HI3, see PackedDeque
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
            # With split links a node is deleted as soon as its next word is
            # marked; its prev mark may lag behind. Waiting for the prev mark
            # alone lets this loop spin on a stalled deleter.
            if link1 & 1 or (stop_on_next and nw.load(node) & 1):  # HI13
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
            ok = self._cas(pw, node, link1, prev << 1, "HI22", count=prev)  # HI23
            self._release_held(held)
            if ok:
                pool.release_node(link1 >> 1)  # HI24
                if pw.load(prev) & 1:  # HI25
                    continue
                break
            self._backoff(bo)  # HI27
        return prev

    def _remove_cross_reference(self, node: int) -> None:
        pool, pw, nw = self.pool, self._prev, self._next
        while True:
            prev = pw.load(node) >> 1  # RC2
            if nw.load(prev) & 1:  # RC3
                prev2 = pool.read_link(prev, LEFT, True)  # RC4
                pw.store(node, (prev2 << 1) | 1)  # RC5
                if self.debug:
                    self._check_mark_order(node)
                pool.release_node(prev)  # RC6
                continue
            nxt = nw.load(node) >> 1  # RC8
            if nw.load(nxt) & 1:  # RC9
                next2 = pool.read_link(nxt, RIGHT, True)  # RC10
                nw.store(node, (next2 << 1) | 1)  # RC11
                pool.release_node(nxt)  # RC12
                continue
            break

    # -- inspection -------------------------------------------------------------

    def _peek_next(self, i: int) -> int:
        return self._next.peek(i) >> 1

    def _peek_prev(self, i: int) -> int:
        return self._prev.peek(i) >> 1

    def _peek_marked(self, i: int) -> bool:
        return bool(self._next.peek(i) & 1)

    def link_fields(self, i: int):
        """``((prev, prev_marked), (next, next_marked))`` of node ``i``."""
        p, n = self._prev.peek(i), self._next.peek(i)
        return (p >> 1, bool(p & 1)), (n >> 1, bool(n & 1))
