"""Single-word atomic primitives: test-and-set, fetch-and-add, compare-and-swap.

CPython exposes no hardware CAS, so each read-modify-write runs inside a tiny
critical section taken from a striped lock table. The critical section covers
exactly one word and one primitive, which is the contract a hardware atomic
instruction gives; nothing above this layer ever holds a lock across steps.

Every primitive can report a step event to a registered hook before it
executes. The deterministic schedule driver uses this to interleave logical
actors at atomic-step granularity. With no hook set the check is a single
attribute test.
"""
from __future__ import annotations

import threading
from typing import Callable, Optional

__all__ = [
    "AtomicWord",
    "WordArray",
    "StepHook",
    "tas",
    "faa",
    "cas",
]

#: ``hook(kind, words, index)`` where ``kind`` is one of
#: ``"load" "store" "tas" "faa" "cas"`` and ``(words, index)`` identifies the word.
StepHook = Callable[[str, object, int], None]

_STRIPES = 64
_LOCKS = tuple(threading.Lock() for _ in range(_STRIPES))


class AtomicWord:
    """One machine word of ``width`` bits (unsigned, wraps on overflow)."""

    __slots__ = ("_value", "_lock", "width", "_mask", "hook", "name")

    def __init__(self, value: int = 0, width: int = 64, name: str = "word") -> None:
        if width not in (32, 64):
            raise ValueError("width must be 32 or 64")
        self.width = width
        self._mask = (1 << width) - 1
        self._value = value & self._mask
        self._lock = _LOCKS[id(self) % _STRIPES]
        self.hook: Optional[StepHook] = None
        self.name = name

    def load(self) -> int:
        if self.hook is not None:
            self.hook("load", self, 0)
        return self._value

    def store(self, value: int) -> None:
        if self.hook is not None:
            self.hook("store", self, 0)
        with self._lock:
            self._value = value & self._mask

    def tas(self) -> bool:
        """Set the word to 1 if it is 0; report whether this call did it."""
        if self.hook is not None:
            self.hook("tas", self, 0)
        with self._lock:
            if self._value == 0:
                self._value = 1
                return True
            return False

    def faa(self, delta: int) -> int:
        """Add ``delta`` and return the prior value."""
        if self.hook is not None:
            self.hook("faa", self, 0)
        with self._lock:
            old = self._value
            self._value = (old + delta) & self._mask
            return old

    def cas(self, expected: int, new: int) -> bool:
        if self.hook is not None:
            self.hook("cas", self, 0)
        with self._lock:
            if self._value == expected:
                self._value = new & self._mask
                return True
            return False

    @property
    def value(self) -> int:
        """Unhooked read, for assertions and debugging."""
        return self._value

    def __repr__(self) -> str:
        return f"AtomicWord({self._value}, width={self.width})"


def tas(target: AtomicWord) -> bool:
    return target.tas()


def faa(target: AtomicWord, delta: int) -> int:
    return target.faa(delta)


def cas(target: AtomicWord, expected: int, replacement: int) -> bool:
    return target.cas(expected, replacement)


class WordArray:
    """A growable vector of atomic words addressed by integer index.

    Storage is a directory of fixed-size segments so that growth never moves
    existing words. A segment slot is published with a plain reference store
    after the caller has won the right to fill it (see :class:`NodePool`).
    Words are not masked here; callers keep values within the word width.
    """

    __slots__ = ("name", "hook", "_dir", "_shift", "_mask")

    def __init__(self, name: str, segment_bits: int, max_segments: int) -> None:
        self.name = name
        self.hook: Optional[StepHook] = None
        self._dir: list = [None] * max_segments
        self._shift = segment_bits
        self._mask = (1 << segment_bits) - 1

    def install_segment(self, slot: int, fill: int = 0) -> None:
        self._dir[slot] = [fill] * (self._mask + 1)

    def load(self, i: int) -> int:
        if self.hook is not None:
            self.hook("load", self, i)
        return self._dir[i >> self._shift][i & self._mask]

    def store(self, i: int, value: int) -> None:
        if self.hook is not None:
            self.hook("store", self, i)
        with _LOCKS[i % _STRIPES]:
            self._dir[i >> self._shift][i & self._mask] = value

    def tas(self, i: int) -> bool:
        if self.hook is not None:
            self.hook("tas", self, i)
        seg = self._dir[i >> self._shift]
        j = i & self._mask
        with _LOCKS[i % _STRIPES]:
            if seg[j] == 0:
                seg[j] = 1
                return True
            return False

    def faa(self, i: int, delta: int) -> int:
        if self.hook is not None:
            self.hook("faa", self, i)
        seg = self._dir[i >> self._shift]
        j = i & self._mask
        with _LOCKS[i % _STRIPES]:
            old = seg[j]
            seg[j] = old + delta
            return old

    def cas(self, i: int, expected: int, new: int) -> bool:
        if self.hook is not None:
            self.hook("cas", self, i)
        seg = self._dir[i >> self._shift]
        j = i & self._mask
        with _LOCKS[i % _STRIPES]:
            if seg[j] == expected:
                seg[j] = new
                return True
            return False

    def peek(self, i: int) -> int:
        """Unhooked read used by invariant checks."""
        return self._dir[i >> self._shift][i & self._mask]

    def poke(self, i: int, value: int) -> None:
        """Unhooked write used only while a node is private to one actor."""
        self._dir[i >> self._shift][i & self._mask] = value

    def __repr__(self) -> str:
        return f"WordArray({self.name!r})"
