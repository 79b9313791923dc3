"""Sequential deque semantics: the reference every implementation is checked against."""
from __future__ import annotations

from collections import deque
from typing import Iterable, Optional, Tuple

__all__ = [
    "PUSH_LEFT",
    "PUSH_RIGHT",
    "POP_LEFT",
    "POP_RIGHT",
    "OPS",
    "OK",
    "EMPTY",
    "EXHAUSTED",
    "sequential_apply",
    "AbstractDeque",
]

PUSH_LEFT = "push_left"
PUSH_RIGHT = "push_right"
POP_LEFT = "pop_left"
POP_RIGHT = "pop_right"
OPS = (PUSH_LEFT, PUSH_RIGHT, POP_LEFT, POP_RIGHT)


class _Token:
    __slots__ = ("name",)

    def __init__(self, name: str) -> None:
        self.name = name

    def __repr__(self) -> str:
        return self.name

    def __reduce__(self):
        return self.name


OK = _Token("OK")
EMPTY = _Token("EMPTY")
#: a push refused by a bounded pool; it has no abstract effect
EXHAUSTED = _Token("EXHAUSTED")


def sequential_apply(q: Tuple, op: str, arg: Optional[object] = None):
    """Apply one operation to the immutable state ``q``; return ``(result, q')``."""
    if op == PUSH_LEFT:
        return OK, (arg,) + q
    if op == PUSH_RIGHT:
        return OK, q + (arg,)
    if op == POP_LEFT:
        if not q:
            return EMPTY, q
        return q[0], q[1:]
    if op == POP_RIGHT:
        if not q:
            return EMPTY, q
        return q[-1], q[:-1]
    raise ValueError(f"unknown operation {op!r}")


class AbstractDeque:
    """Mutable, unbounded reference deque with the same method names as the real ones.

    Pops return ``None`` when empty, matching the lock-free deques.
    """

    def __init__(self, values: Iterable = ()) -> None:
        self.values = deque(values)

    def push_left(self, v) -> None:
        self.values.appendleft(v)

    def push_right(self, v) -> None:
        self.values.append(v)

    def pop_left(self):
        return self.values.popleft() if self.values else None

    def pop_right(self):
        return self.values.pop() if self.values else None

    def apply(self, op: str, arg=None):
        """Run ``op`` and return its result in history form (``OK``/``EMPTY``/value)."""
        if op in (PUSH_LEFT, PUSH_RIGHT):
            getattr(self, op)(arg)
            return OK
        r = getattr(self, op)()
        return EMPTY if r is None else r

    def snapshot(self) -> list:
        return list(self.values)

    def __len__(self) -> int:
        return len(self.values)
