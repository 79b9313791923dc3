"""Shared builders for the test-suite."""
from __future__ import annotations

import itertools

from lfdeque import DynamicDeque, PackedDeque
from lfdeque.backoff import NO_BACKOFF

OPS = ("push_left", "push_right", "pop_left", "pop_right")
VARIANTS = ("packed", "dynamic")


def make(variant: str, capacity: int = 8, **kw):
    """Small fixed-size deque in debug mode with back-off disabled."""
    kw.setdefault("backoff", NO_BACKOFF)
    kw.setdefault("debug", True)
    if variant == "packed":
        return PackedDeque(capacity, **kw)
    return DynamicDeque(capacity, growable=False, **kw)


def tapes_for(*kinds_per_actor):
    """Tapes from op names; push values are ``10 * (actor + 1) + position``."""
    return [
        [(op, 10 * (a + 1) + j if op.startswith("push") else None) for j, op in enumerate(kinds)]
        for a, kinds in enumerate(kinds_per_actor)
    ]


def unordered_pairs(length: int = 2):
    """All op-kind tapes of ``length`` for two actors, up to swapping actors."""
    tapes = list(itertools.product(OPS, repeat=length))
    for i, a in enumerate(tapes):
        for b in tapes[i:]:
            yield a, b
