"""Operation histories: records, a thread-safe recorder, and the text file format.

File format, one operation per line, fields separated by single spaces::

    actor op arg result invoke response

``actor``, ``invoke`` and ``response`` are decimal integers; ``op`` is one of
``push_left push_right pop_left pop_right``; ``arg`` is a decimal value or
``-`` for pops; ``result`` is a decimal value, ``ok``, ``empty``,
``exhausted``, or ``-`` while pending; a pending operation has ``-`` as its
response. Lines starting with ``#`` are comments.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Optional, TextIO, Union

from ..atomics import AtomicWord
from .oracle import EMPTY, EXHAUSTED, OK, OPS

__all__ = ["HistoryEvent", "Recorder", "write_history", "read_history", "format_event", "parse_event"]

PENDING = None


@dataclass
class HistoryEvent:
    actor: int
    op: str
    arg: Optional[object]
    result: object = PENDING  # value, OK, EMPTY, EXHAUSTED, or None while pending
    invoke: int = 0
    response: Optional[int] = None

    @property
    def pending(self) -> bool:
        return self.response is None


class Recorder:
    """Collects events from real threads, stamping them from one shared counter."""

    def __init__(self) -> None:
        self.clock = AtomicWord(0, name="history_clock")
        self.events: List[HistoryEvent] = []

    def invoke(self, actor: int, op: str, arg=None) -> HistoryEvent:
        e = HistoryEvent(actor, op, arg, invoke=self.clock.faa(1))
        self.events.append(e)
        return e

    def respond(self, e: HistoryEvent, result) -> None:
        e.result = result
        e.response = self.clock.faa(1)


_RESULT_TOKENS = {"ok": OK, "empty": EMPTY, "exhausted": EXHAUSTED}


def _fmt_result(r) -> str:
    if r is OK:
        return "ok"
    if r is EMPTY:
        return "empty"
    if r is EXHAUSTED:
        return "exhausted"
    if r is PENDING:
        return "-"
    return str(int(r))


def format_event(e: HistoryEvent) -> str:
    arg = "-" if e.arg is None else str(int(e.arg))
    resp = "-" if e.response is None else str(e.response)
    return f"{e.actor} {e.op} {arg} {_fmt_result(e.result)} {e.invoke} {resp}"


def parse_event(line: str) -> HistoryEvent:
    parts = line.split()
    if len(parts) != 6:
        raise ValueError(f"expected 6 fields, got {len(parts)}: {line!r}")
    actor, op, arg, result, invoke, response = parts
    if op not in OPS:
        raise ValueError(f"unknown op {op!r}")
    if result in _RESULT_TOKENS:
        res = _RESULT_TOKENS[result]
    elif result == "-":
        res = PENDING
    else:
        res = int(result)
    return HistoryEvent(
        int(actor),
        op,
        None if arg == "-" else int(arg),
        res,
        int(invoke),
        None if response == "-" else int(response),
    )


def write_history(events: Iterable[HistoryEvent], dest: Union[str, TextIO]) -> None:
    if isinstance(dest, str):
        with open(dest, "w") as fh:
            write_history(events, fh)
        return
    dest.write("# actor op arg result invoke response\n")
    for e in events:
        dest.write(format_event(e) + "\n")


def read_history(src: Union[str, TextIO]) -> List[HistoryEvent]:
    if isinstance(src, str):
        with open(src) as fh:
            return read_history(fh)
    out = []
    for line in src:
        line = line.strip()
        if line and not line.startswith("#"):
            out.append(parse_event(line))
    return out
