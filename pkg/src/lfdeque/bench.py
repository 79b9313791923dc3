"""Workload runner comparing the lock-free deques with a mutex baseline.

Each actor runs the same seeded tape of random operations in every repeat
and for every implementation, so timings are directly comparable. Only the
parallel section is timed: actors are created first, released together by a
barrier, and the clock stops when the last one arrives at a second barrier.

Run ``python -m lfdeque.bench --help`` for the command-line interface.
"""
from __future__ import annotations

import argparse
import csv
import statistics
import sys
import threading
import time
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .backoff import BackoffConfig
from .dynamic import DynamicDeque
from .nodestore import PoolExhausted
from .packed import PackedDeque
from .verify.checker import HistoryTooLarge, check_linearizable
from .verify.history import Recorder, write_history
from .verify.invariants import InvariantViolation, check_balance, check_well_formed
from .verify.oracle import OK, AbstractDeque
from .verify.stress import DEFAULT_MIX, apply_op, fast_switching, make_tapes

__all__ = [
    "IMPLS",
    "MutexDeque",
    "WorkloadConfig",
    "RunResult",
    "ConfigError",
    "run_workload",
    "emit_csv",
    "load_csv",
    "parse_mix",
    "main",
]

IMPLS = ("packed", "dynamic", "mutex")
CSV_HEADER = ("impl", "actors", "repeat", "nanos", "ops", "exhausted")


class ConfigError(ValueError):
    pass


class MutexDeque:
    """Reference deque: a linked block deque guarded by one lock.

    Bounded like :class:`PackedDeque` so exhaustion behaves the same way.
    """

    def __init__(self, capacity: int) -> None:
        self._items: deque = deque()
        self._lock = threading.Lock()
        self.limit = capacity - 2

    def push_left(self, value) -> None:
        with self._lock:
            if len(self._items) >= self.limit:
                raise PoolExhausted("mutex deque full")
            self._items.appendleft(value)

    def push_right(self, value) -> None:
        with self._lock:
            if len(self._items) >= self.limit:
                raise PoolExhausted("mutex deque full")
            self._items.append(value)

    def pop_left(self):
        with self._lock:
            return self._items.popleft() if self._items else None

    def pop_right(self):
        with self._lock:
            return self._items.pop() if self._items else None

    def snapshot(self) -> list:
        with self._lock:
            return list(self._items)


@dataclass
class WorkloadConfig:
    impl: str = "packed"
    actors: int = 4
    ops: int = 1000
    repeats: int = 50
    mix: tuple = DEFAULT_MIX  # push_right, push_left, pop_right, pop_left
    seed: int = 0
    capacity: Optional[int] = None
    backoff_base: int = 1
    backoff_cap: int = 64
    backoff_mode: str = "spin"
    scratch_bytes: int = 1 << 22
    audit_history: Optional[str] = None

    def __post_init__(self) -> None:
        if self.impl == "mutex-baseline":
            self.impl = "mutex"

    def validate(self) -> None:
        if self.impl not in IMPLS:
            raise ConfigError(f"impl must be one of {IMPLS}")
        if self.actors < 1 or self.ops < 0 or self.repeats < 1:
            raise ConfigError("actors and repeats must be positive, ops non-negative")
        if len(self.mix) != 4 or min(self.mix) < 0 or sum(self.mix) <= 0:
            raise ConfigError("mix needs four non-negative weights with a positive sum")
        if not 0 <= self.seed < 1 << 64:
            raise ConfigError("seed must fit in 64 bits")
        if self.capacity is not None and self.capacity < 3:
            raise ConfigError("capacity must be at least 3")
        if self.scratch_bytes < 0:
            raise ConfigError("scratch_bytes must be non-negative")
        try:
            self.backoff()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    @property
    def normalized_mix(self) -> tuple:
        total = float(sum(self.mix))
        return tuple(w / total for w in self.mix)

    def resolved_capacity(self) -> int:
        if self.capacity is not None:
            return self.capacity
        return min(self.actors * self.ops + 2, 1 << 20)

    def backoff(self) -> BackoffConfig:
        return BackoffConfig(
            base=self.backoff_base, cap=self.backoff_cap, actors=self.actors, mode=self.backoff_mode
        )

    def make_deque(self):
        cap = self.resolved_capacity()
        if self.impl == "packed":
            return PackedDeque(cap, backoff=self.backoff())
        if self.impl == "dynamic":
            return DynamicDeque(max(cap, 2), backoff=self.backoff())
        return MutexDeque(cap)


@dataclass
class RunResult:
    config: WorkloadConfig
    nanos: List[int] = field(default_factory=list)
    completed: List[int] = field(default_factory=list)
    exhausted: List[int] = field(default_factory=list)
    conserved: List[bool] = field(default_factory=list)
    balanced: List[bool] = field(default_factory=list)
    oracle_match: List[Optional[bool]] = field(default_factory=list)
    audit: Optional[str] = None
    #: values drained (alternating ends) after the last repeat
    last_drain: list = field(default_factory=list)

    @property
    def mean(self) -> float:
        return statistics.fmean(self.nanos) if self.nanos else float("nan")

    @property
    def stddev(self) -> float:
        return statistics.stdev(self.nanos) if len(self.nanos) > 1 else 0.0

    @property
    def throughput(self) -> float:
        """Operations per second, averaged over repeats."""
        if not self.nanos:
            return float("nan")
        return statistics.fmean(c / (n * 1e-9) for c, n in zip(self.completed, self.nanos) if n)

    @property
    def verified(self) -> bool:
        return (
            all(self.conserved)
            and all(self.balanced)
            and all(m is not False for m in self.oracle_match)
            and not (self.audit or "").startswith("FAIL")
        )


def _touch_scratch(nbytes: int) -> None:
    # No portable cache flush exists; streaming through a buffer larger than
    # the last-level cache evicts most of the previous repeat's working set.
    if nbytes:
        buf = np.ones(nbytes // 8, dtype=np.int64)
        buf += 1


def _one_repeat(cfg: WorkloadConfig, tapes, record: bool):
    dq = cfg.make_deque()
    n = cfg.actors
    popped: List[list] = [[] for _ in range(n)]
    failed_pushes: List[list] = [[] for _ in range(n)]
    rec = Recorder() if record else None
    errors: List[BaseException] = []
    start = threading.Barrier(n + 1)
    end = threading.Barrier(n + 1)

    def worker(actor: int) -> None:
        mine, refused = popped[actor], failed_pushes[actor]
        try:
            start.wait()
            for op, arg in tapes[actor]:
                if rec is not None:
                    e = rec.invoke(actor, op, arg)
                    r = apply_op(dq, op, arg)
                    rec.respond(e, r)
                else:
                    r = apply_op(dq, op, arg)
                if arg is None:
                    if isinstance(r, int):  # pushed values are ints, tokens are not
                        mine.append(r)
                elif r is not OK:
                    refused.append(arg)
        except BaseException as exc:  # pragma: no cover - surfaced below
            errors.append(exc)
        finally:
            end.wait()

    threads = [threading.Thread(target=worker, args=(a,)) for a in range(n)]
    for t in threads:
        t.start()
    start.wait()
    t0 = time.perf_counter_ns()
    end.wait()
    elapsed = time.perf_counter_ns() - t0
    for t in threads:
        t.join()
    if errors:
        raise errors[0]
    return dq, elapsed, popped, failed_pushes, rec


def _verify(cfg: WorkloadConfig, dq, tapes, popped, refused):
    """Conservation, quiescent balance and (single actor) exact oracle match."""
    remaining = _drain_both_ends(dq)
    pushed = Counter(arg for tape in tapes for _, arg in tape if arg is not None)
    pushed.subtract(Counter(v for r in refused for v in r))
    out = Counter(v for p in popped for v in p) + Counter(remaining)
    conserved = +pushed == out and all(c <= 1 for c in out.values())

    balanced = True
    if cfg.impl != "mutex":
        try:
            check_well_formed(dq)
            check_balance(dq)
            balanced = len(dq.pool.free_list()) == dq.pool.usable_slots()
        except InvariantViolation:
            balanced = False

    oracle = None
    if cfg.actors == 1:
        ref = AbstractDeque()
        expected_pops = []
        limit = cfg.resolved_capacity() - 2
        for op, arg in tapes[0]:
            if arg is not None:
                if len(ref) < limit or cfg.impl == "dynamic":
                    getattr(ref, op)(arg)
            else:
                r = getattr(ref, op)()
                if r is not None:
                    expected_pops.append(r)
        oracle = expected_pops == popped[0] and _drain_both_ends(ref) == remaining
    return conserved, balanced, oracle, remaining


def _drain_both_ends(dq) -> list:
    """Pop alternately from the left and the right until empty."""
    out = []
    left = True
    while True:
        v = dq.pop_left() if left else dq.pop_right()
        if v is None:
            return out
        out.append(v)
        left = not left


def run_workload(cfg: WorkloadConfig) -> RunResult:
    cfg.validate()
    tapes = make_tapes(cfg.actors, cfg.ops, cfg.seed, cfg.normalized_mix)
    result = RunResult(cfg)
    with fast_switching(1e-4):
        for rep in range(cfg.repeats):
            _touch_scratch(cfg.scratch_bytes)
            record = cfg.audit_history is not None and rep == cfg.repeats - 1
            dq, elapsed, popped, refused, rec = _one_repeat(cfg, tapes, record)
            result.nanos.append(elapsed)
            n_refused = sum(len(r) for r in refused)
            result.exhausted.append(n_refused)
            result.completed.append(cfg.actors * cfg.ops)
            conserved, balanced, oracle, result.last_drain = _verify(cfg, dq, tapes, popped, refused)
            result.conserved.append(conserved)
            result.balanced.append(balanced)
            result.oracle_match.append(oracle)
            if rec is not None:
                write_history(rec.events, cfg.audit_history)
                result.audit = _audit(rec.events)
    return result


def _audit(events, budget: int = 200_000) -> str:
    try:
        verdict = check_linearizable(events, max_configurations=budget)
    except HistoryTooLarge:
        return "INCONCLUSIVE (search budget exhausted)"
    return "PASS" if verdict.ok else "FAIL\n" + verdict.describe()


def emit_csv(result: RunResult, path) -> None:
    """Write one row per repeat under a fixed header."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        cfg = result.config
        for rep, (ns, ops, ex) in enumerate(zip(result.nanos, result.completed, result.exhausted)):
            w.writerow((cfg.impl, cfg.actors, rep, ns, ops, ex))


def load_csv(path) -> List[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        for k in ("actors", "repeat", "nanos", "ops", "exhausted"):
            r[k] = int(r[k])
    return rows


def parse_mix(text: str) -> tuple:
    """``"pr:pl:qr:ql"`` weights (push right, push left, pop right, pop left)."""
    parts = text.split(":")
    if len(parts) != 4:
        raise ConfigError("--mix needs four ':'-separated weights")
    try:
        weights = tuple(float(p) for p in parts)
    except ValueError:
        raise ConfigError(f"--mix has a non-numeric weight: {text!r}") from None
    if min(weights) < 0 or sum(weights) <= 0:
        raise ConfigError("--mix weights must be non-negative with a positive sum")
    return weights


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="python -m lfdeque.bench",
        description="Time random deque workloads on concurrent threads.",
    )
    p.add_argument("--impl", default="packed", help="packed, dynamic or mutex (alias mutex-baseline)")
    p.add_argument("--actors", type=int, default=4)
    p.add_argument("--ops", type=int, default=1000, help="operations per actor")
    p.add_argument("--repeats", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mix", default="1:1:1:1", help="weights pr:pl:qr:ql")
    p.add_argument("--capacity", type=int, default=None)
    p.add_argument("--backoff-base", type=int, default=1)
    p.add_argument("--backoff-cap", type=int, default=64)
    p.add_argument("--backoff-mode", default="spin", help="spin, sleep or none")
    p.add_argument("--scratch-bytes", type=int, default=1 << 22)
    p.add_argument("--csv", metavar="PATH")
    p.add_argument("--audit-history", metavar="PATH")
    return p


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits with 2 already; keep the message short
        raise ConfigError(message)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _parser()
    parser.__class__ = _Parser
    try:
        a = parser.parse_args(argv)
        cfg = WorkloadConfig(
            impl=a.impl,
            actors=a.actors,
            ops=a.ops,
            repeats=a.repeats,
            mix=parse_mix(a.mix),
            seed=a.seed,
            capacity=a.capacity,
            backoff_base=a.backoff_base,
            backoff_cap=a.backoff_cap,
            backoff_mode=a.backoff_mode,
            scratch_bytes=a.scratch_bytes,
            audit_history=a.audit_history,
        )
        cfg.validate()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    result = run_workload(cfg)
    if a.csv:
        emit_csv(result, a.csv)
    print(
        f"impl={cfg.impl} actors={cfg.actors} ops={cfg.ops} repeats={cfg.repeats} "
        f"mean={result.mean / 1e6:.3f}ms stddev={result.stddev / 1e6:.3f}ms "
        f"throughput={result.throughput:,.0f} ops/s exhausted={sum(result.exhausted)}"
    )
    if result.audit is not None:
        print(f"audit: {result.audit.splitlines()[0]}")
    if not result.verified:
        print("verification FAILED", file=sys.stderr)
        if result.audit and result.audit.startswith("FAIL"):
            print(result.audit, file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
