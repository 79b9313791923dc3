"""Verification tooling: oracle, histories, checker, scheduler and invariants."""
from .checker import HistoryTooLarge, Verdict, check_by_points, check_linearizable
from .driver import (
    Driver,
    ExploreStats,
    Schedule,
    ScheduleExhausted,
    StepBudgetExceeded,
    explore,
    lp_points,
    run_schedule,
)
from .history import HistoryEvent, Recorder, read_history, write_history
from .invariants import (
    InvariantViolation,
    MarkMonitor,
    check_balance,
    check_mark_order,
    check_well_formed,
)
from .oracle import EMPTY, EXHAUSTED, OK, OPS, AbstractDeque, sequential_apply

__all__ = [
    "AbstractDeque",
    "Driver",
    "EMPTY",
    "EXHAUSTED",
    "ExploreStats",
    "HistoryEvent",
    "HistoryTooLarge",
    "InvariantViolation",
    "MarkMonitor",
    "OK",
    "OPS",
    "Recorder",
    "Schedule",
    "ScheduleExhausted",
    "StepBudgetExceeded",
    "Verdict",
    "check_balance",
    "check_by_points",
    "check_linearizable",
    "check_mark_order",
    "check_well_formed",
    "explore",
    "lp_points",
    "read_history",
    "run_schedule",
    "sequential_apply",
    "write_history",
]
