"""Replaying the schedules that break the unrepaired step orders.

Each repair is a constructor flag that defaults on. Turning flags off
restores the original order of steps, and the recorded schedule then leaves
the list with next and prev chains that disagree. The same schedule on the repaired
deque leaves a well-formed list.
"""
from lfdeque import PackedDeque
from lfdeque.backoff import NO_BACKOFF
from lfdeque.verify import InvariantViolation, check_well_formed, run_schedule


def tapes(*kinds):
    return [[(op, 10 * (a + 1) + j if op.startswith("push") else None) for j, op in enumerate(k)]
            for a, k in enumerate(kinds)]


CASES = {
    "helper writes a stale prev pointer": (
        tapes(["push_left", "push_left"], ["push_left", "pop_left"]),
        [(0, 32), (1, 50), (0, 10), (1, 18)],
        dict(recheck_prev=False, count_before_link=False, hold_old_prev=False),
    ),
    "node freed while its pusher still holds it": (
        tapes(["push_left", "pop_right"], ["pop_left", "push_left"]),
        [(0, 12), (1, 58), (0, 46), (1, 6)],
        dict(recheck_prev=False, count_before_link=False, hold_old_prev=False),
    ),
    "helper compares against a freed and reused prev node": (
        tapes(["push_left", "push_left"], ["pop_left"], ["pop_right", "push_left"]),
        [(0, 14), (1, 4), (0, 2), (1, 2), (0, 11), (2, 1), (1, 11), (0, 5), (2, 6), (0, 4), (1, 2), (2, 1),
         (0, 2), (2, 1), (1, 3), (2, 9), (1, 3), (2, 3), (1, 7), (2, 13), (1, 3), (2, 13), (1, 3), (2, 23),
         (1, 11), (2, 2), (1, 14), (2, 4), (1, 6), (2, 15), (1, 1), (2, 20), (1, 2), (2, 14), (1, 16)],
        dict(hold_old_prev=False),
    ),
}

for title, (tp, schedule, off) in CASES.items():
    print(title)
    for label, flags in (("unrepaired", off), ("repaired", {})):
        dq = PackedDeque(16, backoff=NO_BACKOFF, debug=True, **flags)
        run_schedule(dq, tp, schedule, finish=True)
        try:
            check_well_formed(dq)
            verdict = "well formed, contents " + str(dq.snapshot())
        except InvariantViolation as exc:
            verdict = f"BROKEN: {exc}"
        print(f"  {label:11s} {verdict}")
