"""Stepping two actors one atomic operation at a time.

The driver runs each actor as a coroutine that pauses before every atomic
step. Here actor 0 is frozen right after it marks a node for deletion, and
actor 1 still finishes all of its work: the operation in flight gets helped
along instead of blocking everyone else.
"""
from lfdeque import DynamicDeque, PackedDeque
from lfdeque.backoff import NO_BACKOFF
from lfdeque.verify import Driver, check_balance, check_linearizable, check_well_formed

TAPES = [
    [("push_left", 10), ("pop_left", None)],
    [("push_left", 20), ("pop_left", None), ("push_right", 21), ("pop_right", None)],
]

for cls, mark_site in ((PackedDeque, "PL15"), (DynamicDeque, "PL13")):
    dq = cls(8, backoff=NO_BACKOFF, debug=True)
    d = Driver(dq, TAPES, freeze=[(0, mark_site, "ok", 1)], step_budget=100_000)
    d.run_actor(0)
    print(f"{cls.__name__}: actor 0 frozen after {mark_site}: {d.frozen == {0}}")
    d.run_actor(1)
    print(f"  actor 1 finished while actor 0 was frozen: {1 in d.finished}, steps so far {d.steps}")
    d.resume(0)
    d.run_to_completion()
    d.close()
    print("  history:")
    for e in d.history:
        print(f"    actor {e.actor} {e.op}({'' if e.arg is None else e.arg}) -> {e.result}  [{e.invoke}, {e.response}]")
    check_well_formed(dq)
    check_balance(dq)
    print("  linearizable:", check_linearizable(d.history).ok)
