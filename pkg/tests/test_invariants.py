import pytest
from helpers import VARIANTS, make, tapes_for

from lfdeque.verify import (
    Driver,
    InvariantViolation,
    MarkMonitor,
    check_balance,
    check_well_formed,
)


@pytest.mark.parametrize("variant", VARIANTS)
def test_clean_deque_passes(variant):
    dq = make(variant)
    for v in range(4):
        dq.push_right(v)
    assert check_well_formed(dq) == dq.next_chain()
    check_balance(dq)


@pytest.mark.parametrize("variant", VARIANTS)
def test_broken_prev_hint_is_reported(variant):
    dq = make(variant)
    dq.push_right(1)
    dq.push_right(2)
    a, b = dq.next_chain()
    if variant == "packed":
        lay = dq.layout
        _, nxt, d = lay.unpack(dq._link.peek(b))
        dq._link.poke(b, lay.pack(0, nxt, d))
    else:
        dq._prev.poke(b, 0)
    with pytest.raises(InvariantViolation, match="reversed prev chain"):
        check_well_formed(dq)


@pytest.mark.parametrize("variant", VARIANTS)
def test_leaked_count_is_reported(variant):
    dq = make(variant)
    dq.push_left(1)
    dq.pool.copy_node(dq.next_chain()[0])
    with pytest.raises(InvariantViolation, match="structural"):
        check_balance(dq)


@pytest.mark.parametrize("variant", VARIANTS)
def test_lost_node_is_reported(variant):
    dq = make(variant)
    dq.push_left(1)
    n = dq.next_chain()[0]
    dq.pool.copy_node(n)  # a stray count keeps the popped node alive
    dq.pop_left()
    with pytest.raises(InvariantViolation, match="free list"):
        check_balance(dq)


@pytest.mark.parametrize("variant", VARIANTS)
def test_mark_monitor_quiet_across_reuse(variant):
    dq = make(variant, 4)
    mon = MarkMonitor(dq)
    d = Driver(dq, tapes_for(["push_left", "pop_left"] * 4, ["push_right", "pop_right"] * 4), on_step=mon)
    d.run_to_completion()
    d.close()


@pytest.mark.parametrize("variant", VARIANTS)
def test_mark_monitor_catches_cleared_mark(variant):
    dq = make(variant)
    dq.push_left(1)
    n = dq.next_chain()[0]
    mon = MarkMonitor(dq)
    mon()
    if variant == "packed":
        dq._link.poke(n, dq._link.peek(n) | dq._D)
        mon()
        dq._link.poke(n, dq._link.peek(n) & ~dq._D)
    else:
        dq._next.poke(n, dq._next.peek(n) | 1)
        mon()
        dq._next.poke(n, dq._next.peek(n) & ~1)
    with pytest.raises(InvariantViolation, match="cleared"):
        mon()
