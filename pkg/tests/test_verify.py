"""Oracle, history format and linearizability checker."""
import io
import pickle
import threading

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lfdeque.verify import (
    EMPTY,
    EXHAUSTED,
    OK,
    AbstractDeque,
    HistoryEvent,
    HistoryTooLarge,
    Recorder,
    check_by_points,
    check_linearizable,
    read_history,
    sequential_apply,
    write_history,
)

# -- oracle -----------------------------------------------------------------


def test_pop_on_empty_leaves_state():
    assert sequential_apply((), "pop_left") == (EMPTY, ())
    assert sequential_apply((), "pop_right") == (EMPTY, ())


def test_pops_take_the_ends():
    assert sequential_apply((1, 2, 3), "pop_left") == (1, (2, 3))
    assert sequential_apply((1, 2, 3), "pop_right") == (3, (1, 2))


def test_pushes_extend_the_ends():
    assert sequential_apply((1,), "push_right", 2) == (OK, (1, 2))
    assert sequential_apply((1,), "push_left", 0) == (OK, (0, 1))
    with pytest.raises(ValueError):
        sequential_apply((), "peek")


def test_abstract_deque_mirrors_sequential_apply():
    q = AbstractDeque([1])
    q.push_left(0)
    q.push_right(2)
    assert q.snapshot() == [0, 1, 2] and len(q) == 3
    assert q.pop_right() == 2 and q.pop_left() == 0
    assert q.apply("pop_left") == 1
    assert q.pop_left() is None


def test_tokens_survive_pickling():
    for tok in (OK, EMPTY, EXHAUSTED):
        assert pickle.loads(pickle.dumps(tok)) is tok


# -- history ----------------------------------------------------------------


def ev(actor, op, arg, result, invoke, response):
    return HistoryEvent(actor, op, arg, result, invoke, response)


def test_history_file_round_trip():
    events = [
        ev(0, "push_left", 5, OK, 1, 4),
        ev(1, "pop_right", None, 5, 2, 6),
        ev(1, "pop_left", None, EMPTY, 7, 8),
        ev(0, "push_right", 9, EXHAUSTED, 9, 10),
        ev(2, "pop_left", None, None, 11, None),
    ]
    buf = io.StringIO()
    write_history(events, buf)
    text = buf.getvalue()
    assert "0 push_left 5 ok 1 4" in text
    assert "2 pop_left - - 11 -" in text
    assert read_history(io.StringIO(text)) == events


def test_history_parse_errors():
    with pytest.raises(ValueError):
        read_history(io.StringIO("0 push_left 1 ok 1\n"))
    with pytest.raises(ValueError):
        read_history(io.StringIO("0 shove 1 ok 1 2\n"))


def test_recorder_stamps_are_unique_and_ordered():
    rec = Recorder()

    def work(a):
        for i in range(200):
            e = rec.invoke(a, "push_left", i)
            rec.respond(e, OK)

    threads = [threading.Thread(target=work, args=(a,)) for a in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    stamps = [s for e in rec.events for s in (e.invoke, e.response)]
    assert len(set(stamps)) == len(stamps) == 1600
    assert all(e.invoke < e.response for e in rec.events)


# -- checker ----------------------------------------------------------------


def sequential_history(ops):
    q, t, out = (), 0, []
    for op, arg in ops:
        r, q = sequential_apply(q, op, arg)
        out.append(ev(0, op, arg, r, t + 1, t + 2))
        t += 2
    return out, q


def test_sequential_history_passes():
    h, q = sequential_history([("push_left", 1), ("push_right", 2), ("pop_left", None), ("pop_left", None)])
    v = check_linearizable(h, final=q)
    assert v.ok and [e.op for e in v.order] == [e.op for e in h]


def test_empty_pop_after_unpopped_push_fails():
    # push_right(1) completes, then a pop_left reports empty: no order works
    h = [ev(0, "push_right", 1, OK, 1, 2), ev(1, "pop_left", None, EMPTY, 3, 4)]
    v = check_linearizable(h)
    assert not v.ok
    assert "NOT linearizable" in v.describe()
    assert [e.op for e in v.blocked] == ["pop_left"]


def test_overlap_permits_reordering():
    # the pop overlaps the push, so it may linearize first and see empty
    h = [ev(0, "push_right", 1, OK, 1, 4), ev(1, "pop_left", None, EMPTY, 2, 3)]
    assert check_linearizable(h).ok
    assert not check_linearizable(h, final=()).ok


def test_pending_ops_may_or_may_not_take_effect():
    h = [ev(0, "push_left", 7, None, 1, None), ev(1, "pop_left", None, 7, 2, 3)]
    assert check_linearizable(h).ok
    h = [ev(0, "push_left", 7, None, 1, None), ev(1, "pop_left", None, EMPTY, 2, 3)]
    assert check_linearizable(h).ok


def test_exhausted_pushes_are_ignored():
    h = [ev(0, "push_left", 7, EXHAUSTED, 1, 2), ev(1, "pop_left", None, EMPTY, 3, 4)]
    assert check_linearizable(h).ok


def test_initial_state_is_used():
    h = [ev(0, "pop_right", None, 3, 1, 2)]
    assert check_linearizable(h, initial=(1, 3)).ok
    assert not check_linearizable(h, initial=(3, 1)).ok


def test_budget_overflow_is_inconclusive():
    # many overlapping pushes and no constraints: the search must branch
    h = [ev(a, "push_left", a, OK, 1 + a, 100 + a) for a in range(12)]
    h.append(ev(99, "pop_left", None, 999, 200, 201))
    with pytest.raises(HistoryTooLarge):
        check_linearizable(h, max_configurations=50)


def test_point_order_replay():
    a = ev(0, "push_left", 1, OK, 1, 10)
    b = ev(1, "pop_left", None, 1, 2, 12)
    assert check_by_points([a, b], {id(a): 5, id(b): 6}).ok
    assert not check_by_points([a, b], {id(a): 7, id(b): 6}).ok
    assert not check_by_points([a, b], {id(a): 11, id(b): 12}).ok  # outside a's interval


def test_lock_protected_oracle_histories_pass():
    lock = threading.Lock()
    q = AbstractDeque()
    rec = Recorder()

    def work(a):
        for i in range(6):
            op = ("push_left", "pop_right", "push_right", "pop_left")[(a + i) % 4]
            arg = a * 100 + i if op.startswith("push") else None
            e = rec.invoke(a, op, arg)
            with lock:
                r = q.apply(op, arg)
            rec.respond(e, EMPTY if r is None and arg is None else (OK if arg is not None else r))

    threads = [threading.Thread(target=work, args=(a,)) for a in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert check_linearizable(rec.events, final=q.snapshot()).ok


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(["push_left", "push_right", "pop_left", "pop_right"]), st.integers(0, 50)), max_size=12))
def test_any_sequential_history_passes(ops):
    ops = [(op, arg if op.startswith("push") else None) for op, arg in ops]
    h, q = sequential_history(ops)
    assert check_linearizable(h, final=q).ok


@settings(max_examples=60, deadline=None)
@given(st.lists(st.sampled_from(["push_left", "push_right"]), min_size=1, max_size=6), st.data())
def test_corrupted_pop_result_is_rejected(pushes, data):
    ops = [(op, i + 1) for i, op in enumerate(pushes)] + [("pop_left", None)]
    h, _ = sequential_history(ops)
    h[-1].result = data.draw(st.integers(100, 200))
    assert not check_linearizable(h).ok
