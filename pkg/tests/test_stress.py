import pytest

from lfdeque import DynamicDeque, PackedDeque
from lfdeque.verify import check_balance, check_well_formed
from lfdeque.verify.stress import drain, make_tapes, run_free, run_windowed


def test_tapes_are_deterministic_and_unique():
    a = make_tapes(3, 50, seed=11)
    assert a == make_tapes(3, 50, seed=11)
    assert a != make_tapes(3, 50, seed=12)
    pushed = [arg for tape in a for _, arg in tape if arg is not None]
    assert len(set(pushed)) == len(pushed)


def test_mix_weights_are_honoured():
    tapes = make_tapes(1, 400, seed=0, mix=(1, 0, 0, 1))
    assert {op for op, _ in tapes[0]} == {"push_right", "pop_left"}
    with pytest.raises(ValueError):
        make_tapes(1, 10, seed=0, mix=(1, 1, 1))


@pytest.mark.parametrize("cls,cap", [(PackedDeque, 258), (DynamicDeque, 64)])
def test_windowed_run_checks_every_window(cls, cap):
    dq = cls(cap, debug=True)
    windows = []
    report = run_windowed(dq, make_tapes(4, 60, seed=5), on_window=lambda d, ev: windows.append(len(ev)))
    assert report.windows == len(windows) == 60
    assert report.operations == 240
    drain(dq)
    check_well_formed(dq)
    check_balance(dq)


def test_windowed_run_reports_exhaustion():
    dq = PackedDeque(4, debug=True)
    report = run_windowed(dq, make_tapes(3, 20, seed=1, mix=(1, 1, 0, 0)))
    assert report.exhausted > 0


@pytest.mark.parametrize("cls", [PackedDeque, DynamicDeque])
def test_free_run_conserves_values(cls):
    dq = cls(1026, debug=True)
    tapes = make_tapes(4, 250, seed=9)
    events = run_free(dq, tapes)
    assert len(events) == 1000
    pushed = {e.arg for e in events if e.arg is not None}
    popped = [e.result for e in events if e.arg is None and isinstance(e.result, int)]
    rest = drain(dq)
    assert sorted(popped + rest) == sorted(pushed)
    check_balance(dq)
