import pytest
from helpers import VARIANTS, make, tapes_for

from lfdeque.verify import (
    EMPTY,
    Driver,
    ScheduleExhausted,
    StepBudgetExceeded,
    check_by_points,
    check_linearizable,
    explore,
    lp_points,
    run_schedule,
)
from lfdeque.verify.history import format_event

pytestmark = pytest.mark.parametrize("variant", VARIANTS)

TAPES = tapes_for(["push_left", "pop_right", "push_right"], ["pop_left", "push_left", "pop_left"])
SCHEDULE = [(0, 5), (1, 7), (0, 3), (1, 20), (0, 40), (1, 60)]


def test_single_actor_matches_direct_calls(variant):
    tape = tapes_for(["push_left", "push_right", "pop_left", "pop_left", "pop_left"])
    h = run_schedule(make(variant), tape, [(0, 10_000)])
    assert [e.result for e in h][2:] == [10, 11, EMPTY]


def test_replay_is_bit_identical(variant):
    runs = []
    for _ in range(3):
        h = run_schedule(make(variant), TAPES, SCHEDULE, finish=True)
        runs.append([format_event(e) for e in h])
    assert runs[0] == runs[1] == runs[2]
    assert all(e.invoke < e.response for e in run_schedule(make(variant), TAPES, SCHEDULE, finish=True))


def test_short_schedule_reports_in_flight_ops(variant):
    with pytest.raises(ScheduleExhausted) as info:
        run_schedule(make(variant), TAPES, [(0, 3), (1, 3)])
    assert "in flight" in str(info.value)
    assert info.value.driver.current[0] is not None


def test_step_budget(variant):
    with pytest.raises(StepBudgetExceeded):
        run_schedule(make(variant), TAPES, [], finish=True, step_budget=10)


def test_freeze_and_resume(variant):
    dq = make(variant)
    site = type(dq).CAS_SITES["push_left"][0]
    d = Driver(dq, tapes_for(["push_left"], ["push_right", "pop_left"]), freeze=[(0, site, "pre", 1)])
    d.run_actor(0)
    assert d.frozen == {0} and d.enabled() == [1]
    d.run_actor(1)
    assert 1 in d.finished
    d.resume(0)
    d.run_to_completion()
    d.close()
    assert d.done()
    assert check_linearizable(d.history).ok


def test_on_quiescent_fires_between_operations(variant):
    hits = []
    d = Driver(make(variant), tapes_for(["push_left", "pop_left"]), on_quiescent=lambda drv: hits.append(drv.steps))
    d.run_to_completion()
    assert len(hits) == 2


def test_explore_counts_schedules_and_respects_bound(variant):
    tapes = tapes_for(["push_left"], ["pop_left"])
    sizes = []
    for bound in (0, 1, 2):
        stats = explore(lambda: make(variant), tapes, lambda d: None, preemptions=bound)
        sizes.append(stats.schedules)
    assert sizes[0] < sizes[1] < sizes[2]
    assert explore(lambda: make(variant), tapes, lambda d: None, preemptions=2, max_schedules=5).schedules == 5


def test_points_agree_with_exhaustive_verdict(variant):
    tapes = tapes_for(["push_right", "pop_left"], ["push_left", "pop_right"])
    cls = type(make(variant))
    disagreements = []

    def visit(d):
        exact = check_linearizable(d.history).ok
        fast = check_by_points(d.history, lp_points(d, cls.LINEARIZATION_SITES)).ok
        if exact != fast:
            disagreements.append(d.chosen)

    explore(lambda: make(variant), tapes, visit, preemptions=1)
    assert disagreements == []
