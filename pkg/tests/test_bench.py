import pytest

from lfdeque.bench import (
    ConfigError,
    MutexDeque,
    RunResult,
    WorkloadConfig,
    emit_csv,
    load_csv,
    main,
    parse_mix,
    run_workload,
)
from lfdeque.nodestore import PoolExhausted

SMALL = dict(repeats=2, scratch_bytes=0)


def test_single_actor_final_state_is_identical_across_impls():
    drains = {}
    for impl in ("packed", "dynamic", "mutex"):
        r = run_workload(WorkloadConfig(impl=impl, actors=1, ops=100, seed=42, **SMALL))
        assert r.verified and all(r.oracle_match)
        drains[impl] = r.last_drain
    assert drains["packed"] == drains["dynamic"] == drains["mutex"]


def test_four_actors_complete_every_operation():
    r = run_workload(WorkloadConfig(actors=4, ops=200, **SMALL))
    assert r.completed == [800, 800]
    assert r.verified and all(r.conserved) and all(r.balanced)
    assert r.mean > 0 and r.throughput > 0


def test_all_pushes_into_small_pool_count_exhaustion():
    r = run_workload(WorkloadConfig(actors=2, ops=50, mix=(1, 1, 0, 0), capacity=10, **SMALL))
    assert all(x > 0 for x in r.exhausted)
    assert r.verified


def test_csv_round_trip(tmp_path):
    r = run_workload(WorkloadConfig(impl="mutex", actors=2, ops=50, repeats=5, scratch_bytes=0))
    path = tmp_path / "r.csv"
    emit_csv(r, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "impl,actors,repeat,nanos,ops,exhausted"
    assert len(lines) == 6
    rows = load_csv(path)
    assert [row["nanos"] for row in rows] == r.nanos
    assert [row["repeat"] for row in rows] == list(range(5))


def test_empty_result_writes_header_only(tmp_path):
    path = tmp_path / "e.csv"
    emit_csv(RunResult(WorkloadConfig()), path)
    assert path.read_text().splitlines() == ["impl,actors,repeat,nanos,ops,exhausted"]


def test_mix_parsing():
    assert parse_mix("1:1:2:0") == (1.0, 1.0, 2.0, 0.0)
    for bad in ("1:1:1", "a:1:1:1", "-1:1:1:1", "0:0:0:0"):
        with pytest.raises(ConfigError):
            parse_mix(bad)


def test_mutex_baseline_semantics():
    q = MutexDeque(4)
    q.push_left(1)
    q.push_right(2)
    with pytest.raises(PoolExhausted):
        q.push_left(3)
    assert (q.pop_left(), q.pop_right(), q.pop_left()) == (1, 2, None)


def test_cli_success_writes_csv_and_audit(tmp_path, capsys):
    csv_path, hist = tmp_path / "out.csv", tmp_path / "h.txt"
    rc = main(
        ["--impl", "packed", "--actors", "2", "--ops", "40", "--repeats", "3", "--mix", "1:1:1:1",
         "--backoff-base", "1", "--backoff-cap", "8", "--capacity", "200", "--seed", "3",
         "--csv", str(csv_path), "--audit-history", str(hist)]
    )
    assert rc == 0
    assert len(csv_path.read_text().splitlines()) == 4
    assert len(hist.read_text().splitlines()) == 81
    assert "audit: PASS" in capsys.readouterr().out


@pytest.mark.parametrize(
    "argv",
    [["--impl", "skiplist"], ["--mix", "1:1"], ["--actors", "0"], ["--capacity", "2"], ["--backoff-mode", "nap"], ["--bogus"]],
)
def test_cli_config_errors_exit_2(argv, capsys):
    assert main(argv + ["--repeats", "1", "--ops", "1"]) == 2
    assert "config error" in capsys.readouterr().err


def test_cli_verification_failure_exits_3(monkeypatch):
    import lfdeque.bench as bench

    monkeypatch.setattr(bench, "_verify", lambda *a: (False, True, None, []))
    assert main(["--actors", "1", "--ops", "10", "--repeats", "1", "--scratch-bytes", "0"]) == 3
