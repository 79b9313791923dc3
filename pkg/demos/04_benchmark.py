"""Throughput of the two variants against a locked collections.deque.

The same code path as ``python -m lfdeque.bench`` is used, with a small
workload so the script finishes in a few seconds. Every repeat is verified
(conservation, structure and balance) before its timing is accepted.
"""
from lfdeque.bench import WorkloadConfig, run_workload

for impl in ("packed", "dynamic", "mutex"):
    r = run_workload(WorkloadConfig(impl=impl, actors=4, ops=500, repeats=5, seed=7))
    print(f"{impl:8s} {r.throughput:12,.0f} ops/s  mean {r.mean / 1e6:7.2f} ms  verified={r.verified}")
