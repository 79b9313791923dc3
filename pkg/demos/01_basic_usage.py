"""Both deque variants used from plain threads.

Four threads push and pop at both ends. Afterwards the deque is drained and
every pushed value must have come out exactly once.
"""
import threading
from collections import Counter

from lfdeque import DynamicDeque, PackedDeque, PoolExhausted


def workout(dq, actors=4, per_actor=500):
    popped = [[] for _ in range(actors)]

    def worker(a):
        for i in range(per_actor):
            value = a * 10_000 + i
            try:
                (dq.push_left if i % 2 else dq.push_right)(value)
            except PoolExhausted:
                pass
            v = dq.pop_right() if i % 3 else dq.pop_left()
            if v is not None:
                popped[a].append(v)

    threads = [threading.Thread(target=worker, args=(a,)) for a in range(actors)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    rest = []
    while (v := dq.pop_left()) is not None:
        rest.append(v)
    seen = Counter(v for p in popped for v in p) + Counter(rest)
    pushed = Counter(a * 10_000 + i for a in range(actors) for i in range(per_actor))
    return seen == pushed, sum(len(p) for p in popped), len(rest)


if __name__ == "__main__":
    dq = PackedDeque(4096)
    dq.push_left(1)
    dq.push_right(2)
    print("snapshot after two pushes:", dq.snapshot())
    print("pop_right ->", dq.pop_right(), " pop_left ->", dq.pop_left(), " empty pop ->", dq.pop_left())

    for dq in (PackedDeque(4096), DynamicDeque(256, growable=True)):
        ok, during, after = workout(dq)
        print(f"{type(dq).__name__}: conserved={ok}, popped during run={during}, drained after={after}")
