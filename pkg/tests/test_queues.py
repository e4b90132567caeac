import threading

import pytest

from gangsteal.queues import GangDeque, LeveledQueues, StealQueue


def test_owner_pops_lifo():
    q = StealQueue()
    for x in "abc":
        q.push(x)
    assert [q.pop(), q.pop(), q.pop()] == ["c", "b", "a"]
    assert q.pop() is None


def test_thief_steals_fifo():
    q = StealQueue()
    for x in "abc":
        q.push(x)
    assert [q.steal(), q.steal(), q.steal()] == ["a", "b", "c"]
    assert q.steal() is None


def test_owner_prefers_high_priority_thief_prefers_low():
    q = StealQueue()
    q.push("low1", priority=0)
    q.push("high", priority=2)
    q.push("low2", priority=0)
    q.push("mid", priority=1)
    assert q.pop() == "high"
    assert q.steal() == "low1"
    assert q.pop() == "mid"
    assert q.steal() == "low2"


def test_equal_priority_keeps_insertion_order_between_ends():
    q = StealQueue()
    for i in range(5):
        q.push(i)
    assert q.pop() == 4
    assert q.steal() == 0
    assert q.snapshot() == [1, 2, 3]


def test_predicates_filter_both_ends():
    q = StealQueue()
    for i in range(6):
        q.push(i)
    odd = lambda x: x % 2 == 1
    assert q.pop(odd) == 5
    assert q.steal(odd) == 1
    assert q.pop(lambda x: x < 0) is None
    assert len(q) == 4


def test_push_is_safe_under_contention():
    q = StealQueue()

    def producer(base):
        for i in range(500):
            q.push(base + i, priority=i % 3)

    threads = [threading.Thread(target=producer, args=(1000 * t,)) for t in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    out = set()
    while (item := q.steal()) is not None:
        out.add(item)
    assert len(out) == 2000


def test_gang_deque_is_fifo_for_eligible_entries():
    dq = GangDeque()
    for x in ("g0", "g1", "g2"):
        dq.push(x)
    assert dq.take_eligible(lambda c: True) == "g0"
    assert dq.take_eligible(lambda c: c == "g2") == "g2"
    assert dq.snapshot() == ["g1"]
    assert dq.take_eligible(lambda c: False) is None
    assert len(dq) == 1


def test_leveled_queues_grow_on_demand():
    lq = LeveledQueues()
    lq.at(3).push("deep")
    assert len(lq.levels()) == 4
    assert lq.total() == 1
    assert lq.at(3).pop() == "deep"
    with pytest.raises(ValueError):
        lq.at(-1)
