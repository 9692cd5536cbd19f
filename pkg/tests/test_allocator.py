import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from artgas.allocator import (
    AllocationError,
    Candidate,
    GtsRequest,
    GtsTable,
    ThresholdParams,
    Thresholds,
    artgas_allocate,
    artgas_reclaim,
    compute_threshold,
    dealloc_timeout_superframes,
    fcfs_allocate,
    fcfs_deallocate_expired,
)
from artgas.priority import DataState
from artgas.superframe import SuperframeConfig

CFG = SuperframeConfig()


def test_fcfs_caps_at_seven():
    table = GtsTable()
    res = fcfs_allocate([GtsRequest(i, i) for i in range(8)], table, CFG)
    assert [g.device_id for g in res.grants] == list(range(7))
    assert res.rejects == [7]
    table.check(CFG)


def test_fcfs_with_six_held():
    table = GtsTable()
    for i in range(6):
        table.grant(100 + i)
    res = fcfs_allocate([GtsRequest(1), GtsRequest(2), GtsRequest(3)], table, CFG)
    assert [g.device_id for g in res.grants] == [1]
    assert res.rejects == [2, 3]


def test_fcfs_duplicate_ignored():
    table = GtsTable()
    table.grant(4)
    res = fcfs_allocate([GtsRequest(4)], table, CFG)
    assert res.ignored == [4] and not res.grants


def test_dealloc_frees_room_first():
    table = GtsTable()
    for i in range(7):
        table.grant(i)
    res = fcfs_allocate([GtsRequest(9), GtsRequest(3, is_deallocation=True)], table, CFG)
    assert res.released == [3]
    assert [g.device_id for g in res.grants] == [9]


def test_oldest_grant_sits_at_the_end():
    table = GtsTable()
    for i in (5, 6, 7):
        table.grant(i)
    assert [(d.device_id, d.start_slot) for d in table] == [(7, 13), (6, 14), (5, 15)]
    table.revoke(6)
    assert [(d.device_id, d.start_slot) for d in table] == [(7, 14), (5, 15)]


@pytest.mark.parametrize("bo,expected", [(0, 512), (3, 64), (8, 2), (10, 2), (14, 2)])
def test_timeout(bo, expected):
    assert dealloc_timeout_superframes(bo) == expected


def test_fcfs_expiry():
    table = GtsTable()
    table.grant(1)
    table.grant(2)
    for _ in range(64):
        table.record_usage({1: False, 2: True})
    assert fcfs_deallocate_expired(table, CFG) == [1]
    assert table.owners == [2]


def test_threshold_examples():
    assert compute_threshold([20.0] * 4, 1.5, 0.9, 3) == pytest.approx(30 / 0.729)
    # mu = delta**bo reduces to the mean magnitude
    assert compute_threshold([10, 20, 30, -40], 0.729, 0.9, 3) == pytest.approx(25.0)
    assert compute_threshold([50.0, 1.0], 1.0, 1.0, 7) == pytest.approx(25.5)


@pytest.mark.parametrize("args", [([], 1, 0.9, 3), ([1.0], 0, 0.9, 3), ([1.0], 1, 0, 3), ([1.0], 1, 1.2, 3)])
def test_threshold_rejects(args):
    with pytest.raises(AllocationError):
        compute_threshold(*args)


def test_threshold_params_need_ordering():
    with pytest.raises(AllocationError):
        ThresholdParams(mu_m=1.0, mu_l=0.5)
    th = ThresholdParams().thresholds([10.0] * 5, 3)
    assert th.low > th.middle and th.high == 40


@given(st.lists(st.floats(0.1, 60), min_size=1, max_size=20), st.floats(0.1, 3), st.floats(1.01, 4))
def test_threshold_linear_in_mu(ps, mu, k):
    assert compute_threshold(ps, mu * k, 0.9, 3) == pytest.approx(k * compute_threshold(ps, mu, 0.9, 3))


@given(st.lists(st.floats(0.1, 60), min_size=1, max_size=20), st.integers(0, 13))
def test_threshold_grows_with_bo(ps, bo):
    assert compute_threshold(ps, 1, 0.9, bo + 1) > compute_threshold(ps, 1, 0.9, bo)


def test_artgas_prefers_highest():
    table = GtsTable()
    for i in range(5):
        table.grant(100 + i)
    cands = [Candidate(1, DataState.HIGH, 41), Candidate(2, DataState.HIGH, 50), Candidate(3, DataState.HIGH, 45)]
    res = artgas_allocate(cands, Thresholds(1, 1), table, CFG)
    assert [g.device_id for g in res.grants] == [2, 3]
    assert res.rejects == [1]


def test_artgas_threshold_filter():
    table = GtsTable()
    cands = [Candidate(1, DataState.HIGH, 39.9), Candidate(2, DataState.LOW, 12), Candidate(3, DataState.MIDDLE, 12)]
    res = artgas_allocate(cands, Thresholds(low=13, middle=11), table, CFG)
    assert [g.device_id for g in res.grants] == [3]
    assert sorted(res.rejects) == [1, 2]


def test_reclaim_shrinks_cfp():
    table = GtsTable()
    for i in range(4):
        table.grant(i)
    usage = {0: True, 1: False, 2: True, 3: False}
    table.record_usage(usage)
    assert sorted(artgas_reclaim(table, usage)) == [1, 3]
    assert table.split(CFG).cfp_slots == 2
    table.check(CFG)


def test_reclaim_respects_idle_limit():
    table = GtsTable()
    table.grant(0)
    usage = {0: False}
    table.record_usage(usage)
    assert artgas_reclaim(table, usage, idle_limit=2) == []
    table.record_usage(usage)
    assert artgas_reclaim(table, usage, idle_limit=2) == [0]


def brute_force(cands, th, free):
    elig = [c for c in cands if c.priority >= th.for_state(c.state)]
    k = min(free, len(elig))
    best = None
    for combo in itertools.combinations(elig, k):
        key = sorted((-c.priority, c.device_id) for c in combo)
        if best is None or key < best[0]:
            best = (key, {c.device_id for c in combo})
    return best[1] if best else set()


def random_instance(rng):
    n = rng.randint(0, 10)
    cands = [Candidate(i, DataState(rng.randint(0, 2)), float(rng.choice([rng.uniform(1, 59), rng.randint(1, 59)]))) for i in range(n)]
    held = rng.randint(0, 7)
    table = GtsTable()
    for j in range(held):
        table.grant(100 + j)
    th = Thresholds(low=rng.uniform(0, 40), middle=rng.uniform(0, 40))
    return cands, th, table, 7 - held


def test_artgas_matches_brute_force():
    rng = random.Random(11)
    for _ in range(300):
        cands, th, table, free = random_instance(rng)
        res = artgas_allocate(cands, th, table, CFG)
        assert {g.device_id for g in res.grants} == brute_force(cands, th, free)


@settings(max_examples=200)
@given(st.lists(st.tuples(st.integers(0, 15), st.booleans(), st.booleans()), max_size=60))
def test_table_invariants_hold(ops):
    table = GtsTable()
    for dev, dealloc, used in ops:
        if used:
            usage = {d: (d + dev) % 2 == 0 for d in table.owners}
            table.record_usage(usage)
            artgas_reclaim(table, usage)
        else:
            fcfs_allocate([GtsRequest(dev, is_deallocation=dealloc)], table, CFG)
        table.check(CFG)
        assert len(table) <= 7
