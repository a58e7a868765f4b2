import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tpc.trajectory import TargetSchedule, ease, round_half_away, target_count


@pytest.mark.parametrize("x, expected", [(0.0, 0.0), (0.5, 0.75), (1.0, 1.0), (0.25, 0.4375)])
def test_ease_exact_values(x, expected):
    assert ease(x) == expected


@pytest.mark.parametrize("x", [-1e-9, 1.0000001, math.nan, -3.0])
def test_ease_rejects_out_of_domain(x):
    with pytest.raises(ValueError):
        ease(x)


@given(st.floats(min_value=1e-6, max_value=1 - 1e-6))
def test_ease_dominates_linear_and_square(x):
    assert ease(x) > x > x * x


@given(st.floats(0, 1), st.floats(0, 1))
def test_ease_monotone(a, b):
    lo, hi = sorted((a, b))
    assert ease(lo) <= ease(hi)


@pytest.mark.parametrize("v, r", [(0.5, 1), (-0.5, -1), (1.5, 2), (2.5, 3), (-2.5, -3),
                                  (2.4999, 2), (0.0, 0), (-0.49, 0)])
def test_round_half_away(v, r):
    assert round_half_away(v) == r


def test_schedule_endpoints_and_midpoint():
    sched = TargetSchedule(10_000, 50_000, 500, 15_000)
    assert target_count(sched, 0) == 10_000
    assert target_count(sched, 500) == 10_000
    assert target_count(sched, 7_750) == 40_000
    assert target_count(sched, 15_000) == 50_000
    assert target_count(sched, 20_000) == 50_000
    assert sched(7_750) == 40_000


def test_schedule_rejects_empty_window():
    with pytest.raises(ValueError):
        TargetSchedule(1, 2, 100, 100)


@given(st.integers(1, 10**6), st.integers(1, 10**6), st.integers(0, 5000), st.integers(1, 20000))
def test_schedule_monotone_towards_target(n0, k, t0, span):
    sched = TargetSchedule(n0, k, t0, t0 + span)
    ts = [t0 + round(span * i / 16) for i in range(17)]
    vals = [target_count(sched, t) for t in ts]
    assert vals[0] == n0 and vals[-1] == k
    steps = [b - a for a, b in zip(vals, vals[1:])]
    if k >= n0:
        assert all(s >= 0 for s in steps)
    else:
        assert all(s <= 0 for s in steps)
    lo, hi = min(n0, k), max(n0, k)
    assert all(lo <= v <= hi for v in vals)
