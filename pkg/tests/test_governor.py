import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tpc.config import defaults
from tpc.governor import (Branch, GovernorError, GovernorState, actuation_times, actuations_left,
                          compute_quota, cutoff_command, notify_reset, observe_delta,
                          tpc_command, uncontrolled_command)

CFG = defaults()


@pytest.mark.parametrize("t, expected", [(15_000, 1), (14_900, 2), (500, 146), (14_950, 1)])
def test_actuations_left(t, expected):
    assert actuations_left(t, CFG) == expected


def test_actuations_left_past_window():
    with pytest.raises(GovernorError):
        actuations_left(15_001, CFG)


def test_actuation_times_cover_window():
    ts = list(actuation_times(CFG))
    assert ts[0] == 500 and ts[-1] == 15_000 and len(ts) == 146


def _quiet(**kw):
    return defaults().replace(**{"deadband_fraction": 0.0, "quota_floor_fraction": 0.0, **kw})


def test_quota_plain_division():
    assert compute_quota(1000, 4, 10_000, 500, _quiet()) == 250
    assert compute_quota(-1000, 4, 10_000, 500, _quiet()) == -250
    assert compute_quota(10, 4, 10_000, 500, _quiet()) == 3
    assert compute_quota(-10, 4, 10_000, 500, _quiet()) == -3


def test_quota_floor_zeroes_small_quota_outside_endgame():
    cfg = _quiet(quota_floor_fraction=0.01, target_count=50_000)
    assert cfg.quota_floor == 500
    assert compute_quota(1200, 6, 10_000, 500, cfg) == 0
    # inside the endgame the floor drops to 1
    assert compute_quota(1200, 6, 10_000, 14_600, cfg) == 200


def test_quota_deadband_zeroes():
    cfg = defaults()
    assert compute_quota(99, 1, 10_000, 15_000, cfg) == 0
    assert compute_quota(100, 1, 10_000, 15_000, cfg) == 100
    cfg = cfg.replace(deadband_floor=300)
    assert compute_quota(299, 1, 10_000, 15_000, cfg) == 0


def test_quota_requires_actuations():
    with pytest.raises(GovernorError):
        compute_quota(10, 0, 10, 500, CFG)


def test_observe_delta():
    s = GovernorState.initial(CFG)
    assert observe_delta(s, 100) == 0
    assert observe_delta(s, 130) == 30
    assert observe_delta(s, 90) == -40


def test_first_actuation_is_deadband_with_defaults():
    s = GovernorState.initial(CFG)
    cmd = tpc_command(s, 500, CFG.initial_count, CFG)
    assert cmd.branch is Branch.DEADBAND and cmd.gap == 0 and cmd.quota == 0
    assert (cmd.tau_den_eff, cmd.tau_prune_eff) == (CFG.tau_den_default, CFG.tau_prune_default)


def test_under_target_lowers_densify_threshold_and_floors_pruning():
    cfg = _quiet(gain_den=1e-4)
    s = GovernorState.initial(cfg)
    cmd = tpc_command(s, 500, 5_000, cfg)  # g = 5000, A = 146, q = 34, dN = 0
    assert cmd.branch is Branch.UNDER_TARGET and cmd.quota == 34
    assert s.tau_den == pytest.approx(cfg.tau_den_default * math.exp(-1e-4 * 34))
    assert cmd.tau_den_eff == s.tau_den
    assert cmd.tau_prune_eff == cfg.tau_prune_min
    assert s.tau_prune == cfg.tau_prune_default


def test_step_is_clamped():
    cfg = _quiet(gain_den=1e-3)
    s = GovernorState.initial(cfg)
    s.tau_den = 1e-3
    tpc_command(s, 14_900, 9_700, cfg)  # g = 300, A = 2, q = 150 -> raw step -0.15
    assert s.tau_den == pytest.approx(1e-3 * math.exp(-0.12))


def test_over_target_raises_prune_threshold_and_caps_densify():
    cfg = _quiet()
    s = GovernorState.initial(cfg)
    cmd = tpc_command(s, 500, 20_000, cfg)  # g = -10000, q = -68
    assert cmd.branch is Branch.OVER_TARGET and cmd.quota == -68
    assert cmd.tau_den_eff == cfg.tau_den_max
    assert s.tau_prune == pytest.approx(cfg.tau_prune_default * math.exp(1e-3 * 68))
    assert cmd.tau_prune_eff == s.tau_prune
    assert s.tau_den == cfg.tau_den_default


def test_thresholds_respect_bounds():
    cfg = _quiet(gain_den=1.0, gain_prune=1.0)
    s = GovernorState.initial(cfg)
    for t in actuation_times(cfg):
        tpc_command(s, t, 1, cfg)
        assert cfg.tau_den_min <= s.tau_den <= cfg.tau_den_max
    assert s.tau_den == cfg.tau_den_min


def test_deadband_keeps_persisted_thresholds():
    s = GovernorState.initial(CFG)
    s.tau_den, s.tau_prune = 3e-4, 7e-3
    cmd = tpc_command(s, 1000, 12_000, CFG)  # N* = 12033
    assert cmd.branch is Branch.DEADBAND
    assert (cmd.tau_den_eff, cmd.tau_prune_eff) == (3e-4, 7e-3)
    assert (s.tau_den, s.tau_prune) == (3e-4, 7e-3)


def test_lockout_floors_pruning_and_freezes_prune_retuning():
    cfg = _quiet()
    s = GovernorState.initial(cfg)
    notify_reset(s, 3000, cfg)
    cmd = tpc_command(s, 3000, 50_000, cfg)
    assert cmd.branch is Branch.LOCKOUT
    assert cmd.tau_prune_eff == cfg.tau_prune_min
    assert cmd.tau_den_eff == cfg.tau_den_max
    assert s.tau_prune == cfg.tau_prune_default
    assert tpc_command(s, 3400, 50_000, cfg).branch is Branch.LOCKOUT
    after = tpc_command(s, 3500, 50_000, cfg)
    assert after.branch is Branch.OVER_TARGET and after.tau_prune_eff > cfg.tau_prune_default


def test_lockout_still_updates_densify_when_under_target():
    cfg = _quiet()
    s = GovernorState.initial(cfg)
    notify_reset(s, 3000, cfg)
    cmd = tpc_command(s, 3000, 100, cfg)
    assert cmd.branch is Branch.LOCKOUT
    assert s.tau_den < cfg.tau_den_default


def test_actuation_order_enforced():
    s = GovernorState.initial(CFG)
    with pytest.raises(GovernorError):
        tpc_command(s, 550, 10_000, CFG)
    with pytest.raises(GovernorError):
        tpc_command(s, 400, 10_000, CFG)
    tpc_command(s, 600, 10_000, CFG)
    with pytest.raises(GovernorError):
        tpc_command(s, 600, 10_000, CFG)


def test_cutoff_latches():
    s = GovernorState.initial(CFG)
    a = cutoff_command(s, 500, 39_999, 40_000, CFG)
    assert a.branch is Branch.UNCONTROLLED and a.churn_enabled
    assert (a.tau_den_eff, a.tau_prune_eff) == (CFG.tau_den_default, CFG.tau_prune_default)
    b = cutoff_command(s, 600, 40_000, 40_000, CFG)
    assert b.branch is Branch.CAP_FROZEN and not b.churn_enabled
    c = cutoff_command(s, 700, 30_000, 40_000, CFG)
    assert c.branch is Branch.CAP_FROZEN


def test_uncontrolled_uses_defaults():
    s = GovernorState.initial(CFG)
    cmd = uncontrolled_command(s, 500, 1, CFG)
    assert cmd.branch is Branch.UNCONTROLLED and cmd.churn_enabled
    assert (cmd.tau_den_eff, cmd.tau_prune_eff) == (CFG.tau_den_default, CFG.tau_prune_default)
    assert cmd.gap == CFG.initial_count - 1


@given(st.lists(st.integers(0, 500_000), min_size=1, max_size=146),
       st.floats(1e-6, 10), st.floats(1e-6, 10))
def test_persisted_steps_are_bounded(counts, gain_den, gain_prune):
    cfg = defaults().replace(gain_den=gain_den, gain_prune=gain_prune)
    s = GovernorState.initial(cfg)
    lo, hi = math.exp(-cfg.step_clamp) * (1 - 1e-12), math.exp(cfg.step_clamp) * (1 + 1e-12)
    for t, n in zip(actuation_times(cfg), counts):
        if t in cfg.reset_schedule:
            notify_reset(s, t, cfg)
        prev = (s.tau_den, s.tau_prune)
        cmd = tpc_command(s, t, n, cfg)
        for a, b in zip(prev, (s.tau_den, s.tau_prune)):
            assert lo <= b / a <= hi
        assert cfg.tau_den_min <= s.tau_den <= cfg.tau_den_max
        assert cfg.tau_prune_min <= s.tau_prune <= cfg.tau_prune_max
        assert cfg.tau_den_min <= cmd.tau_den_eff <= cfg.tau_den_max
        assert cfg.tau_prune_min <= cmd.tau_prune_eff <= cfg.tau_prune_max


@given(st.integers(0, 145), st.floats(-0.999, 0.999))
def test_within_deadband_nothing_moves(k, frac):
    cfg = defaults(target_count=60_000)
    t = cfg.densify_from + k * cfg.cadence
    from tpc.trajectory import TargetSchedule, target_count
    n_star = target_count(TargetSchedule.from_config(cfg), t)
    n = n_star + int(frac * cfg.deadband(n_star))
    s = GovernorState.initial(cfg)
    s.last_actuation_t = t - cfg.cadence if k else None
    cmd = tpc_command(s, t, n, cfg)
    assert cmd.branch is Branch.DEADBAND and cmd.quota == 0
    assert (s.tau_den, s.tau_prune) == (cfg.tau_den_default, cfg.tau_prune_default)
