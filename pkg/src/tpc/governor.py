"""Quota governor and the three comparison regimes.

At every cadence-aligned actuation the host reports its current primitive
count and gets back a :class:`ThresholdCommand`: the effective densification
and pruning thresholds to hand to its own densify/prune operator. The TPC
policy turns the gap to the target trajectory into a per-actuation quota and
nudges the persisted thresholds with clamped log-space steps. The cutoff and
uncontrolled policies share the same calling convention so that all regimes
actuate at exactly the same iterations.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .config import GovernorConfig
from .trajectory import TargetSchedule, round_half_away, target_count


class GovernorError(ValueError):
    pass


class Branch(str, enum.Enum):
    UNDER_TARGET = "under_target"
    OVER_TARGET = "over_target"
    DEADBAND = "deadband"
    LOCKOUT = "lockout"
    CAP_FROZEN = "cap_frozen"
    UNCONTROLLED = "uncontrolled"


@dataclass
class GovernorState:
    tau_den: float
    tau_prune: float
    last_count: int | None = None
    last_actuation_t: int | None = None
    lockout_until: int | None = None
    cap_hit: bool = False

    @classmethod
    def initial(cls, cfg: GovernorConfig) -> "GovernorState":
        return cls(tau_den=cfg.tau_den_default, tau_prune=cfg.tau_prune_default)

    def lockout_active(self, t: int) -> bool:
        return self.lockout_until is not None and t < self.lockout_until


@dataclass(frozen=True)
class ThresholdCommand:
    tau_den_eff: float
    tau_prune_eff: float
    branch: Branch
    quota: int
    gap: int

    @property
    def churn_enabled(self) -> bool:
        """False once a hard cap has frozen the population: skip densify and prune."""
        return self.branch is not Branch.CAP_FROZEN


def actuation_times(cfg: GovernorConfig) -> range:
    """Cadence-aligned actuation iterations ``t_start + k*c <= t_stop``."""
    return range(cfg.densify_from, cfg.densify_until + 1, cfg.cadence)


def actuations_left(t: int, cfg: GovernorConfig) -> int:
    if t > cfg.densify_until:
        raise GovernorError(f"t={t} is past the densification window end {cfg.densify_until}")
    return 1 + (cfg.densify_until - t) // cfg.cadence


def _in_endgame(t: int, cfg: GovernorConfig) -> bool:
    return actuations_left(t, cfg) <= cfg.endgame_window


def compute_quota(g: int, A: int, n_star: int, t: int, cfg: GovernorConfig) -> int:
    if A < 1:
        raise GovernorError(f"actuations left must be >= 1, got {A}")
    q = round_half_away(g / A)
    if abs(g) < cfg.deadband(n_star):
        return 0
    q_min = 1 if _in_endgame(t, cfg) else cfg.quota_floor
    if abs(q) < q_min:
        return 0
    return q


def observe_delta(state: GovernorState, n_now: int) -> int:
    delta = 0 if state.last_count is None else n_now - state.last_count
    state.last_count = n_now
    return delta


def notify_reset(state: GovernorState, t_reset: int, cfg: GovernorConfig) -> None:
    state.lockout_until = t_reset + cfg.lockout_duration


def _check_actuation(state: GovernorState, t: int, cfg: GovernorConfig) -> None:
    if not cfg.densify_from <= t <= cfg.densify_until:
        raise GovernorError(
            f"t={t} outside densification window [{cfg.densify_from}, {cfg.densify_until}]")
    if (t - cfg.densify_from) % cfg.cadence:
        raise GovernorError(f"t={t} is not aligned to cadence {cfg.cadence} from {cfg.densify_from}")
    if state.last_actuation_t is not None and t <= state.last_actuation_t:
        raise GovernorError(f"t={t} does not advance past last actuation {state.last_actuation_t}")
    state.last_actuation_t = t


def _log_step(tau: float, delta: float, clamp: float, lo: float, hi: float) -> float:
    delta = min(clamp, max(-clamp, delta))
    return min(hi, max(lo, tau * math.exp(delta)))


def _gap_and_quota(t: int, n_now: int, cfg: GovernorConfig) -> tuple[int, int, int]:
    n_star = target_count(TargetSchedule.from_config(cfg), t)
    g = n_star - n_now
    q = compute_quota(g, actuations_left(t, cfg), n_star, t, cfg)
    return n_star, g, q


def tpc_command(state: GovernorState, t: int, n_now: int, cfg: GovernorConfig) -> ThresholdCommand:
    _check_actuation(state, t, cfg)
    dn = observe_delta(state, n_now)
    n_star, g, q = _gap_and_quota(t, n_now, cfg)
    delta = cfg.deadband(n_star)
    locked = state.lockout_active(t)

    if g > delta:
        branch = Branch.UNDER_TARGET
        e_u = q - dn
        state.tau_den = _log_step(state.tau_den, -cfg.gain_den * e_u, cfg.step_clamp,
                                  cfg.tau_den_min, cfg.tau_den_max)
        tau_den_eff = state.tau_den
        tau_prune_eff = cfg.tau_prune_min
    elif g < -delta:
        branch = Branch.OVER_TARGET
        tau_den_eff = cfg.tau_den_max
        if not locked:
            # pruning re-tuning is suspended while the lockout holds
            e_o = (-q) - (-dn)
            state.tau_prune = _log_step(state.tau_prune, cfg.gain_prune * e_o, cfg.step_clamp,
                                        cfg.tau_prune_min, cfg.tau_prune_max)
        tau_prune_eff = state.tau_prune
    else:
        branch = Branch.DEADBAND
        tau_den_eff = state.tau_den
        tau_prune_eff = state.tau_prune

    if locked:
        branch = Branch.LOCKOUT
        tau_prune_eff = cfg.tau_prune_min
    return ThresholdCommand(tau_den_eff, tau_prune_eff, branch, q, g)


def cutoff_command(state: GovernorState, t: int, n_now: int, budget: int,
                   cfg: GovernorConfig) -> ThresholdCommand:
    _check_actuation(state, t, cfg)
    observe_delta(state, n_now)
    _, g, q = _gap_and_quota(t, n_now, cfg)
    if state.cap_hit or n_now >= budget:
        state.cap_hit = True
        return ThresholdCommand(cfg.tau_den_max, cfg.tau_prune_min, Branch.CAP_FROZEN, q, g)
    return ThresholdCommand(cfg.tau_den_default, cfg.tau_prune_default, Branch.UNCONTROLLED, q, g)


def uncontrolled_command(state: GovernorState, t: int, n_now: int,
                         cfg: GovernorConfig) -> ThresholdCommand:
    _check_actuation(state, t, cfg)
    observe_delta(state, n_now)
    _, g, q = _gap_and_quota(t, n_now, cfg)
    return ThresholdCommand(cfg.tau_den_default, cfg.tau_prune_default, Branch.UNCONTROLLED, q, g)
