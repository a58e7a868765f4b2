"""Full simulated runs of the three regimes, metrics, comparison and file output."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import statistics
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from . import plant as plant_mod
from .config import GovernorConfig, RegimeKind, RegimeSpec, serialize, validate
from .governor import (Branch, GovernorState, ThresholdCommand, actuation_times, cutoff_command,
                       notify_reset, tpc_command, uncontrolled_command)
from .trajectory import TargetSchedule, target_count

TRACKING_SKIP = 10


@dataclass(frozen=True)
class ActuationRecord:
    t: int
    N_before: int
    N_after: int
    N_star: int
    gap: int
    quota: int
    delta: int
    tau_den_eff: float
    tau_prune_eff: float
    branch: str
    reset_active: bool
    added: int
    removed: int
    tau_den: float
    tau_prune: float


RECORD_FIELDS = tuple(f.name for f in dataclasses.fields(ActuationRecord))


@dataclass(frozen=True)
class RunMetrics:
    final_count: int
    final_error_fraction: float
    tracking_rmse_fraction: float
    max_overshoot_fraction: float
    saturation_iteration: int | None
    actuation_count: int


@dataclass
class RunResult:
    regime: RegimeSpec
    seed: int
    records: list[ActuationRecord]
    metrics: RunMetrics
    config: GovernorConfig


def _command(regime: RegimeSpec, state: GovernorState, t: int, n: int,
             cfg: GovernorConfig) -> ThresholdCommand:
    if regime.kind is RegimeKind.TPC:
        return tpc_command(state, t, n, cfg)
    if regime.kind is RegimeKind.CUTOFF:
        return cutoff_command(state, t, n, regime.cutoff_budget, cfg)
    return uncontrolled_command(state, t, n, cfg)


def in_lockout_window(t: int, cfg: GovernorConfig) -> bool:
    return any(r <= t < r + cfg.lockout_duration for r in cfg.reset_schedule)


def run(cfg: GovernorConfig, regime: RegimeSpec, seed: int) -> RunResult:
    """Simulate one regime on a freshly seeded plant.

    Per actuation: train one interval, apply any reset due at this iteration,
    get the regime's command, densify, prune, log. Resets that fall strictly
    between two actuations are applied before the interval's training so that
    opacities start recovering immediately.
    """
    validate(cfg)
    sched = TargetSchedule.from_config(cfg)
    plant = plant_mod.new_plant(seed, cfg.initial_count, cfg.plant)
    state = GovernorState.initial(cfg)
    resets = [r for r in cfg.reset_schedule if r <= cfg.densify_until]
    ri = 0
    records: list[ActuationRecord] = []
    for t in actuation_times(cfg):
        while ri < len(resets) and resets[ri] < t:
            plant_mod.reset_opacity(plant)
            notify_reset(state, resets[ri], cfg)
            ri += 1
        plant_mod.step_interval(plant)
        if ri < len(resets) and resets[ri] == t:
            plant_mod.reset_opacity(plant)
            notify_reset(state, t, cfg)
            ri += 1
        n_before = plant.count
        cmd = _command(regime, state, t, n_before, cfg)
        added = removed = 0
        if cmd.churn_enabled:
            added = plant_mod.densify(plant, cmd.tau_den_eff)
            removed = plant_mod.prune(plant, cmd.tau_prune_eff)
        delta = 0 if not records else n_before - records[-1].N_before
        records.append(ActuationRecord(
            t=t, N_before=n_before, N_after=plant.count, N_star=target_count(sched, t),
            gap=cmd.gap, quota=cmd.quota, delta=delta,
            tau_den_eff=cmd.tau_den_eff, tau_prune_eff=cmd.tau_prune_eff,
            branch=cmd.branch.value, reset_active=in_lockout_window(t, cfg),
            added=added, removed=removed, tau_den=state.tau_den, tau_prune=state.tau_prune,
        ))
    return RunResult(regime, seed, records, compute_metrics(records, cfg), cfg)


def compute_metrics(records: Sequence[ActuationRecord], cfg: GovernorConfig) -> RunMetrics:
    K = cfg.target_count
    if not records:
        return RunMetrics(cfg.initial_count, abs(cfg.initial_count - K) / K, 0.0, 0.0, None, 0)
    final = records[-1].N_after
    errs = [(r.N_after - r.N_star) / K for i, r in enumerate(records)
            if i >= TRACKING_SKIP and not r.reset_active]
    rmse = math.sqrt(sum(e * e for e in errs) / len(errs)) if errs else 0.0
    overshoot = max(0.0, max((r.N_after - r.N_star) / K for r in records))
    saturation = next((r.t for r in records if r.branch == Branch.CAP_FROZEN.value), None)
    return RunMetrics(final, abs(final - K) / K, rmse, overshoot, saturation, len(records))


# ---------------------------------------------------------------------------
# invariants
# ---------------------------------------------------------------------------

class InvariantError(RuntimeError):
    def __init__(self, invariant: str, detail: str):
        self.invariant = invariant
        super().__init__(f"{invariant}: {detail}")


def check_records(records: Sequence[ActuationRecord], cfg: GovernorConfig) -> None:
    """Raise :class:`InvariantError` on conservation or schedule violations."""
    expected = list(actuation_times(cfg))
    got = [r.t for r in records]
    if got != expected:
        raise InvariantError("equal_exposure", f"{len(got)} actuations, expected {len(expected)}")
    sched = TargetSchedule.from_config(cfg)
    for r in records:
        if r.N_after != r.N_before + r.added - r.removed:
            raise InvariantError("conservation", f"t={r.t}")
        if r.N_star != target_count(sched, r.t):
            raise InvariantError("target_consistency", f"t={r.t}")


# ---------------------------------------------------------------------------
# comparison
# ---------------------------------------------------------------------------

METRIC_FIELDS = tuple(f.name for f in dataclasses.fields(RunMetrics))


@dataclass(frozen=True)
class RunSummary:
    """What :func:`compare` needs from a run; :class:`RunResult` satisfies it too."""

    regime: RegimeSpec
    seed: int
    metrics: RunMetrics
    config: GovernorConfig


class ComparisonError(ValueError):
    pass


def _aggregate(values: list[float]) -> dict[str, float]:
    mean = statistics.fmean(values)
    sd = statistics.stdev(values) if len(values) > 1 else 0.0
    return {"mean": mean, "sd": sd}


def compare(runs: Iterable[RunSummary | RunResult], tolerance: float = 0.02) -> dict:
    """Aggregate metrics per regime over seeds and flag capacity-match compliance.

    Every run must share one config, and every regime must cover the same seed set.
    """
    runs = list(runs)
    if not runs:
        raise ComparisonError("no runs to compare")
    cfg_text = serialize(runs[0].config)
    by_regime: dict[str, list] = {}
    for r in runs:
        if serialize(r.config) != cfg_text:
            raise ComparisonError("config_mismatch: runs were produced with different configs")
        by_regime.setdefault(r.regime.label, []).append(r)
    seed_sets = {label: sorted(r.seed for r in rs) for label, rs in by_regime.items()}
    if len({tuple(v) for v in seed_sets.values()}) > 1:
        raise ComparisonError(f"seed_mismatch: {seed_sets}")

    regimes = {}
    for label in sorted(by_regime):
        rs = by_regime[label]
        agg: dict = {}
        for name in METRIC_FIELDS:
            vals = [getattr(r.metrics, name) for r in rs]
            if name == "saturation_iteration":
                hit = [v for v in vals if v is not None]
                agg[name] = _aggregate(hit) if hit else None
                agg["saturated_runs"] = len(hit)
            else:
                agg[name] = _aggregate([float(v) for v in vals])
        kind = rs[0].regime.kind
        if kind is RegimeKind.UNCONTROLLED:
            agg["capacity_compliant"] = None
        else:
            agg["capacity_compliant"] = all(r.metrics.final_error_fraction <= tolerance for r in rs)
        agg["runs"] = len(rs)
        regimes[label] = agg
    return {
        "target_count": runs[0].config.target_count,
        "tolerance": tolerance,
        "seeds": seed_sets[next(iter(seed_sets))],
        "regimes": regimes,
    }


# ---------------------------------------------------------------------------
# files
# ---------------------------------------------------------------------------

def _cell(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def records_to_csv(records: Sequence[ActuationRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RECORD_FIELDS)
    for r in records:
        writer.writerow([_cell(getattr(r, name)) for name in RECORD_FIELDS])
    return buf.getvalue()


def write_csv(records: Sequence[ActuationRecord], path: str | Path) -> Path:
    path = Path(path)
    path.write_text(records_to_csv(records), encoding="utf-8", newline="")
    return path


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(ActuationRecord)}


def _parse_cell(name: str, raw: str):
    kind = _FIELD_TYPES[name]
    if kind == "bool":
        return raw == "1"
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    return raw


def read_csv(path: str | Path) -> list[ActuationRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != RECORD_FIELDS:
            raise ValueError(f"unexpected CSV header in {path}: {header}")
        return [ActuationRecord(**{k: _parse_cell(k, v) for k, v in zip(header, row)})
                for row in reader]


def report_to_text(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def write_report(report: dict, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(report_to_text(report), encoding="utf-8")
    return path


def write_plot_data(records: Sequence[ActuationRecord], path: str | Path) -> Path:
    """Two gnuplot data blocks: ``t N`` then ``t N_star`` (select with ``index 0/1``)."""
    path = Path(path)
    lines = ["# t N"] + [f"{r.t} {r.N_after}" for r in records]
    lines += ["", "", "# t N_star"] + [f"{r.t} {r.N_star}" for r in records]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
