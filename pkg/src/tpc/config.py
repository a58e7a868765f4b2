"""Controller, regime and plant parameters.

Everything tunable lives in :class:`GovernorConfig`. Configs are immutable once
built; use :meth:`GovernorConfig.replace` (or :func:`apply_overrides`) to derive
variants. The on-disk format is a flat ``key=value`` text file with ``#``
comments; plant law keys live under the ``plant.`` prefix.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping


class ConfigError(ValueError):
    """A config value violates an invariant."""

    def __init__(self, field: str, reason: str, detail: str = ""):
        self.field = field
        self.reason = reason
        msg = f"{field}: {reason}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


@dataclass(frozen=True)
class PlantLaws:
    """Parameters of the synthetic densify/prune plant.

    ``grad_saturation`` shifts the gradient log-mean down by
    ``grad_saturation * ln(N / N_ref)`` so that uncontrolled growth slows as the
    population fills the scene, and ``grad_decay`` lowers it by that much per
    trained interval as the reconstruction converges. Both 0 gives a stationary
    gradient law.
    """

    grad_log_mean: float = math.log(1e-4)
    grad_log_sd: float = 1.0
    grad_saturation: float = 0.25
    grad_decay: float = 0.013
    drift_rate: float = 0.05
    p_decay: float = 0.05
    decay_factor: float = 0.05
    # below the default prune threshold, so an unprotected reset is a real shock
    reset_value: float = 0.002

    def validate(self) -> None:
        if not math.isfinite(self.grad_log_mean):
            raise ConfigError("plant.grad_log_mean", "not_finite")
        if not self.grad_log_sd > 0:
            raise ConfigError("plant.grad_log_sd", "not_positive")
        if not self.grad_saturation >= 0:
            raise ConfigError("plant.grad_saturation", "negative")
        if not self.grad_decay >= 0:
            raise ConfigError("plant.grad_decay", "negative")
        if not 0 <= self.drift_rate <= 1:
            raise ConfigError("plant.drift_rate", "out_of_range", "expected [0, 1]")
        if not 0 <= self.p_decay <= 1:
            raise ConfigError("plant.p_decay", "out_of_range", "expected [0, 1]")
        if not 0 < self.decay_factor <= 1:
            raise ConfigError("plant.decay_factor", "out_of_range", "expected (0, 1]")
        if not 0 < self.reset_value < 1:
            raise ConfigError("plant.reset_value", "out_of_range", "expected (0, 1)")


@dataclass(frozen=True)
class GovernorConfig:
    target_count: int = 40_000
    initial_count: int = 10_000
    densify_from: int = 500
    densify_until: int = 15_000
    cadence: int = 100
    tau_den_default: float = 2e-4
    tau_prune_default: float = 5e-3
    # multipliers of the defaults
    tau_den_bounds: tuple[float, float] = (0.1, 10.0)
    tau_prune_bounds: tuple[float, float] = (0.2, 10.0)
    step_clamp: float = 0.12
    gain_den: float = 1e-3
    gain_prune: float = 1e-3
    deadband_fraction: float = 0.01
    deadband_floor: int = 0
    quota_floor_fraction: float = 0.01
    endgame_window: int = 15
    reset_schedule: tuple[int, ...] = (3000, 6000, 9000, 12000)
    lockout_duration: int = 500
    plant: PlantLaws = field(default_factory=PlantLaws)

    @property
    def tau_den_min(self) -> float:
        return self.tau_den_default * self.tau_den_bounds[0]

    @property
    def tau_den_max(self) -> float:
        return self.tau_den_default * self.tau_den_bounds[1]

    @property
    def tau_prune_min(self) -> float:
        return self.tau_prune_default * self.tau_prune_bounds[0]

    @property
    def tau_prune_max(self) -> float:
        return self.tau_prune_default * self.tau_prune_bounds[1]

    @property
    def quota_floor(self) -> int:
        return math.ceil(self.quota_floor_fraction * self.target_count)

    def deadband(self, n_star: int) -> float:
        return max(float(self.deadband_floor), self.deadband_fraction * n_star)

    def replace(self, **changes: Any) -> "GovernorConfig":
        return dataclasses.replace(self, **changes)


def defaults(target_count: int | None = None, initial_count: int | None = None) -> GovernorConfig:
    cfg = GovernorConfig()
    if target_count is not None:
        cfg = cfg.replace(target_count=target_count)
    if initial_count is not None:
        cfg = cfg.replace(initial_count=initial_count)
    return cfg


def _check_bounds(name: str, bounds: tuple[float, float]) -> None:
    lo, hi = bounds
    if not (lo > 0 and hi > 0 and math.isfinite(lo) and math.isfinite(hi)):
        raise ConfigError(name, "not_positive")
    if lo > hi:
        raise ConfigError(name, "bounds_inverted", f"min multiplier {lo} > max multiplier {hi}")
    if lo > 1 or hi < 1:
        raise ConfigError(name, "default_outside_bounds", f"[{lo}, {hi}] must contain 1")


def validate(cfg: GovernorConfig) -> None:
    """Raise :class:`ConfigError` naming the first violated invariant."""
    if cfg.target_count < 1:
        raise ConfigError("target_count", "not_positive")
    if cfg.initial_count < 1:
        raise ConfigError("initial_count", "not_positive")
    if cfg.densify_from >= cfg.densify_until:
        raise ConfigError("densify_until", "window_empty",
                          f"densify_from={cfg.densify_from} densify_until={cfg.densify_until}")
    if cfg.cadence < 1:
        raise ConfigError("cadence", "not_positive")
    if cfg.densify_until - cfg.densify_from < cfg.cadence:
        raise ConfigError("cadence", "window_shorter_than_cadence")
    if not cfg.tau_den_default > 0:
        raise ConfigError("tau_den_default", "not_positive")
    if not 0 < cfg.tau_prune_default < 1:
        raise ConfigError("tau_prune_default", "out_of_range", "expected (0, 1)")
    _check_bounds("tau_den_bounds", cfg.tau_den_bounds)
    _check_bounds("tau_prune_bounds", cfg.tau_prune_bounds)
    if not cfg.tau_prune_max < 1:
        raise ConfigError("tau_prune_bounds", "prune_max_not_below_one")
    if not cfg.step_clamp > 0:
        raise ConfigError("step_clamp", "not_positive")
    if not cfg.gain_den > 0:
        raise ConfigError("gain_den", "not_positive")
    if not cfg.gain_prune > 0:
        raise ConfigError("gain_prune", "not_positive")
    if not 0 <= cfg.deadband_fraction < 1:
        raise ConfigError("deadband_fraction", "out_of_range", "expected [0, 1)")
    if cfg.deadband_floor < 0:
        raise ConfigError("deadband_floor", "negative")
    if not 0 <= cfg.quota_floor_fraction < 1:
        raise ConfigError("quota_floor_fraction", "out_of_range", "expected [0, 1)")
    if cfg.endgame_window < 0:
        raise ConfigError("endgame_window", "negative")
    resets = cfg.reset_schedule
    if any(b <= a for a, b in zip(resets, resets[1:])):
        raise ConfigError("reset_schedule", "not_strictly_increasing")
    if cfg.lockout_duration < 0:
        raise ConfigError("lockout_duration", "negative")
    cfg.plant.validate()


class RegimeKind(str, enum.Enum):
    UNCONTROLLED = "uncontrolled"
    CUTOFF = "cutoff"
    TPC = "tpc"


@dataclass(frozen=True)
class RegimeSpec:
    kind: RegimeKind
    cutoff_budget: int | None = None

    def __post_init__(self) -> None:
        kind = RegimeKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is RegimeKind.CUTOFF:
            if self.cutoff_budget is None or self.cutoff_budget < 1:
                raise ConfigError("cutoff_budget", "required_positive_for_cutoff")
        elif self.cutoff_budget is not None:
            raise ConfigError("cutoff_budget", "only_valid_for_cutoff")

    @property
    def label(self) -> str:
        if self.kind is RegimeKind.CUTOFF:
            return f"cutoff@{self.cutoff_budget}"
        return self.kind.value


# ---------------------------------------------------------------------------
# key=value serialization
# ---------------------------------------------------------------------------

_INT_FIELDS = {
    "target_count", "initial_count", "densify_from", "densify_until", "cadence",
    "deadband_floor", "endgame_window", "lockout_duration",
}
_PAIR_FIELDS = {"tau_den_bounds", "tau_prune_bounds"}


def _format_value(value: Any) -> str:
    if isinstance(value, tuple):
        return ",".join(_format_value(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def to_flat(cfg: GovernorConfig) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for f in dataclasses.fields(cfg):
        if f.name == "plant":
            continue
        out[f.name] = getattr(cfg, f.name)
    for f in dataclasses.fields(cfg.plant):
        out[f"plant.{f.name}"] = getattr(cfg.plant, f.name)
    return out


def serialize(cfg: GovernorConfig) -> str:
    lines = [f"{key}={_format_value(value)}" for key, value in to_flat(cfg).items()]
    return "\n".join(lines) + "\n"


def _coerce(key: str, raw: str) -> Any:
    raw = raw.strip()
    try:
        if key == "reset_schedule":
            return tuple(int(v) for v in raw.split(",") if v.strip())
        if key in _PAIR_FIELDS:
            parts = [float(v) for v in raw.split(",")]
            if len(parts) != 2:
                raise ConfigError(key, "expected_pair", raw)
            return (parts[0], parts[1])
        if key in _INT_FIELDS:
            return int(raw)
        return float(raw)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(key, "unparseable", raw) from None


def apply_overrides(cfg: GovernorConfig, values: Mapping[str, str]) -> GovernorConfig:
    """Return ``cfg`` with string-valued ``key -> value`` overrides applied.

    Unknown keys are an error.
    """
    top: dict[str, Any] = {}
    plant: dict[str, Any] = {}
    top_names = {f.name for f in dataclasses.fields(GovernorConfig)} - {"plant"}
    plant_names = {f.name for f in dataclasses.fields(PlantLaws)}
    for key, raw in values.items():
        if key.startswith("plant."):
            name = key[len("plant."):]
            if name not in plant_names:
                raise ConfigError(key, "unknown_key")
            plant[name] = _coerce(key, raw)
        elif key in top_names:
            top[key] = _coerce(key, raw)
        else:
            raise ConfigError(key, "unknown_key")
    if plant:
        top["plant"] = dataclasses.replace(cfg.plant, **plant)
    return cfg.replace(**top)


def parse_lines(lines: Iterable[str]) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", "missing_equals", line)
        key, raw = line.split("=", 1)
        key = key.strip()
        if key in values:
            raise ConfigError(key, "duplicate_key")
        values[key] = raw
    return values


def parse(text: str, base: GovernorConfig | None = None) -> GovernorConfig:
    """Parse a key=value document on top of ``base`` (defaults if omitted)."""
    return apply_overrides(base or GovernorConfig(), parse_lines(text.splitlines()))


def load(path: str | Path) -> GovernorConfig:
    cfg = parse(Path(path).read_text(encoding="utf-8"))
    validate(cfg)
    return cfg
