"""Target-count governor for densify/prune training loops, plus a simulated plant.

The governor steers a population of primitives along a fast-start target
trajectory by adjusting two thresholds at every actuation. The harness runs it
against a seeded stochastic plant next to two baselines (no control, and a hard
budget cutoff) so the regimes can be compared at matched capacity.
"""

from .config import (ConfigError, GovernorConfig, PlantLaws, RegimeKind, RegimeSpec, defaults,
                     load, parse, serialize, validate)
from .governor import (Branch, GovernorError, GovernorState, ThresholdCommand, actuation_times,
                       actuations_left, compute_quota, cutoff_command, notify_reset,
                       observe_delta, tpc_command, uncontrolled_command)
from .harness import (ActuationRecord, RunMetrics, RunResult, check_records, compare, read_csv,
                      run, write_csv)
from .trajectory import TargetSchedule, ease, round_half_away, target_count

__version__ = "0.1.0"

__all__ = [
    "ActuationRecord", "Branch", "ConfigError", "GovernorConfig", "GovernorError",
    "GovernorState", "PlantLaws", "RegimeKind", "RegimeSpec", "RunMetrics", "RunResult",
    "TargetSchedule", "ThresholdCommand", "actuation_times", "actuations_left",
    "check_records", "compare", "compute_quota", "cutoff_command", "defaults", "ease", "load",
    "notify_reset", "observe_delta", "parse", "read_csv", "round_half_away", "run",
    "serialize", "target_count", "tpc_command", "uncontrolled_command", "validate", "write_csv",
]
