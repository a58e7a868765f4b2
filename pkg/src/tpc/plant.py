"""Seeded stochastic stand-in for a splatting trainer's densify/prune operator.

Primitives carry only what the control loop observes: an opacity in (0, 1]
and a gradient statistic. One interval of "training" redraws every gradient
statistic from a log-normal law and moves each opacity toward 1, except for a
random subset of redundant primitives whose opacity decays.

All randomness comes from one ``numpy.random.Generator`` per plant and is
consumed in collection order, so a plant's whole history is a function of its
seed and the sequence of calls made on it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .config import PlantLaws

_BURN_IN_STEPS = 40


@dataclass
class SimPlant:
    opacity: np.ndarray
    grad_stat: np.ndarray
    laws: PlantLaws
    rng: np.random.Generator
    ref_count: int
    seed: int
    intervals: int = 0

    @property
    def count(self) -> int:
        return int(self.opacity.shape[0])

    def __len__(self) -> int:
        return self.count

    def grad_log_mean(self) -> float:
        """Current log-mean of the gradient law (shifts down as the population grows)."""
        mu = self.laws.grad_log_mean - self.laws.grad_decay * self.intervals
        if self.laws.grad_saturation and self.count > 0:
            mu -= self.laws.grad_saturation * math.log(self.count / self.ref_count)
        return mu

    def draw_grad(self, n: int) -> np.ndarray:
        return self.rng.lognormal(self.grad_log_mean(), self.laws.grad_log_sd, n)

    def snapshot(self) -> "SimPlant":
        """Deep copy including the RNG position."""
        rng = np.random.Generator(type(self.rng.bit_generator)())
        rng.bit_generator.state = self.rng.bit_generator.state
        return SimPlant(self.opacity.copy(), self.grad_stat.copy(), self.laws, rng,
                        self.ref_count, self.seed, self.intervals)


def new_plant(seed: int, initial_count: int, laws: PlantLaws | None = None) -> SimPlant:
    """Build ``initial_count`` primitives with opacities near the law's stationary state."""
    laws = laws or PlantLaws()
    laws.validate()
    if initial_count < 1:
        raise ValueError(f"initial_count must be >= 1, got {initial_count}")
    rng = np.random.default_rng(seed)
    opacity = rng.uniform(0.5, 1.0, initial_count)
    for _ in range(_BURN_IN_STEPS):
        u = rng.random(initial_count)
        _kernels.opacity_step(opacity, u, laws.drift_rate, laws.p_decay, laws.decay_factor)
    # an all-decay law can underflow during burn-in; keep opacities in (0, 1]
    np.maximum(opacity, np.finfo(np.float64).tiny, out=opacity)
    grad = rng.lognormal(laws.grad_log_mean, laws.grad_log_sd, initial_count)
    return SimPlant(opacity, grad, laws, rng, initial_count, seed)


def step_interval(plant: SimPlant) -> None:
    """Advance one cadence interval of training."""
    plant.intervals += 1
    n = plant.count
    if n == 0:
        return
    plant.grad_stat = plant.draw_grad(n)
    u = plant.rng.random(n)
    laws = plant.laws
    _kernels.opacity_step(plant.opacity, u, laws.drift_rate, laws.p_decay, laws.decay_factor)


def densify(plant: SimPlant, tau_den_eff: float) -> int:
    """Clone every primitive whose gradient statistic reaches the threshold."""
    if not tau_den_eff > 0:
        raise ValueError(f"tau_den_eff must be positive, got {tau_den_eff}")
    idx = _kernels.candidates(plant.grad_stat, tau_den_eff)
    added = int(idx.shape[0])
    if added:
        child_grad = plant.draw_grad(added)
        plant.opacity = np.concatenate([plant.opacity, plant.opacity[idx]])
        plant.grad_stat = np.concatenate([plant.grad_stat, child_grad])
    return added


def prune(plant: SimPlant, tau_prune_eff: float) -> int:
    """Remove every primitive with opacity below the threshold."""
    if not 0 < tau_prune_eff < 1:
        raise ValueError(f"tau_prune_eff must lie in (0, 1), got {tau_prune_eff}")
    before = plant.count
    plant.opacity, plant.grad_stat = _kernels.compact(plant.opacity, plant.grad_stat, tau_prune_eff)
    return before - plant.count


def reset_opacity(plant: SimPlant) -> None:
    np.minimum(plant.opacity, plant.laws.reset_value, out=plant.opacity)


def densify_candidates(plant: SimPlant, thresholds) -> np.ndarray:
    """Number of primitives that would densify at each threshold (no mutation)."""
    return _kernels.count_ge(plant.grad_stat, np.asarray(thresholds, dtype=np.float64))


def prune_candidates(plant: SimPlant, thresholds) -> np.ndarray:
    """Number of primitives that would be culled at each threshold (no mutation)."""
    return _kernels.count_lt(plant.opacity, np.asarray(thresholds, dtype=np.float64))
