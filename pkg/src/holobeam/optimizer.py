"""Alternating MMSE optimisation of the hybrid holographic beamformer.

Each iteration runs, in order: MMSE combiners, MSE weights, digital
precoder, holographic sweep.  Both beamformer steps minimise the weighted
sum-MSE under the power budget (see :mod:`holobeam.updates`), and after
each of them the precoder is rescaled to radiate exactly ``alpha`` while the
combiners absorb the inverse factor.  With the weights frozen the objective
therefore never increases within an iteration, and the power budget holds
with equality after every step.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import mse as mc
from .geometry import SystemConfig
from .updates import (
    DegeneratePrecoderError,
    power_penalty,
    scale_to_power,
    solve_digital,
    update_holo_all,
)

__all__ = [
    "InitMode",
    "OptimizerSettings",
    "IterationRecord",
    "RunTrace",
    "initialize",
    "refresh_receivers",
    "digital_step",
    "holographic_step",
    "run",
]


class InitMode(str, enum.Enum):
    ONES = "ones"
    HALF = "half"
    UNIFORM = "uniform-random"


@dataclass(frozen=True)
class OptimizerSettings:
    tol: float = 1e-4
    max_iters: int = 100
    ridge_scale: float = 1e-8
    init_mode: InitMode = InitMode.ONES
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "init_mode", InitMode(self.init_mode))
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if int(self.max_iters) < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.ridge_scale < 0:
            raise ValueError("ridge_scale must be non-negative")


@dataclass(frozen=True)
class IterationRecord:
    sum_rate: float
    weighted_sum_mse: float  # after the holographic step, weights of this iteration
    power_used: float
    max_w: float
    min_w: float
    # weighted sum-MSE at the start of the iteration and after the digital step,
    # both evaluated with this iteration's weights
    wsmse_start: float = float("nan")
    wsmse_after_digital: float = float("nan")


@dataclass
class RunTrace:
    records: list[IterationRecord] = field(default_factory=list)
    initial_sum_rate: float = float("nan")
    converged: bool = False

    @property
    def iterations_run(self) -> int:
        return len(self.records)

    @property
    def sum_rates(self) -> np.ndarray:
        return np.array([r.sum_rate for r in self.records])

    @property
    def final_sum_rate(self) -> float:
        return self.records[-1].sum_rate if self.records else self.initial_sum_rate


def _noise(config: SystemConfig) -> np.ndarray:
    return np.asarray(config.noise_vars, dtype=float)


def refresh_receivers(channels, phi, state: mc.BeamformingState, noise_vars):
    """Recompute MMSE combiners and MSE weights for the current beamformers."""
    g = mc.compute_gains(channels, state.holo_weights, phi, state.digital)
    f = mc.mmse_combiner(g, noise_vars)
    weights = mc.mse_weights(mc.mse_per_user(g, f, noise_vars))
    return state.replace(combiners=f, mse_weights=weights)


def initialize(config: SystemConfig, channels, phi, settings: OptimizerSettings, seed=None):
    """Starting point: holographic weights per ``init_mode``, random scaled precoder."""
    rng = np.random.default_rng(settings.seed if seed is None else seed)
    M, K, D = config.num_elements, config.num_feeds, config.num_users
    mode = settings.init_mode
    if mode is InitMode.ONES:
        w = np.ones(M)
    elif mode is InitMode.HALF:
        w = np.full(M, 0.5)
    else:
        w = rng.uniform(0.0, 1.0, M)
    V = (rng.standard_normal((K, D)) + 1j * rng.standard_normal((K, D))) / np.sqrt(2)
    V, _ = scale_to_power(w, phi, V, config.power_budget)
    state = mc.BeamformingState(
        digital=V, holo_weights=w, combiners=np.zeros(D, complex), mse_weights=np.ones(D)
    )
    return refresh_receivers(channels, phi, state, _noise(config))


def _rescaled(state, phi, alpha):
    try:
        V, factor = scale_to_power(state.holo_weights, phi, state.digital, alpha)
    except DegeneratePrecoderError:
        return state
    return state.replace(digital=V, combiners=state.combiners / factor)


def digital_step(channels, phi, state, noise_vars, alpha, ridge_scale=1e-8):
    """Precoder update under the power budget, combiners rescaled to match."""
    xi = power_penalty(state.combiners, state.mse_weights, noise_vars, alpha)
    try:
        V = solve_digital(
            channels,
            phi,
            state.holo_weights,
            state.combiners,
            state.mse_weights,
            ridge_scale=ridge_scale,
            penalty=xi,
        )
    except DegeneratePrecoderError:
        return state
    return _rescaled(state.replace(digital=V), phi, alpha)


def holographic_step(channels, phi, state, noise_vars, alpha):
    """Power-aware Gauss-Seidel sweep, then restore the power budget."""
    xi = power_penalty(state.combiners, state.mse_weights, noise_vars, alpha)
    w = update_holo_all(
        channels,
        phi,
        state.digital,
        state.combiners,
        state.mse_weights,
        state.holo_weights,
        penalty=xi,
    )
    return _rescaled(state.replace(holo_weights=w), phi, alpha)


def _wsmse(channels, phi, state, noise_vars):
    g = mc.compute_gains(channels, state.holo_weights, phi, state.digital)
    return mc.weighted_sum_mse(g, state.combiners, state.mse_weights, noise_vars)


def _rate(channels, phi, state, noise_vars):
    g = mc.compute_gains(channels, state.holo_weights, phi, state.digital)
    return mc.sum_rate(g, noise_vars)


def run(config: SystemConfig, channels, phi, settings: OptimizerSettings | None = None,
        state: mc.BeamformingState | None = None):
    """Iterate until the relative sum-rate change drops below ``tol``.

    Returns the final state (with combiners and weights refreshed for the
    final beamformers) and the per-iteration trace.
    """
    settings = settings or OptimizerSettings()
    noise = _noise(config)
    alpha = config.power_budget
    if state is None:
        state = initialize(config, channels, phi, settings)
    trace = RunTrace(initial_sum_rate=_rate(channels, phi, state, noise))
    prev_rate = trace.initial_sum_rate
    for _ in range(int(settings.max_iters)):
        state = refresh_receivers(channels, phi, state, noise)
        j0 = _wsmse(channels, phi, state, noise)
        state = digital_step(channels, phi, state, noise, alpha, settings.ridge_scale)
        j1 = _wsmse(channels, phi, state, noise)
        state = holographic_step(channels, phi, state, noise, alpha)
        j2 = _wsmse(channels, phi, state, noise)
        w = state.holo_weights
        rate = _rate(channels, phi, state, noise)
        trace.records.append(
            IterationRecord(
                sum_rate=rate,
                weighted_sum_mse=j2,
                power_used=mc.transmit_power(w, phi, state.digital),
                max_w=float(w.max()),
                min_w=float(w.min()),
                wsmse_start=j0,
                wsmse_after_digital=j1,
            )
        )
        if abs(rate - prev_rate) <= settings.tol * max(1.0, prev_rate):
            trace.converged = True
            break
        prev_rate = rate
    state = refresh_receivers(channels, phi, state, noise)
    return state, trace
