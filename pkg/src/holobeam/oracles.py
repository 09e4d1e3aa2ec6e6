"""Reference baselines and brute-force checks for the closed-form updates.

None of the checks here call the closed-form code they are meant to verify:
the grid and finite-difference oracles only evaluate the weighted sum-MSE,
and the Monte-Carlo and scalar oracles redo the arithmetic with plain loops
or random sampling.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import asdict, dataclass

import numpy as np

from . import mse as mc
from .geometry import SystemConfig
from .optimizer import OptimizerSettings, digital_step, refresh_receivers
from .updates import scale_to_power

__all__ = [
    "OracleReport",
    "ObjectiveContext",
    "random_w_baseline",
    "grid_oracle_w",
    "mc_mse_oracle",
    "fd_gradient_oracle",
    "naive_gains",
    "naive_sum_rate",
    "naive_phase_matrix",
    "compare",
]


@dataclass(frozen=True)
class OracleReport:
    max_abs_discrepancy: float
    location: str
    samples_checked: int

    def to_dict(self) -> dict:
        return asdict(self)


def compare(actual, expected) -> OracleReport:
    """Worst entrywise discrepancy between two arrays of equal shape."""
    actual = np.asarray(actual)
    expected = np.asarray(expected)
    if actual.shape != expected.shape:
        raise ValueError(f"shape mismatch {actual.shape} vs {expected.shape}")
    diff = np.abs(actual - expected)
    if diff.size == 0:
        return OracleReport(0.0, "", 0)
    idx = np.unravel_index(int(np.argmax(diff)), diff.shape)
    return OracleReport(float(diff[idx]), str(tuple(int(i) for i in idx)), int(diff.size))


@dataclass(frozen=True)
class ObjectiveContext:
    """Everything needed to evaluate the weighted sum-MSE of one instance."""

    channels: np.ndarray  # (D, M)
    phi: np.ndarray  # (M, K)
    digital: np.ndarray  # (K, D)
    combiners: np.ndarray  # (D,)
    mse_weights: np.ndarray  # (D,)
    holo_weights: np.ndarray  # (M,)
    noise_vars: np.ndarray  # (D,)
    penalty: float = 0.0

    def objective(self, *, w=None, V=None, f=None) -> float:
        w = self.holo_weights if w is None else w
        V = self.digital if V is None else V
        f = self.combiners if f is None else f
        g = mc.compute_gains(self.channels, w, self.phi, V)
        value = mc.weighted_sum_mse(g, f, self.mse_weights, self.noise_vars)
        if self.penalty:
            value += self.penalty * mc.transmit_power(w, self.phi, V)
        return value


def random_w_baseline(
    config: SystemConfig, channels, phi, seed: int, settings: OptimizerSettings | None = None
):
    """Random holographic weights with an optimised digital precoder.

    The weights are drawn i.i.d. uniform on [0, 1] and frozen; combiners,
    MSE weights and the precoder are then alternated until the sum rate
    settles.  Returns the final state and its sum rate.
    """
    settings = settings or OptimizerSettings()
    rng = np.random.default_rng(seed)
    M, K, D = config.num_elements, config.num_feeds, config.num_users
    noise = np.asarray(config.noise_vars, dtype=float)
    alpha = config.power_budget
    w = rng.uniform(0.0, 1.0, M)
    V = (rng.standard_normal((K, D)) + 1j * rng.standard_normal((K, D))) / np.sqrt(2)
    V, _ = scale_to_power(w, phi, V, alpha)
    state = mc.BeamformingState(V, w, np.zeros(D, complex), np.ones(D))

    def rate(s):
        return mc.sum_rate(mc.compute_gains(channels, s.holo_weights, phi, s.digital), noise)

    prev = rate(state)
    for _ in range(int(settings.max_iters)):
        state = refresh_receivers(channels, phi, state, noise)
        state = digital_step(channels, phi, state, noise, alpha, settings.ridge_scale)
        current = rate(state)
        if abs(current - prev) <= settings.tol * max(1.0, prev):
            break
        prev = current
    state = refresh_receivers(channels, phi, state, noise)
    return state, rate(state)


def grid_oracle_w(ctx: ObjectiveContext, m_index: int, step: float = 1e-4) -> float:
    """Best ``w_m`` on the grid ``{0, step, ..., 1}`` by direct objective evaluation.

    The gains are affine in a single weight, so evaluating them at
    ``w_m = 0`` and ``w_m = 1`` lets the whole grid be scored in one pass.
    """
    if not 0 < step <= 0.1:
        raise ValueError(f"step must lie in (0, 0.1], got {step}")
    grid = np.linspace(0.0, 1.0, int(round(1.0 / step)) + 1)
    w0 = np.array(ctx.holo_weights, dtype=float)
    w1 = w0.copy()
    w0[m_index], w1[m_index] = 0.0, 1.0
    g0 = mc.compute_gains(ctx.channels, w0, ctx.phi, ctx.digital)
    g1 = mc.compute_gains(ctx.channels, w1, ctx.phi, ctx.digital)
    stack = g0[None] + grid[:, None, None] * (g1 - g0)[None]
    values = mc.weighted_sum_mse(stack, ctx.combiners, ctx.mse_weights, ctx.noise_vars)
    if ctx.penalty:
        p0 = mc.transmit_power(w0, ctx.phi, ctx.digital)
        row = float(np.linalg.norm(ctx.phi[m_index] @ ctx.digital) ** 2)
        values = values + ctx.penalty * (p0 + grid**2 * row)
    return float(grid[int(np.argmin(values))])


def mc_mse_oracle(gains_row, combiner, noise_var, num_samples=100_000, *, user, seed=0):
    """Sample mean and standard error of ``|conj(f) y - s_user|^2``.

    Symbols are unit-power circular Gaussian and the noise is
    ``CN(0, noise_var)``.
    """
    if num_samples < 10_000:
        raise ValueError("num_samples must be at least 1e4")
    g = np.asarray(gains_row)
    rng = np.random.default_rng(seed)
    n_streams = g.shape[0]
    s = (rng.standard_normal((num_samples, n_streams))
         + 1j * rng.standard_normal((num_samples, n_streams))) / np.sqrt(2)
    noise = np.sqrt(noise_var / 2) * (
        rng.standard_normal(num_samples) + 1j * rng.standard_normal(num_samples)
    )
    y = s @ g + noise
    err = np.abs(np.conj(combiner) * y - s[:, user]) ** 2
    return float(err.mean()), float(err.std(ddof=1) / np.sqrt(num_samples))


def fd_gradient_oracle(ctx: ObjectiveContext, selector, step: float = 1e-6):
    """Central-difference gradient of the context objective.

    ``selector`` is ``"combiner"`` (result shape (D, 2): d/dRe, d/dIm per
    user), ``"precoder"`` (shape (K, D, 2)) or ``("w", m)`` (a float).
    """
    if not 0 < step <= 1e-3:
        raise ValueError(f"step must lie in (0, 1e-3], got {step}")

    if isinstance(selector, tuple) and selector[0] == "w":
        m = selector[1]

        def at(delta):
            w = np.array(ctx.holo_weights, dtype=float)
            w[m] += delta
            return ctx.objective(w=w)

        return (at(step) - at(-step)) / (2 * step)

    if selector == "combiner":
        base, key = np.asarray(ctx.combiners, complex), "f"
    elif selector == "precoder":
        base, key = np.asarray(ctx.digital, complex), "V"
    else:
        raise ValueError(f"unknown selector {selector!r}")

    grad = np.zeros(base.shape + (2,))
    for idx in np.ndindex(base.shape):
        for part, unit in enumerate((1.0, 1j)):
            plus, minus = base.copy(), base.copy()
            plus[idx] += unit * step
            minus[idx] -= unit * step
            grad[idx + (part,)] = (
                ctx.objective(**{key: plus}) - ctx.objective(**{key: minus})
            ) / (2 * step)
    return grad


def naive_gains(channels, w, phi, V):
    """``h_d^H diag(w) phi v_k`` by explicit scalar accumulation."""
    H = np.asarray(getattr(channels, "channels", channels))
    phi = np.asarray(getattr(phi, "phi", phi))
    D, M = H.shape
    K = phi.shape[1]
    out = np.zeros((D, V.shape[1]), complex)
    for d in range(D):
        for k in range(V.shape[1]):
            acc = 0j
            for m in range(M):
                for j in range(K):
                    acc += H[d, m].conjugate() * w[m] * phi[m, j] * V[j, k]
            out[d, k] = acc
    return out


def naive_sum_rate(gains, noise_vars) -> float:
    total = 0.0
    for d in range(len(noise_vars)):
        desired = abs(complex(gains[d][d])) ** 2
        interference = sum(
            abs(complex(gains[d][k])) ** 2 for k in range(len(gains[d])) if k != d
        )
        total += math.log2(1.0 + desired / (interference + noise_vars[d]))
    return total


def naive_phase_matrix(element_positions, feed_positions, k_surface_mag):
    rows = []
    for p in element_positions:
        rows.append(
            [cmath.exp(-1j * k_surface_mag * math.dist(tuple(p), tuple(q)))
             for q in feed_positions]
        )
    return np.array(rows)
