"""Per-user MSE, MMSE combining and sum-rate evaluation.

Conventions used throughout the package:

* ``channels`` is (D, M) with row ``d`` holding ``h_d``; the received
  signal of user ``d`` is ``y_d = sum_k h_d^H W v_k s_k + n_d``.
* ``W = diag(w) @ phi`` is the (M, K) holographic beamformer and ``V`` the
  (K, D) digital precoder.
* User ``d`` estimates its symbol as ``conj(f_d) * y_d``, so with the
  effective gains ``g[d, k] = h_d^H W v_k``

      MSE_d = |f_d|^2 (sum_k |g[d, k]|^2 + sigma_d^2) - 2 Re(conj(f_d) g[d, d]) + 1.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "BeamformingState",
    "effective_matrix",
    "compute_gains",
    "mmse_combiner",
    "mse_per_user",
    "mse_weights",
    "sum_rate",
    "sinr",
    "weighted_sum_mse",
    "transmit_power",
]


@dataclass(frozen=True)
class BeamformingState:
    digital: np.ndarray  # (K, D) complex
    holo_weights: np.ndarray  # (M,) real in [0, 1]
    combiners: np.ndarray  # (D,) complex
    mse_weights: np.ndarray  # (D,) real > 0

    def replace(self, **changes) -> "BeamformingState":
        return replace(self, **changes)


def _as_channels(channels) -> np.ndarray:
    return np.asarray(getattr(channels, "channels", channels))


def _as_phi(phi) -> np.ndarray:
    return np.asarray(getattr(phi, "phi", phi))


def effective_matrix(w, phi) -> np.ndarray:
    """Return ``diag(w) @ phi`` without forming the diagonal matrix."""
    w = np.asarray(w, dtype=float)
    phi = _as_phi(phi)
    if w.ndim != 1 or phi.ndim != 2 or phi.shape[0] != w.shape[0]:
        raise ValueError(
            f"holographic weights of shape {w.shape} do not match phase matrix {phi.shape}"
        )
    return w[:, None] * phi


def compute_gains(channels, w, phi, V) -> np.ndarray:
    """Effective gains ``g[d, k] = h_d^H diag(w) phi v_k`` as a (D, D) array."""
    H = _as_channels(channels)
    W = effective_matrix(w, phi)
    V = np.asarray(V)
    if H.ndim != 2 or H.shape[1] != W.shape[0]:
        raise ValueError(f"channels {H.shape} do not match {W.shape[0]} elements")
    if V.ndim != 2 or V.shape[0] != W.shape[1]:
        raise ValueError(f"precoder {V.shape} does not match {W.shape[1]} feeds")
    return H.conj() @ (W @ V)


def _desired(gains):
    return np.diagonal(gains, axis1=-2, axis2=-1)


def _received_power(gains, noise_vars):
    return np.sum(np.abs(gains) ** 2, axis=-1) + np.asarray(noise_vars, dtype=float)


def mmse_combiner(gains, noise_vars) -> np.ndarray:
    """MMSE receive weights ``f_d = g[d, d] / (sum_k |g[d, k]|^2 + sigma_d^2)``."""
    gains = np.asarray(gains)
    return _desired(gains) / _received_power(gains, noise_vars)


def mse_per_user(gains, combiners, noise_vars) -> np.ndarray:
    gains = np.asarray(gains)
    f = np.asarray(combiners)
    return (
        np.abs(f) ** 2 * _received_power(gains, noise_vars)
        - 2.0 * np.real(np.conj(f) * _desired(gains))
        + 1.0
    )


def mse_weights(mse) -> np.ndarray:
    """Weights ``1 / (ln 2 * MSE_d)`` that align the weighted-MSE and sum-rate KKT points."""
    mse = np.asarray(mse, dtype=float)
    if np.any(~(mse > 0)):
        raise ValueError(f"MSE values must be positive, got {mse}")
    return 1.0 / (mse * np.log(2.0))


def sinr(gains, noise_vars) -> np.ndarray:
    gains = np.asarray(gains)
    desired = np.abs(_desired(gains)) ** 2
    interference = np.sum(np.abs(gains) ** 2, axis=-1) - desired
    return desired / (interference + np.asarray(noise_vars, dtype=float))


def sum_rate(gains, noise_vars) -> float:
    """Achievable sum rate in bit/s/Hz with Gaussian signalling."""
    return float(np.sum(np.log2(1.0 + sinr(gains, noise_vars))))


def weighted_sum_mse(gains, combiners, weights, noise_vars):
    """``sum_d m_d MSE_d``; a stack of gain matrices gives one value per matrix."""
    out = mse_per_user(gains, combiners, noise_vars) @ np.asarray(weights, dtype=float)
    return float(out) if np.ndim(out) == 0 else out


def transmit_power(w, phi, V) -> float:
    """Radiated power ``Tr(W V V^H W^H) = ||W V||_F^2``."""
    return float(np.linalg.norm(effective_matrix(w, phi) @ np.asarray(V)) ** 2)
