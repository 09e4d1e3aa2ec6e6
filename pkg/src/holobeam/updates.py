"""Closed-form block updates for the digital precoder and holographic weights.

Both updates minimise the weighted sum-MSE ``sum_d m_d MSE_d`` with the
combiners and weights held fixed.  An optional ``power_penalty`` ``xi`` adds
``xi * ||W V||_F^2`` to that objective; with ``xi = sum_d m_d |f_d|^2
sigma_d^2 / alpha`` this is exactly the weighted sum-MSE obtained after
rescaling the precoder to the power budget and the combiners by the inverse
factor, which is what the optimizer uses to keep every block step monotone.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mse import _as_channels, _as_phi, compute_gains, effective_matrix, transmit_power

__all__ = [
    "SingularSystemError",
    "DegeneratePrecoderError",
    "QuadraticCoeffs",
    "power_penalty",
    "scale_to_power",
    "solve_digital",
    "update_digital",
    "extract_quadratic",
    "quadratic_coeffs",
    "update_holo_element",
    "update_holo_all",
]

MAX_CONDITION = 1e14


class SingularSystemError(np.linalg.LinAlgError):
    """The regularised precoder normal equations are numerically singular."""


class DegeneratePrecoderError(SingularSystemError):
    """No user receives any signal, so the precoder objective is flat."""


@dataclass(frozen=True)
class QuadraticCoeffs:
    """Per-element coefficients of ``a[m] w_m^2 - 2 b[m] w_m + const``."""

    a: np.ndarray
    b: np.ndarray

    def minimizer(self, w_prev) -> np.ndarray:
        return np.array(
            [update_holo_element(a, b, w) for a, b, w in zip(self.a, self.b, w_prev)]
        )


def power_penalty(combiners, mse_weights, noise_vars, alpha: float) -> float:
    """Lagrange weight that folds the power budget into the MSE objective."""
    f2 = np.abs(np.asarray(combiners)) ** 2
    return float(np.sum(np.asarray(mse_weights) * f2 * np.asarray(noise_vars)) / alpha)


def scale_to_power(w, phi, V, alpha: float):
    """Rescale ``V`` so that ``||diag(w) phi V||_F^2 == alpha``.

    Returns the scaled precoder and the (positive) scale factor.
    """
    p = transmit_power(w, phi, V)
    if not p > 0:
        raise DegeneratePrecoderError("precoder radiates no power; cannot rescale")
    factor = np.sqrt(alpha / p)
    return np.asarray(V) * factor, float(factor)


def solve_digital(
    channels, phi, w, combiners, mse_weights, *, ridge_scale=1e-8, penalty=0.0
) -> np.ndarray:
    """Unscaled precoder solving the stacked normal equations.

    Column ``d`` solves ``(A + xi W^H W + delta I) v_d = m_d f_d W^H h_d`` with
    ``A = sum_k m_k |f_k|^2 W^H h_k h_k^H W`` and
    ``delta = ridge_scale * trace(A + xi W^H W) / K``.
    """
    H = _as_channels(channels)
    W = effective_matrix(w, phi)
    f = np.asarray(combiners)
    m = np.asarray(mse_weights, dtype=float)
    K = W.shape[1]
    Q = W.conj().T @ H.T  # (K, D), column d = W^H h_d
    rhs = Q * (m * f)
    if not np.any(rhs):
        raise DegeneratePrecoderError("no user receives signal; precoder objective is flat")
    A = (Q * (m * np.abs(f) ** 2)) @ Q.conj().T
    if penalty:
        A = A + penalty * (W.conj().T @ W)
    delta = ridge_scale * np.trace(A).real / K
    A = A + delta * np.eye(K)
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise SingularSystemError(f"precoder system condition number {cond:.3g} exceeds limit")
    return np.linalg.solve(A, rhs)


def update_digital(
    channels,
    phi,
    w,
    combiners,
    mse_weights,
    alpha: float,
    *,
    ridge_scale=1e-8,
    penalty=0.0,
) -> np.ndarray:
    """Closed-form precoder rescaled to meet the power budget with equality."""
    V = solve_digital(
        channels, phi, w, combiners, mse_weights, ridge_scale=ridge_scale, penalty=penalty
    )
    return scale_to_power(w, phi, V, alpha)[0]


def _check_index(m_index, M):
    if not (0 <= m_index < M):
        raise IndexError(f"element index {m_index} out of range for {M} elements")


def quadratic_coeffs(
    channels, phi, V, combiners, mse_weights, w, *, penalty=0.0
) -> QuadraticCoeffs:
    """Coefficients for every element, each with all other weights held at ``w``.

    For user ``d`` and stream ``l`` write ``g[d, l] = c[d, l] + w_m e[d, l]``
    with ``e[d, l] = conj(h_d[m]) (phi V)[m, l]``.  Expanding the weighted
    sum-MSE gives

        a_m = sum_d m_d |f_d|^2 sum_l |e[d, l]|^2  (+ xi ||(phi V)[m]||^2)
        b_m = sum_d m_d (Re(conj(f_d) e[d, d]) - |f_d|^2 sum_l Re(conj(c[d, l]) e[d, l]))
    """
    H = _as_channels(channels)
    phi = _as_phi(phi)
    w = np.asarray(w, dtype=float)
    f = np.asarray(combiners)
    m = np.asarray(mse_weights, dtype=float)
    U = phi @ np.asarray(V)  # (M, D)
    G = compute_gains(H, w, phi, V)
    mf2 = m * np.abs(f) ** 2
    row_power = np.sum(np.abs(U) ** 2, axis=1)
    a = (np.abs(H.T) ** 2 @ mf2 + penalty) * row_power
    E = H.T.conj()[:, :, None] * U[:, None, :]  # (M, D, D)
    C = G[None, :, :] - w[:, None, None] * E
    desired = np.real(np.conj(f)[None, :] * np.diagonal(E, axis1=1, axis2=2)) @ m
    cross = np.real(np.sum(np.conj(C) * E, axis=2)) @ mf2
    return QuadraticCoeffs(a=a, b=desired - cross)


def extract_quadratic(
    channels, phi, V, combiners, mse_weights, w, m_index, *, penalty=0.0
):
    """``(a_m, b_m)`` such that the weighted sum-MSE is ``a_m w_m^2 - 2 b_m w_m + const``."""
    H = _as_channels(channels)
    phi = _as_phi(phi)
    _check_index(m_index, phi.shape[0])
    w = np.asarray(w, dtype=float)
    f = np.asarray(combiners)
    m = np.asarray(mse_weights, dtype=float)
    u = phi[m_index] @ np.asarray(V)  # (D,)
    hm = np.conj(H[:, m_index])
    e = np.outer(hm, u)
    c = compute_gains(H, w, phi, V) - w[m_index] * e
    mf2 = m * np.abs(f) ** 2
    u2 = float(np.sum(np.abs(u) ** 2))
    a = float(np.dot(mf2, np.abs(hm) ** 2) * u2 + penalty * u2)
    b = float(
        np.dot(m, np.real(np.conj(f) * np.diagonal(e)))
        - np.dot(mf2, np.real(np.sum(np.conj(c) * e, axis=1)))
    )
    return a, b


def update_holo_element(a_m: float, b_m: float, w_prev: float) -> float:
    """Minimise ``a w^2 - 2 b w`` over ``[0, 1]``; flat objectives keep ``w_prev``."""
    if a_m > 1e-14 * (1.0 + abs(b_m)):
        return min(max(b_m / a_m, 0.0), 1.0)
    return float(w_prev)


def update_holo_all(
    channels, phi, V, combiners, mse_weights, w, *, penalty=0.0
) -> np.ndarray:
    """One Gauss-Seidel sweep over the elements in ascending order.

    Uses ``sum_l conj(c[d, l]) e[d, l] = conj(h_d[m]) (conj(G) u)_d - w_m |e_d|^2``
    with ``u = (phi V)[m]``, and keeps ``conj(G)`` current through rank-one
    updates, so a sweep costs O(M D (K + D)).
    """
    H = _as_channels(channels)
    phi = _as_phi(phi)
    w = np.array(w, dtype=float)
    f = np.asarray(combiners)
    m = np.asarray(mse_weights, dtype=float)
    U = phi @ np.asarray(V)  # (M, D)
    Uc = U.conj()
    Gc = H @ (w[:, None] * Uc)  # conj of the effective gains
    mf2 = m * np.abs(f) ** 2
    row_power = np.sum(np.abs(U) ** 2, axis=1)
    curvature = (np.abs(H.T) ** 2 @ mf2) * row_power  # a_m without the penalty
    a_all = curvature + penalty * row_power
    hc = H.conj()
    desired = np.real(np.conj(f)[None, :] * hc.T * U) @ m
    for i in range(w.shape[0]):
        t = Gc @ U[i]
        b = desired[i] - np.dot(mf2, np.real(hc[:, i] * t)) + w[i] * curvature[i]
        new = update_holo_element(a_all[i], b, w[i])
        if new != w[i]:
            Gc += (new - w[i]) * np.outer(H[:, i], Uc[i])
            w[i] = new
    return w
