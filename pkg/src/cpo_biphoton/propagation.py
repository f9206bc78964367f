"""Backward-wave boundary-value solution for the generated field pair."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GainDivergenceError
from .susceptibility import SusceptibilityQuad

D_MIN = 1e-12
_TAYLOR_LIMIT = 1e-4


@dataclass(frozen=True)
class TransferCoefficients:
    delta: np.ndarray
    A1: np.ndarray
    A2: np.ndarray
    B1: np.ndarray
    B2: np.ndarray
    D: np.ndarray
    R: np.ndarray


def _even_trig(R, L):
    """``cos(R L)`` and ``sin(R L)/R``, both even in ``R``.

    A Taylor series in ``(R L)^2`` covers ``|R L| < 1e-4`` where dividing by
    a tiny ``R`` would lose digits.
    """
    R = np.asarray(R, dtype=complex)
    x = R * L
    x2 = x * x
    small = np.abs(x) < _TAYLOR_LIMIT
    safe_R = np.where(small, 1.0, R)
    cos_RL = np.where(small, 1.0 - x2 / 2.0 + x2 * x2 / 24.0, np.cos(x))
    sinc_RL = np.where(small, L * (1.0 - x2 / 6.0 + x2 * x2 / 120.0), np.sin(safe_R * L) / safe_R)
    return cos_RL, sinc_RL


def transfer_coefficients(q: SusceptibilityQuad, L_tilde: float, *, branch: int = 1) -> TransferCoefficients:
    """Coefficients of ``a1(L) = A1 a1(0) + B1 a2^+(L)``, ``a2^+(0) = A2 a2^+(L) + B2 a1(0)``.

    ``branch=-1`` selects the other square root for ``R``; outputs depend on
    ``R`` only through even functions, so it changes nothing but ``R``.
    """
    if L_tilde < 0:
        raise ValueError("L_tilde must be >= 0")
    a1, a2 = np.asarray(q.alpha1), np.asarray(q.alpha2)
    b1, b2 = np.asarray(q.beta1), np.asarray(q.beta2)
    half_sum = (a1 + a2) / 2.0
    R2 = half_sum * half_sum - b1 * b2
    R = branch * np.sqrt(R2.astype(complex))
    cos_RL, sinc_RL = _even_trig(R, L_tilde)
    D = cos_RL - 1j * half_sum * sinc_RL
    if np.any(np.abs(D) < D_MIN):
        raise GainDivergenceError("|D| below 1e-12: parametric oscillation threshold reached")
    phase = 0.5j * (a1 - a2) * L_tilde
    return TransferCoefficients(
        delta=np.asarray(q.delta),
        A1=np.exp(phase) / D,
        A2=np.exp(-phase) / D,
        B1=1j * b1 * sinc_RL / D,
        B2=1j * b2 * sinc_RL / D,
        D=D,
        R=R,
    )


def thin_medium_coefficients(q: SusceptibilityQuad, L_tilde: float) -> TransferCoefficients:
    """First order in ``L_tilde``: ``A = 1``, ``B = i beta L``."""
    b1, b2 = np.asarray(q.beta1), np.asarray(q.beta2)
    one = np.ones_like(b1, dtype=complex)
    return TransferCoefficients(
        delta=np.asarray(q.delta),
        A1=one,
        A2=one.copy(),
        B1=1j * b1 * L_tilde,
        B2=1j * b2 * L_tilde,
        D=one.copy(),
        R=np.full_like(one, np.nan),
    )
