"""Harmonic-balance solution of the three-level Bloch equations.

Independent numerical route to the medium response. No adiabatic
elimination and no CPO-regime assumptions are made; the only approximations
are the rotating-wave form of the fields and linearity in the weak fields.

Equations in the frame rotating at the pump frequency, with the complex Rabi
coupling ``Lam(t) = V0 + e1p exp(-i d t) + e2p exp(+i d t)`` and its
conjugate partner ``Lam*(t) = V0 + e1m exp(+i d t) + e2m exp(-i d t)``::

    d/dt s_ba = -(Gamma_ba - i Omega) s_ba + i Lam (s_aa - s_bb)
    d/dt s_ab = -(Gamma_ba + i Omega) s_ab - i Lam* (s_aa - s_bb)
    d/dt s_bb = -gamma_b s_bb - i (Lam* s_ba - Lam s_ab)
    d/dt s_cc = -gamma_ca s_cc + gamma_bc s_bb
    s_aa + s_bb + s_cc = 1

``e1m``/``e2m`` are treated as independent of ``e1p``/``e2p`` so that every
response coefficient can be read off with a single unit drive.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularSystemError
from .params import SystemParams, derive_params
from .susceptibility import SusceptibilityQuad

ELEMENTS = ("ba", "ab", "aa", "bb", "cc")
_IDX = {name: i for i, name in enumerate(ELEMENTS)}
HARMONICS = ("+", "-")  # coefficients of exp(-i d t) and exp(+i d t)
_COND_LIMIT = 1e14


@dataclass(frozen=True)
class ZerothOrder:
    sigma_aa0: float
    sigma_bb0: float
    sigma_cc0: float
    sigma_ba0: complex

    @property
    def sigma_ab0(self) -> complex:
        return self.sigma_ba0.conjugate()

    def vector(self) -> np.ndarray:
        return np.array([self.sigma_ba0, self.sigma_ab0, self.sigma_aa0,
                         self.sigma_bb0, self.sigma_cc0], dtype=complex)


@dataclass(frozen=True)
class FloquetSolution:
    zeroth: ZerothOrder
    first: dict  # (element, harmonic) -> complex amplitude
    delta: float

    def amplitude(self, element: str, harmonic: str) -> complex:
        return self.first[(element, harmonic)]


def _solve(M: np.ndarray, b: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(M)) or np.linalg.cond(M) > _COND_LIMIT:
        raise SingularSystemError("Bloch system is numerically rank deficient; check the rates")
    return np.linalg.solve(M, b)


def _static_block(p: SystemParams, V0: float, s: complex) -> np.ndarray:
    """Rows of ``(s - L) x = rhs`` for one harmonic; closure row last.

    ``s`` is the time-derivative eigenvalue of the harmonic (0, -i d, +i d).
    """
    G, Om = p.Gamma_ba, p.Omega
    gb = p.gamma_ba + p.gamma_bc
    ba, ab, aa, bb, cc = (_IDX[k] for k in ELEMENTS)
    M = np.zeros((5, 5), dtype=complex)
    # s_ba
    M[0, ba] = s + G - 1j * Om
    M[0, aa] = -1j * V0
    M[0, bb] = 1j * V0
    # s_ab
    M[1, ab] = s + G + 1j * Om
    M[1, aa] = 1j * V0
    M[1, bb] = -1j * V0
    # s_bb
    M[2, bb] = s + gb
    M[2, ba] = 1j * V0
    M[2, ab] = -1j * V0
    # s_cc
    M[3, cc] = s + p.gamma_ca
    M[3, bb] = -p.gamma_bc
    # closure
    M[4, aa] = M[4, bb] = M[4, cc] = 1.0
    return M


def zeroth_order_steady_state(p: SystemParams) -> ZerothOrder:
    """Pump-only steady state."""
    V0 = derive_params(p).V0
    M = _static_block(p, V0, 0.0)
    rhs = np.zeros(5, dtype=complex)
    rhs[4] = 1.0
    x = _solve(M, rhs)
    return ZerothOrder(
        sigma_aa0=float(x[_IDX["aa"]].real),
        sigma_bb0=float(x[_IDX["bb"]].real),
        sigma_cc0=float(x[_IDX["cc"]].real),
        sigma_ba0=complex(x[_IDX["ba"]]),
    )


def first_order_system(p: SystemParams, delta: float, zeroth: ZerothOrder | None = None):
    """Linear map from weak-field drives to the ten first-order amplitudes.

    Returns ``(M, drive)`` where ``M`` is the 10x10 block-diagonal matrix and
    ``drive(e1p, e2p, e1m, e2m)`` builds the right-hand side. Unknowns are
    ordered ``ELEMENTS`` for harmonic ``+`` then for harmonic ``-``.
    """
    V0 = derive_params(p).V0
    z = zeroth or zeroth_order_steady_state(p)
    M = np.zeros((10, 10), dtype=complex)
    M[:5, :5] = _static_block(p, V0, -1j * delta)
    M[5:, 5:] = _static_block(p, V0, 1j * delta)
    n0 = z.sigma_aa0 - z.sigma_bb0

    def drive(e1p=0.0, e2p=0.0, e1m=0.0, e2m=0.0) -> np.ndarray:
        rhs = np.zeros(10, dtype=complex)
        # (field in Lam, field in Lam*) at each harmonic
        for offset, f_lam, f_conj in ((0, e1p, e2m), (5, e2p, e1m)):
            rhs[offset + 0] = 1j * f_lam * n0
            rhs[offset + 1] = -1j * f_conj * n0
            rhs[offset + 2] = -1j * (f_conj * z.sigma_ba0 - f_lam * z.sigma_ab0)
        return rhs

    return M, drive


def solve_first_order(p: SystemParams, delta: float, *, e1p=0.0, e2p=0.0, e1m=0.0, e2m=0.0,
                      zeroth: ZerothOrder | None = None) -> FloquetSolution:
    z = zeroth or zeroth_order_steady_state(p)
    M, drive = first_order_system(p, delta, z)
    x = _solve(M, drive(e1p, e2p, e1m, e2m))
    first = {}
    for h, offset in zip(HARMONICS, (0, 5)):
        for name in ELEMENTS:
            first[(name, h)] = complex(x[offset + _IDX[name]])
    return FloquetSolution(zeroth=z, first=first, delta=float(delta))


def sideband_response(p: SystemParams, delta) -> SusceptibilityQuad:
    """Effective alpha/beta extracted from unit weak-field drives.

    ``sigma_ba`` at ``exp(-i d t)`` gives alpha1 (drive e1p) and beta1
    (drive e2m); ``sigma_ab`` at ``exp(-i d t)`` gives alpha2 (drive e2m)
    and beta2 (drive e1p).
    """
    z = zeroth_order_steady_state(p)
    deltas = np.atleast_1d(np.asarray(delta, dtype=float))
    out = np.empty((4, deltas.size), dtype=complex)
    ba, ab = _IDX["ba"], _IDX["ab"]
    for k, dlt in enumerate(deltas):
        M, drive = first_order_system(p, dlt, z)
        # Both drives at once: columns are the two right-hand sides.
        x = _solve(M, np.column_stack([drive(e1p=1.0), drive(e2m=1.0)]))
        out[:, k] = (x[ba, 0], x[ab, 1], x[ba, 1], x[ab, 0])
    if np.ndim(delta) == 0:
        out = out[:, 0]
        deltas = deltas[0]
    return SusceptibilityQuad(deltas, out[0], out[1], out[2], out[3])
