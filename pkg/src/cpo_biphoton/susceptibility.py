"""Analytic linear (alpha) and four-wave-mixing (beta) responses.

Also builds the piecewise spectral grid on which the correlation integrals
are evaluated: the responses have structure on two scales, the narrow CPO
window ``W`` around zero detuning and the broad ``Gamma_ba`` lines at the
pump sidebands, separated by three to five decades.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GridError
from .params import DerivedParams, SystemParams, derive_params

MIN_POINTS_PER_W = 20


@dataclass(frozen=True)
class SusceptibilityQuad:
    """Responses at detuning(s) ``delta``; fields are scalars or arrays."""

    delta: np.ndarray
    alpha1: np.ndarray
    alpha2: np.ndarray
    beta1: np.ndarray
    beta2: np.ndarray

    def swapped(self) -> "SusceptibilityQuad":
        """Exchange the roles of fields 1 and 2."""
        return SusceptibilityQuad(self.delta, self.alpha2, self.alpha1, self.beta2, self.beta1)


def coherence_term(delta, d: DerivedParams):
    """Coherent field interaction term ``X = -kappa gamma_ca / (W - i delta)``."""
    delta = np.asarray(delta, dtype=float)
    return -d.kappa * d.gamma_ca / (d.W - 1j * delta)


def sideband_widths(delta, Gamma_ba: float, Omega: float):
    """Complex widths ``Gamma_{1,2} = Gamma_ba + i(-/+ Omega - delta)``."""
    delta = np.asarray(delta, dtype=float)
    return Gamma_ba - 1j * (Omega + delta), Gamma_ba + 1j * (Omega - delta)


def _signed_response(numerator, width, kappa: float, field_index: int):
    # Field 1 carries +i, field 2 carries -i.
    sign = 1.0 if field_index == 1 else -1.0
    return sign * 1j * numerator / (width * (1.0 + kappa))


def susceptibilities(delta, p: SystemParams, d: DerivedParams | None = None) -> SusceptibilityQuad:
    if d is None:
        d = derive_params(p)
    delta = np.asarray(delta, dtype=float)
    X = coherence_term(delta, d)
    g1, g2 = sideband_widths(delta, p.Gamma_ba, p.Omega)
    return SusceptibilityQuad(
        delta=delta,
        alpha1=_signed_response(1.0 + X, g1, d.kappa, 1),
        alpha2=_signed_response(1.0 + X, g2, d.kappa, 2),
        beta1=_signed_response(X, g1, d.kappa, 1),
        beta2=_signed_response(X, g2, d.kappa, 2),
    )


@dataclass(frozen=True)
class GridSpec:
    """Resolution knobs for :func:`build_grid`.

    Widths are in units of ``W`` (dense window) or ``Gamma_ba`` (everything
    else). ``tail_extent=None`` picks ``1e4 max(Gamma_ba, |Omega|)``.
    """

    dense_halfwidth_W: float = 50.0
    points_per_W: float = 50.0
    sideband_halfwidth: float = 20.0
    points_per_Gamma: float = 50.0
    points_per_decade: float = 200.0
    tail_extent: float | None = None

    def __post_init__(self):
        for name in ("dense_halfwidth_W", "points_per_W", "sideband_halfwidth",
                     "points_per_Gamma", "points_per_decade", "tail_extent"):
            value = getattr(self, name)
            if value is not None and not (math.isfinite(value) and value > 0):
                raise GridError(f"grid.{name} must be positive and finite, got {value!r}")


@dataclass(frozen=True)
class SpectralGrid:
    nodes: np.ndarray
    W: float
    Omega: float
    dense_halfwidth: float
    sideband_halfwidth: float
    tail_extent: float
    spec: GridSpec = field(repr=False)
    counts: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return int(self.nodes.size)

    def refined(self) -> "SpectralGrid":
        """Halve every step by inserting midpoints."""
        x = self.nodes
        fine = np.empty(2 * x.size - 1)
        fine[0::2] = x
        fine[1::2] = 0.5 * (x[:-1] + x[1:])
        counts = dict(self.counts, total=fine.size)
        return SpectralGrid(fine, self.W, self.Omega, self.dense_halfwidth,
                            self.sideband_halfwidth, self.tail_extent, self.spec, counts)

    def tail_extension(self, factor: float = 2.0) -> tuple[np.ndarray, np.ndarray]:
        """Node sets covering ``[-factor*T, -T]`` and ``[T, factor*T]``."""
        T = self.tail_extent
        n = max(2, int(math.ceil(self.spec.points_per_decade * math.log10(factor))) + 1)
        right = np.geomspace(T, factor * T, n)
        return -right[::-1], right

    def describe(self) -> dict:
        return {
            "nodes": self.size,
            "dense_halfwidth": self.dense_halfwidth,
            "sideband_halfwidth": self.sideband_halfwidth,
            "tail_extent": self.tail_extent,
            **{f"count_{k}": v for k, v in self.counts.items() if k != "total"},
        }


def _uniform(lo: float, hi: float, step: float) -> np.ndarray:
    n = int(math.ceil((hi - lo) / step)) + 1
    return np.linspace(lo, hi, n)


def build_grid(p: SystemParams, spec: GridSpec | None = None) -> SpectralGrid:
    """Piecewise detuning grid, exactly symmetric about zero."""
    spec = spec or GridSpec()
    if spec.points_per_W < MIN_POINTS_PER_W:
        raise GridError(
            f"dense window undersamples W: {spec.points_per_W} points per W "
            f"(need >= {MIN_POINTS_PER_W})")
    d = derive_params(p)
    G = p.Gamma_ba
    Omega = abs(p.Omega)
    dense_hw = spec.dense_halfwidth_W * d.W
    side_hw = max(spec.sideband_halfwidth, 20.0) * G
    T_min = max(200.0 * G, Omega + 100.0 * G)
    if spec.tail_extent is None:
        T = max(1e4 * max(G, Omega), T_min)
    else:
        T = spec.tail_extent * G
    if T < T_min:
        raise GridError(f"tail extent {T} below the minimum {T_min}")
    if dense_hw >= T:
        raise GridError("dense window wider than the tails")

    dense = _uniform(0.0, dense_hw, d.W / spec.points_per_W)
    n_log = int(math.ceil(spec.points_per_decade * math.log10(T / dense_hw))) + 1
    log = np.geomspace(dense_hw, T, n_log)
    side_step = G / spec.points_per_Gamma
    side = _uniform(Omega - side_hw, Omega + side_hw, side_step)

    # Build on |delta| and mirror: symmetric windows at +/-Omega fold onto one.
    half = np.abs(np.concatenate([dense, log, side]))
    half = np.unique(half[half <= T])
    keep = np.concatenate([[True], np.diff(half) > 1e-12 * np.maximum(1.0, half[1:])])
    half = half[keep]
    positive = half[half > 0]
    nodes = np.concatenate([-positive[::-1], [0.0], positive])
    counts = {"dense": 2 * dense.size - 1, "log": 2 * log.size, "sideband": side.size,
              "total": nodes.size}
    return SpectralGrid(nodes, d.W, p.Omega, dense_hw, side_hw, T, spec, counts)
