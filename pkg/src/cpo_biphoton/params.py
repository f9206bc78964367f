"""Dimensionless parameter model and regime validation.

All rates and detunings are expressed in units of the transverse relaxation
rate ``Gamma_ba`` (canonically 1), times in units of ``1/Gamma_ba``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .errors import ParameterError

DEFAULT_THRESHOLD = 10.0

# Rates that must be strictly positive.
_RATE_FIELDS = ("Gamma_ba", "gamma_ba", "gamma_bc", "gamma_ca")


@dataclass(frozen=True)
class SystemParams:
    """Physical inputs of the pumped three-level emitter ensemble.

    Exactly one of ``V0`` (pump Rabi frequency) and ``kappa`` (saturation
    parameter) must be given; the other is derived.
    """

    Gamma_ba: float = 1.0
    gamma_ba: float = 0.02
    gamma_bc: float = 2.0
    gamma_ca: float = 1e-4
    V0: Optional[float] = None
    kappa: Optional[float] = None
    Omega: float = 0.0
    L_tilde: float = 1e-3

    def __post_init__(self):
        for name in _RATE_FIELDS:
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ParameterError(f"{name} must be a positive finite rate, got {value!r}")
        if (self.V0 is None) == (self.kappa is None):
            raise ParameterError("supply exactly one of V0 or kappa")
        pump = self.V0 if self.V0 is not None else self.kappa
        if not (np.isfinite(pump) and pump >= 0):
            raise ParameterError(f"pump parameter must be finite and >= 0, got {pump!r}")
        if not np.isfinite(self.Omega):
            raise ParameterError(f"Omega must be finite, got {self.Omega!r}")
        if not (np.isfinite(self.L_tilde) and self.L_tilde >= 0):
            raise ParameterError(f"L_tilde must be finite and >= 0, got {self.L_tilde!r}")

    def replace(self, **changes) -> "SystemParams":
        """Copy with changes; setting one pump field clears the other."""
        values = asdict(self)
        if "kappa" in changes and "V0" not in changes:
            values["V0"] = None
        if "V0" in changes and "kappa" not in changes:
            values["kappa"] = None
        values.update(changes)
        return SystemParams(**values)

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class DerivedParams:
    kappa: float
    V0: float
    W: float
    gamma_b: float

    @property
    def gamma_ca(self) -> float:
        return self.W / (1.0 + self.kappa)


def _lineshape(Gamma_ba: float, Omega: float) -> float:
    return Gamma_ba * (1.0 + (Omega / Gamma_ba) ** 2)


def kappa_from_V0(V0, gamma_ca, Gamma_ba=1.0, Omega=0.0):
    """Saturation parameter ``2 V0^2 / [gamma_ca Gamma_ba (1 + Omega^2/Gamma_ba^2)]``."""
    return 2.0 * np.square(V0) / (gamma_ca * _lineshape(Gamma_ba, Omega))


def V0_from_kappa(kappa, gamma_ca, Gamma_ba=1.0, Omega=0.0):
    return np.sqrt(kappa * gamma_ca * _lineshape(Gamma_ba, Omega) / 2.0)


def derive_params(p: SystemParams) -> DerivedParams:
    if p.kappa is not None:
        kappa = float(p.kappa)
        V0 = float(V0_from_kappa(kappa, p.gamma_ca, p.Gamma_ba, p.Omega))
    else:
        V0 = float(p.V0)
        kappa = float(kappa_from_V0(V0, p.gamma_ca, p.Gamma_ba, p.Omega))
    return DerivedParams(
        kappa=kappa,
        V0=V0,
        W=(1.0 + kappa) * p.gamma_ca,
        gamma_b=p.gamma_ba + p.gamma_bc,
    )


def _ratio(num: float, den: float) -> float:
    return math.inf if den == 0 else num / den


@dataclass(frozen=True)
class RegimeReport:
    """Margins of every approximation used by the analytic model.

    A check passes when all of its margin ratios exceed ``threshold``.
    The thin-medium margin is ``1 / max(|alpha L|, |beta L|)``.
    """

    threshold: float
    cpo_margins: dict
    metastable_margins: dict
    thin_medium: dict
    narrowband_margin: float
    cpo_regime_ok: bool = field(init=False)
    metastable_ok: bool = field(init=False)
    thin_medium_ok: bool = field(init=False)
    narrowband_ok: bool = field(init=False)

    def __post_init__(self):
        t = self.threshold
        set_ = object.__setattr__
        set_(self, "cpo_regime_ok", all(v > t for v in self.cpo_margins.values()))
        set_(self, "metastable_ok", all(v > t for v in self.metastable_margins.values()))
        set_(self, "thin_medium_ok", self.thin_medium["margin"] > t)
        set_(self, "narrowband_ok", self.narrowband_margin > t)

    @property
    def all_ok(self) -> bool:
        return not self.failed_checks()

    def failed_checks(self) -> list:
        names = ("cpo_regime_ok", "metastable_ok", "thin_medium_ok", "narrowband_ok")
        return [n for n in names if not getattr(self, n)]

    def as_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "cpo_regime_ok": self.cpo_regime_ok,
            "cpo_margins": dict(self.cpo_margins),
            "metastable_ok": self.metastable_ok,
            "metastable_margins": dict(self.metastable_margins),
            "thin_medium_ok": self.thin_medium_ok,
            "thin_medium": dict(self.thin_medium),
            "narrowband_ok": self.narrowband_ok,
            "narrowband_margin": self.narrowband_margin,
        }


def validate_regime(p: SystemParams, threshold: float = DEFAULT_THRESHOLD) -> RegimeReport:
    """Report how deeply ``p`` sits inside the analytic model's regime.

    Never raises on a violated condition; callers decide what to do.
    """
    from .susceptibility import susceptibilities

    d = derive_params(p)
    nodes = np.unique([0.0, p.Omega, -p.Omega])
    q = susceptibilities(nodes, p)
    max_alpha = float(np.max(np.abs(np.concatenate([q.alpha1, q.alpha2])))) * p.L_tilde
    max_beta = float(np.max(np.abs(np.concatenate([q.beta1, q.beta2])))) * p.L_tilde
    return RegimeReport(
        threshold=threshold,
        cpo_margins={
            "gamma_bc/V0": _ratio(p.gamma_bc, d.V0),
            "gamma_bc/gamma_ba": _ratio(p.gamma_bc, p.gamma_ba),
        },
        metastable_margins={
            "gamma_ba/gamma_ca": _ratio(p.gamma_ba, p.gamma_ca),
            "gamma_bc/gamma_ca": _ratio(p.gamma_bc, p.gamma_ca),
        },
        thin_medium={
            "max_alpha_L": max_alpha,
            "max_beta_L": max_beta,
            "margin": _ratio(1.0, max(max_alpha, max_beta)),
        },
        narrowband_margin=_ratio(p.Gamma_ba, d.W),
    )
