"""Biphoton wavefunction, singles rates and normalized cross-correlation.

Normalized units: the dimensional prefactor ``L/c`` is dropped, so

    Phi(tau) = (1/2pi) Int exp(-i delta tau) conj(A2) B1 d(delta)
    G_k      = (1/2pi) Int |B_k|^2 d(delta)

and ``g2 = 1 + |Phi|^2 / (G1 G2)`` is prefactor free. The closed-form mode
uses the same units, so all three modes are directly comparable.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, InsufficientSpanError
from .params import DerivedParams, SystemParams, derive_params
from .propagation import thin_medium_coefficients, transfer_coefficients
from .susceptibility import GridSpec, SpectralGrid, build_grid, susceptibilities

DEFAULT_RTOL = 1e-4
MAX_REFINEMENTS = 3
_CHUNK_ELEMENTS = 1 << 21


class Mode(str, enum.Enum):
    FULL = "quadrature-full"
    THIN = "quadrature-thin"
    CLOSED = "closed-form"

    @classmethod
    def parse(cls, value) -> "Mode":
        if isinstance(value, cls):
            return value
        aliases = {"full": cls.FULL, "thin": cls.THIN, "closed": cls.CLOSED}
        key = str(value).strip().lower()
        if key in aliases:
            return aliases[key]
        return cls(key)


# ---------------------------------------------------------------------------
# Oscillatory quadrature
# ---------------------------------------------------------------------------

_FACT = [math.factorial(n) for n in range(18)]


def _filon_weights(z):
    """``p = (e^z - 1 - z)/z^2`` and ``q = (z e^z - e^z + 1)/z^2``.

    Power series for ``|z| < 0.5`` where the closed forms cancel.
    """
    small = np.abs(z) < 0.5
    zs = np.where(small, z, 0.0)
    p_ser = np.zeros_like(z)
    q_ser = np.zeros_like(z)
    term = np.ones_like(z)
    for n in range(2, 16):
        p_ser += term / _FACT[n]
        q_ser += (n - 1) * term / _FACT[n]
        term = term * zs
    zb = np.where(small, 1.0, z)
    ez = np.exp(zb)
    p_dir = (ez - 1.0 - zb) / (zb * zb)
    q_dir = (zb * ez - ez + 1.0) / (zb * zb)
    return np.where(small, p_ser, p_dir), np.where(small, q_ser, q_dir)


def filon_trapezoid(nodes, values, tau) -> np.ndarray:
    """``Int exp(-i delta tau) f(delta) d(delta)`` over the node span.

    ``f`` is interpolated linearly between nodes and each segment is
    integrated against the exponential exactly, so the rule stays accurate
    when ``tau`` times the local step is large. At ``tau = 0`` it is the
    composite trapezoidal rule.
    """
    x = np.asarray(nodes, dtype=float)
    f = np.asarray(values, dtype=complex)
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    h = np.diff(x)
    f0, f1 = f[:-1], f[1:]
    out = np.empty(tau.size, dtype=complex)
    rows = max(1, _CHUNK_ELEMENTS // max(1, x.size))
    for start in range(0, tau.size, rows):
        t = tau[start:start + rows, None]
        phase = np.exp(-1j * t * x[:-1])
        p, q = _filon_weights(-1j * t * h)
        out[start:start + rows] = np.sum(h * phase * (p * f0 + q * f1), axis=1)
    return out


@dataclass(frozen=True)
class ConvergenceReport:
    converged: bool
    refinements: int
    changes: tuple
    tail_change: float
    nodes: int
    rtol: float

    def as_dict(self) -> dict:
        return {
            "converged": self.converged,
            "refinements": self.refinements,
            "changes": list(self.changes),
            "tail_change": self.tail_change,
            "nodes": self.nodes,
            "rtol": self.rtol,
        }


def integrate_spectrum(func, grid: SpectralGrid, tau, rtol: float = DEFAULT_RTOL,
                       max_refinements: int = MAX_REFINEMENTS):
    """Fourier integral of ``func`` on ``grid`` with convergence checks.

    The step is halved until the result changes by less than ``rtol``
    relative to its maximum magnitude over ``tau`` (at most
    ``max_refinements`` times). Truncation is checked by integrating over a
    tail extension to twice the grid extent. Returns ``(values, report)``.
    """
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    x = grid.nodes
    fx = np.asarray(func(x), dtype=complex)
    result = filon_trapezoid(x, fx, tau)
    changes = []
    for _ in range(max_refinements):
        mid = 0.5 * (x[:-1] + x[1:])
        xf = np.empty(2 * x.size - 1)
        ff = np.empty(2 * x.size - 1, dtype=complex)
        xf[0::2], xf[1::2] = x, mid
        ff[0::2], ff[1::2] = fx, func(mid)
        x, fx = xf, ff
        finer = filon_trapezoid(x, fx, tau)
        scale = np.max(np.abs(finer))
        diff = np.max(np.abs(finer - result))
        changes.append(float(diff / scale) if scale > 0 else float(diff))
        result = finer
        if changes[-1] < rtol:
            break
    else:
        raise ConvergenceError(
            f"spectral quadrature not converged after {max_refinements} refinements "
            f"(relative changes {changes})")

    left, right = grid.tail_extension()
    tail = filon_trapezoid(left, func(left), tau) + filon_trapezoid(right, func(right), tau)
    scale = np.max(np.abs(result))
    tail_abs = float(np.max(np.abs(tail)))
    if scale == 0:
        tail_change = math.inf if tail_abs > 0 else 0.0
    else:
        tail_change = tail_abs / float(scale)
    if tail_change >= rtol:
        raise ConvergenceError(
            f"integrand not negligible beyond the grid tails (relative tail weight {tail_change:.3g})")
    report = ConvergenceReport(True, len(changes), tuple(changes), tail_change, int(x.size), rtol)
    return result, report


# ---------------------------------------------------------------------------
# Physical quantities
# ---------------------------------------------------------------------------

def _coefficients(delta, p: SystemParams, mode: Mode, d: DerivedParams):
    q = susceptibilities(delta, p, d)
    if mode is Mode.FULL:
        return transfer_coefficients(q, p.L_tilde)
    return thin_medium_coefficients(q, p.L_tilde)


def zeta_norm(p: SystemParams) -> float:
    """Normalization constant ``|beta1(delta=0)|^2 L^2`` of the closed form."""
    q = susceptibilities(0.0, p)
    return float(abs(q.beta1) ** 2 * p.L_tilde ** 2)


def eta(p: SystemParams, d: DerivedParams | None = None) -> complex:
    d = d or derive_params(p)
    return (d.kappa * d.gamma_ca * p.L_tilde
            / (2 * math.pi * (1 + d.kappa) * (p.Gamma_ba - 1j * p.Omega)))


def closed_form_wavefunction(p: SystemParams, tau) -> np.ndarray:
    d = derive_params(p)
    t = np.abs(np.asarray(tau, dtype=float))
    return 2 * math.pi * eta(p, d) * (
        np.exp(-d.W * t) - np.exp((1j * p.Omega - p.Gamma_ba) * t))


def closed_form_singles(p: SystemParams) -> float:
    """Closed-form singles rate (normalized units); about twice the integrated value."""
    d = derive_params(p)
    return (p.L_tilde ** 2 * d.kappa ** 2 * d.gamma_ca
            / ((1 + d.kappa) ** 3 * (p.Gamma_ba ** 2 + p.Omega ** 2)))


def closed_form_g2(p: SystemParams, tau) -> np.ndarray:
    """Normalized correlation in the closed form, including its ``exp(-W|tau|)`` envelope."""
    d = derive_params(p)
    t = np.abs(np.asarray(tau, dtype=float))
    G = p.Gamma_ba
    shape = np.exp(-d.W * t) * (1 + np.exp(-2 * G * t) - 2 * np.cos(p.Omega * t) * np.exp(-G * t))
    zn = zeta_norm(p)
    if zn == 0:
        return np.ones_like(t)
    return 1.0 + shape / zn


def _wavefunction(p, tau, mode, grid, rtol):
    mode = Mode.parse(mode)
    tau = np.asarray(tau, dtype=float)
    if mode is Mode.CLOSED:
        return closed_form_wavefunction(p, tau), None
    d = derive_params(p)
    grid = grid or build_grid(p)

    def integrand(delta):
        c = _coefficients(delta, p, mode, d)
        return np.conj(c.A2) * c.B1 / (2 * math.pi)

    phi, report = integrate_spectrum(integrand, grid, np.abs(tau).ravel(), rtol=rtol)
    return phi.reshape(tau.shape), report


def biphoton_wavefunction(p: SystemParams, tau, mode=Mode.THIN, grid: SpectralGrid | None = None,
                          rtol: float = DEFAULT_RTOL) -> np.ndarray:
    """Two-photon amplitude ``Phi21(|tau|)`` in normalized units."""
    return _wavefunction(p, tau, mode, grid, rtol)[0]


@dataclass(frozen=True)
class SinglesRates:
    G1: float
    G2: float
    mode: Mode
    report: ConvergenceReport | None = None


def singles_rates(p: SystemParams, mode=Mode.THIN, grid: SpectralGrid | None = None,
                  rtol: float = DEFAULT_RTOL) -> SinglesRates:
    mode = Mode.parse(mode)
    if mode is Mode.CLOSED:
        G = closed_form_singles(p)
        return SinglesRates(G, G, mode)
    d = derive_params(p)
    grid = grid or build_grid(p)

    def integrand(delta):
        c = _coefficients(delta, p, mode, d)
        return np.abs(c.B1) ** 2 / (2 * math.pi)

    def integrand2(delta):
        c = _coefficients(delta, p, mode, d)
        return np.abs(c.B2) ** 2 / (2 * math.pi)

    G1, rep = integrate_spectrum(integrand, grid, [0.0], rtol=rtol)
    G2, _ = integrate_spectrum(integrand2, grid, [0.0], rtol=rtol)
    return SinglesRates(float(G1[0].real), float(G2[0].real), mode, rep)


@dataclass(frozen=True)
class CorrelationResult:
    """Correlation curves on a mirrored time grid (``tau`` ascending, symmetric)."""

    tau: np.ndarray
    phi: np.ndarray
    G1: float
    G2: float
    g2: np.ndarray
    mode: Mode
    zeta_norm: float
    params: SystemParams
    convergence: dict = field(default_factory=dict)

    def positive(self):
        """``(tau, phi, g2)`` restricted to ``tau >= 0``."""
        sel = self.tau >= 0
        return self.tau[sel], self.phi[sel], self.g2[sel]


def mirror(tau_pos, values):
    """Extend ``values(tau >= 0)`` to ``-tau`` by evenness."""
    tau_pos = np.asarray(tau_pos)
    values = np.asarray(values)
    skip = 1 if tau_pos[0] == 0 else 0
    return (np.concatenate([-tau_pos[skip:][::-1], tau_pos]),
            np.concatenate([values[skip:][::-1], values]))


def default_tau_grid(p: SystemParams, span_W: float = 5.0, n_log: int = 400) -> np.ndarray:
    """Linear to ``10/Gamma_ba`` (step ``pi/(20 Omega)`` or ``1/(20 Gamma_ba)``), then logarithmic to ``span_W/W``."""
    d = derive_params(p)
    G = p.Gamma_ba
    step = math.pi / (20 * abs(p.Omega)) if p.Omega != 0 else 1.0 / (20 * G)
    t_lin = 10.0 / G
    linear = np.linspace(0.0, t_lin, int(math.ceil(t_lin / step)) + 1)
    t_end = span_W / d.W
    if t_end <= t_lin:
        return linear
    return np.concatenate([linear, np.geomspace(t_lin, t_end, n_log)[1:]])


def _validate_tau(tau_grid) -> np.ndarray:
    t = np.asarray(tau_grid, dtype=float)
    if t.ndim != 1 or t.size < 2 or np.any(t < 0) or np.any(np.diff(t) <= 0):
        raise ValueError("tau grid must be a strictly increasing 1-D array of times >= 0")
    return t


def g2(p: SystemParams, tau_grid=None, mode=Mode.THIN, grid: SpectralGrid | None = None,
       rtol: float = DEFAULT_RTOL) -> CorrelationResult:
    """Normalized second-order cross-correlation.

    Quadrature modes return ``1 + |Phi|^2/(G1 G2)``. The closed-form mode
    returns the closed-form correlation (see :func:`closed_form_g2`), whose
    envelope is ``exp(-W|tau|)`` rather than the ``exp(-2W|tau|)`` of
    ``|Phi|^2``.
    """
    mode = Mode.parse(mode)
    t = _validate_tau(default_tau_grid(p) if tau_grid is None else tau_grid)
    if mode is not Mode.CLOSED and grid is None:
        grid = build_grid(p)
    phi, rep_phi = _wavefunction(p, t, mode, grid, rtol)
    rates = singles_rates(p, mode, grid, rtol)
    if mode is Mode.CLOSED:
        values = closed_form_g2(p, t)
        convergence = {"path": "closed-form"}
    else:
        denom = rates.G1 * rates.G2
        values = 1.0 + (np.abs(phi) ** 2 / denom if denom > 0 else np.zeros_like(t))
        convergence = {
            "path": mode.value,
            "grid": grid.describe(),
            "phi": rep_phi.as_dict(),
            "singles": rates.report.as_dict(),
        }
    tau_m, phi_m = mirror(t, phi)
    _, g2_m = mirror(t, values)
    return CorrelationResult(tau_m, phi_m, rates.G1, rates.G2, g2_m, mode, zeta_norm(p), p, convergence)


# ---------------------------------------------------------------------------
# Curve metrics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CorrelationMetrics:
    peak_g2: float
    peak_tau: float
    dip_value: float
    coherence_width: float | None
    oscillation_freq: float | None
    visibility: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def local_extrema(tau, y, kind: str = "max"):
    """Strict interior local maxima (or minima) refined by a parabola through three points."""
    y = np.asarray(y, dtype=float)
    tau = np.asarray(tau, dtype=float)
    s = 1.0 if kind == "max" else -1.0
    yy = s * y
    idx = np.nonzero((yy[1:-1] > yy[:-2]) & (yy[1:-1] >= yy[2:]))[0] + 1
    t_out, y_out = [], []
    for i in idx:
        t0, t1, t2 = tau[i - 1:i + 2]
        y0, y1, y2 = y[i - 1:i + 2]
        coeff = np.polyfit([t0 - t1, 0.0, t2 - t1], [y0, y1, y2], 2)
        if coeff[0] != 0:
            dt = -coeff[1] / (2 * coeff[0])
            if abs(dt) <= max(t1 - t0, t2 - t1):
                t_out.append(t1 + dt)
                y_out.append(np.polyval(coeff, dt))
                continue
        t_out.append(t1)
        y_out.append(y1)
    return np.array(t_out), np.array(y_out)


def fit_exponential_rate(tau, y, t_min: float, t_max: float) -> float:
    """Least-squares decay rate ``r`` of ``y ~ exp(-r tau)`` on ``[t_min, t_max]``."""
    tau = np.asarray(tau, dtype=float)
    y = np.asarray(y, dtype=float)
    sel = (tau >= t_min) & (tau <= t_max) & (y > 0)
    if np.count_nonzero(sel) < 2:
        raise InsufficientSpanError("fewer than two usable points in the fit window")
    slope, _ = np.polyfit(tau[sel], np.log(y[sel]), 1)
    return float(-slope)


def _oscillation_frequency(tau, y, t_max):
    sel = tau <= t_max
    t, v = tau[sel], y[sel]
    if t.size < 8:
        return None
    n = t.size
    tu = np.linspace(t[0], t[-1], n)
    vu = np.interp(tu, t, v)
    vu = vu - vu.mean()
    dt = tu[1] - tu[0]
    n_pad = 16 * (1 << int(math.ceil(math.log2(n))))
    spec = np.abs(np.fft.rfft(vu, n_pad))
    omega = 2 * math.pi * np.fft.rfftfreq(n_pad, dt)
    valid = omega >= 2 * math.pi / (tu[-1] - tu[0])
    if not np.any(valid):
        return None
    k = int(np.flatnonzero(valid)[np.argmax(spec[valid])])
    if 0 < k < spec.size - 1:
        a, b, c = spec[k - 1:k + 2]
        denom = a - 2 * b + c
        shift = 0.5 * (a - c) / denom if denom != 0 else 0.0
        return float(omega[k] + shift * (omega[1] - omega[0]))
    return float(omega[k])


def metrics(r: CorrelationResult, d: DerivedParams | None = None) -> CorrelationMetrics:
    """Scan-based curve metrics on the ``tau >= 0`` half of ``r``.

    ``coherence_width`` is the time at which ``g2 - 1`` falls to 1/e of the
    maximum of its slow component (the part beyond ``10/Gamma_ba``, or the
    global peak when that lies later).

    The oscillation frequency is estimated only for a detuned pump, from the
    spectrum of ``g2`` restricted to ``tau <= 10/Gamma_ba``.
    """
    p = r.params
    d = d or derive_params(p)
    tau, _, y = r.positive()
    span = 5.0 / d.W
    if tau[-1] < span * (1 - 1e-9):
        raise InsufficientSpanError(f"tau grid ends at {tau[-1]:.6g}, metrics need >= 5/W = {span:.6g}")
    k = int(np.argmax(y))
    peak, peak_tau = float(y[k]), float(tau[k])
    width = None
    if peak > 1:
        # Reference the slow (width W) component: past 10/Gamma_ba the
        # antibunching and sideband terms have died out.
        slow = tau >= 10.0 / p.Gamma_ba
        ref = k if not np.any(slow[k:]) or slow[k] else int(np.flatnonzero(slow)[0])
        ref = ref + int(np.argmax(y[ref:]))
        corr = (y - 1) / (y[ref] - 1)
        below = np.flatnonzero(corr[ref:] < math.exp(-1))
        if below.size == 0:
            raise InsufficientSpanError("correlated part never drops below 1/e of its peak")
        j = ref + int(below[0])
        c0, c1 = np.log(corr[j - 1]), np.log(max(corr[j], 1e-300))
        t0, t1 = tau[j - 1], tau[j]
        width = float(t0 + (-1 - c0) * (t1 - t0) / (c1 - c0))
    freq = None
    if p.Omega != 0:
        freq = _oscillation_frequency(tau, y, 10.0 / p.Gamma_ba)
    ymax, ymin = float(np.max(r.g2)), float(np.min(r.g2))
    return CorrelationMetrics(
        peak_g2=peak,
        peak_tau=peak_tau,
        dip_value=float(y[0]),
        coherence_width=width,
        oscillation_freq=freq,
        visibility=(ymax - ymin) / (ymax + ymin),
    )
