import math

import numpy as np
import pytest

from cpo_biphoton.correlations import (
    Mode,
    biphoton_wavefunction,
    closed_form_g2,
    closed_form_singles,
    closed_form_wavefunction,
    default_tau_grid,
    eta,
    fit_exponential_rate,
    g2,
    local_extrema,
    metrics,
    mirror,
    singles_rates,
    zeta_norm,
)
from cpo_biphoton.errors import InsufficientSpanError
from cpo_biphoton.params import SystemParams, derive_params
from cpo_biphoton.susceptibility import GridSpec, build_grid


def exact_thin_wavefunction(p, tau):
    """Residues of the two lower-half-plane poles (-iW and -Omega - i Gamma)."""
    d = derive_params(p)
    C = d.kappa * p.gamma_ca * p.L_tilde / (1 + d.kappa)
    G = p.Gamma_ba
    return C / (G - d.W - 1j * p.Omega) * (np.exp(-d.W * tau) - np.exp((1j * p.Omega - G) * tau))


def exact_singles(p):
    """(1/2pi) Int |i beta1 L|^2 via the Lorentzian-product integral."""
    d = derive_params(p)
    W, G = d.W, p.Gamma_ba
    pref = p.L_tilde**2 * d.kappa**2 * p.gamma_ca**2 / (1 + d.kappa) ** 2
    return pref / (2 * math.pi) * math.pi * (W + G) / (W * G * ((W + G) ** 2 + p.Omega**2))


# --- closed form ------------------------------------------------------------

def test_closed_wavefunction_examples(canonical):
    assert closed_form_wavefunction(canonical, 0.0) == 0
    e = eta(canonical)
    assert e == pytest.approx(1e-4 * 1e-3 / (2 * math.pi * 2), rel=1e-14)
    phi = closed_form_wavefunction(canonical, 20.0)
    assert abs(abs(phi) / (2 * math.pi * abs(e)) - 1) <= 0.01


def test_closed_g2_examples(canonical):
    assert closed_form_g2(canonical, 0.0) == 1.0
    assert zeta_norm(canonical) == pytest.approx(0.0625e-6, rel=1e-12)
    plateau = closed_form_g2(canonical, 20.0)
    assert abs((plateau - 1) / 1.6e7 - 1) <= 0.02
    W = derive_params(canonical).W
    t1, t2 = 30.0, 30.0 + 1.0 / W
    ratio = (closed_form_g2(canonical, t2) - 1) / (closed_form_g2(canonical, t1) - 1)
    assert ratio == pytest.approx(math.exp(-W * (t2 - t1)), rel=0.01)


def test_closed_singles_is_literal_expression(canonical, detuned):
    assert closed_form_singles(canonical) == pytest.approx(1e-6 * 1e-4 / 8, rel=1e-14)
    assert closed_form_singles(detuned) == pytest.approx(1e-6 * 1e-4 / (8 * 101), rel=1e-14)


# --- quadrature oracles -------------------------------------------------------

@pytest.mark.parametrize("Omega", [0.0, 10.0])
def test_thin_wavefunction_matches_residues(curves, Omega):
    r = curves.get(Omega, Mode.THIN)
    tau, phi, _ = r.positive()
    exact = exact_thin_wavefunction(r.params, tau)
    assert np.max(np.abs(phi - exact)) <= 1e-3 * np.max(np.abs(exact))


@pytest.mark.parametrize("Omega", [0.0, 10.0])
def test_thin_singles_match_exact_integral(Omega):
    p = SystemParams(kappa=1.0, Omega=Omega)
    s = singles_rates(p, Mode.THIN)
    assert s.G1 == pytest.approx(exact_singles(p), rel=1e-4)
    assert abs(s.G1 - s.G2) <= 1e-10 * s.G1
    assert s.report.converged


def test_singles_reference_value(canonical):
    d = derive_params(canonical)
    leading = canonical.L_tilde**2 * d.kappa**2 * canonical.gamma_ca / (2 * (1 + d.kappa) ** 3)
    G = singles_rates(canonical, Mode.THIN).G1
    assert G == pytest.approx(leading, rel=1e-3)


def test_singles_audit_ratio(canonical):
    # literal closed form over the quadrature value: 2 (1 + W/Gamma)
    W = derive_params(canonical).W
    ratio = closed_form_singles(canonical) / singles_rates(canonical, Mode.THIN).G1
    assert ratio == pytest.approx(2 * (1 + W), rel=1e-4)


@pytest.mark.parametrize("mode", [Mode.THIN, Mode.CLOSED, Mode.FULL])
def test_unpumped_singles_vanish(mode):
    s = singles_rates(SystemParams(kappa=0.0), mode)
    assert s.G1 == 0 and s.G2 == 0


@pytest.mark.parametrize("mode", [Mode.THIN, Mode.CLOSED])
def test_singles_symmetric(mode, rng):
    for _ in range(3):
        p = SystemParams(kappa=10 ** rng.uniform(-1, 1), Omega=rng.uniform(-15, 15),
                         gamma_ca=10 ** rng.uniform(-5, -3))
        s = singles_rates(p, mode)
        assert s.G1 > 0
        assert abs(s.G1 - s.G2) <= 1e-10 * s.G1


def test_full_mode_within_order_L():
    p = SystemParams(kappa=1.0, Omega=10.0, L_tilde=1e-2)
    grid = build_grid(p)
    tau = default_tau_grid(p, n_log=60)
    full = biphoton_wavefunction(p, tau, Mode.FULL, grid)
    thin = biphoton_wavefunction(p, tau, Mode.THIN, grid)
    dev = np.max(np.abs(full - thin)) / np.max(np.abs(thin))
    assert dev <= 10 * p.L_tilde
    s = singles_rates(p, Mode.FULL, grid)
    # |B1|^2 and |B2|^2 differ at O(L) through the linear-response term of D
    assert abs(s.G1 - s.G2) <= 10 * p.L_tilde * s.G1


def test_grid_doubling_changes_peak_little(canonical):
    tau = default_tau_grid(canonical, n_log=80)
    coarse = g2(canonical, tau, Mode.THIN, build_grid(canonical))
    dense = g2(canonical, tau, Mode.THIN, build_grid(canonical, GridSpec(
        points_per_W=100, points_per_Gamma=100, points_per_decade=400)))
    a, b = coarse.g2.max(), dense.g2.max()
    assert abs(a - b) / b < 1e-3


# --- g2 structure -----------------------------------------------------------------

@pytest.mark.parametrize("mode", [Mode.THIN, Mode.CLOSED])
@pytest.mark.parametrize("Omega", [0.0, 10.0])
def test_g2_bounds_and_symmetry(curves, mode, Omega):
    r = curves.get(Omega, mode)
    assert np.all(r.g2 >= 1.0)
    assert np.array_equal(r.tau, -r.tau[::-1])
    assert np.array_equal(r.g2, r.g2[::-1])
    assert r.mode is mode


@pytest.mark.parametrize("mode", [Mode.THIN, Mode.CLOSED])
def test_antibunching_dip(curves, mode):
    r = curves.get(0.0, mode)
    _, _, y = r.positive()
    assert y[0] - 1 <= 1e-3 * (y.max() - 1)


@pytest.mark.parametrize("mode", [Mode.THIN, Mode.CLOSED])
def test_oscillation_spacing(curves, mode):
    r = curves.get(10.0, mode)
    tau, _, y = r.positive()
    sel = tau <= 5.0
    tm, _ = local_extrema(tau[sel], y[sel], "max")
    assert tm.size >= 5
    assert np.all(np.abs(np.diff(tm) / (2 * math.pi / 10) - 1) <= 0.05)


def test_wavefunction_squared_oscillation(curves):
    r = curves.get(10.0, Mode.CLOSED)
    tau, phi, _ = r.positive()
    sel = tau <= 5.0
    y = np.abs(phi[sel]) ** 2
    tm, ym = local_extrema(tau[sel], y, "max")
    tn, yn = local_extrema(tau[sel], y, "min")
    assert np.mean(np.diff(tm)) == pytest.approx(2 * math.pi / 10, rel=0.01)
    amp = ym - np.exp(np.interp(tm, tn, np.log(yn)))
    inner = (tm > tn[0]) & (tm < tn[-1])
    assert fit_exponential_rate(tm[inner], amp[inner], 0, 5) == pytest.approx(1.0, rel=0.1)


def test_quadrature_g2_is_wavefunction_ratio(curves):
    r = curves.get(0.0, Mode.THIN)
    assert np.allclose(r.g2, 1 + np.abs(r.phi) ** 2 / (r.G1 * r.G2), rtol=1e-15, atol=0)


def test_quadrature_closed_discrepancies(curves):
    """Quadrature decays at 2W with a 4x plateau relative to the closed form."""
    thin, closed = curves.get(0.0, Mode.THIN), curves.get(0.0, Mode.CLOSED)
    W = derive_params(thin.params).W
    t, _, y = thin.positive()
    assert fit_exponential_rate(t, y - 1, 10, 5 / W) == pytest.approx(2 * W, rel=0.01)
    tc, _, yc = closed.positive()
    assert fit_exponential_rate(tc, yc - 1, 10, 5 / W) == pytest.approx(W, rel=0.01)
    k = np.searchsorted(t, 20.0)
    assert (y[k] - 1) / (yc[k] - 1) == pytest.approx(4.0, rel=0.01)


def test_unpumped_g2_is_flat():
    r = g2(SystemParams(kappa=0.0), np.linspace(0, 10, 11), Mode.CLOSED)
    assert np.all(r.g2 == 1.0)


def test_tau_grid_layout(canonical, detuned):
    t = default_tau_grid(canonical)
    assert t[0] == 0 and t[-1] == pytest.approx(5 / 2e-4)
    assert np.all(np.diff(t) > 0)
    assert np.diff(t[:10]) == pytest.approx(np.full(9, 1 / 20))
    td = default_tau_grid(detuned)
    assert np.diff(td[:10]) == pytest.approx(np.full(9, math.pi / 200), rel=0.01)
    with pytest.raises(ValueError):
        g2(canonical, [0.0, -1.0, 2.0], Mode.CLOSED)


def test_mirror():
    tau, v = mirror(np.array([0.0, 1.0, 2.0]), np.array([5.0, 6.0, 7.0]))
    assert tau.tolist() == [-2, -1, 0, 1, 2] and v.tolist() == [7, 6, 5, 6, 7]


# --- metrics ---------------------------------------------------------------------

def test_metrics_resonant_closed(curves):
    m = metrics(curves.get(0.0, Mode.CLOSED))
    assert m.coherence_width == pytest.approx(5000, abs=250)
    assert m.oscillation_freq is None
    assert m.dip_value == 1.0
    assert m.visibility >= 0.99
    assert m.peak_g2 == pytest.approx(1 + 1.6e7, rel=0.02)


def test_metrics_resonant_thin(curves):
    m = metrics(curves.get(0.0, Mode.THIN))
    W = derive_params(curves.get(0.0, Mode.THIN).params).W
    assert m.coherence_width == pytest.approx(1 / (2 * W), rel=0.05)
    assert m.visibility >= 0.99


@pytest.mark.parametrize("mode", [Mode.THIN, Mode.CLOSED])
def test_metrics_detuned(curves, mode):
    r = curves.get(10.0, mode)
    m = metrics(r)
    tau, _, _ = r.positive()
    resolution = 2 * math.pi / tau[tau <= 10][-1]
    assert abs(m.oscillation_freq - 10.0) <= resolution
    assert m.visibility >= 0.99
    assert m.coherence_width > 0


def test_metrics_needs_span(canonical):
    r = g2(canonical, np.linspace(0, 100, 201), Mode.CLOSED)
    with pytest.raises(InsufficientSpanError):
        metrics(r)


def test_local_extrema_parabolic():
    t = np.linspace(0, 10, 101)
    tm, ym = local_extrema(t, np.cos(2 * t), "max")
    assert tm == pytest.approx([math.pi, 2 * math.pi, 3 * math.pi], abs=1e-3)
    assert ym == pytest.approx([1.0] * 3, abs=1e-4)


def test_fit_rate():
    t = np.linspace(0, 50, 200)
    assert fit_exponential_rate(t, 3 * np.exp(-0.2 * t), 5, 40) == pytest.approx(0.2, rel=1e-12)
