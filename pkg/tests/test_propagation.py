import numpy as np
import pytest

from cpo_biphoton.errors import GainDivergenceError
from cpo_biphoton.params import derive_params
from cpo_biphoton.propagation import thin_medium_coefficients, transfer_coefficients
from cpo_biphoton.susceptibility import SusceptibilityQuad, susceptibilities


def _quad(a1, a2, b1, b2):
    arr = lambda v: np.atleast_1d(np.asarray(v, dtype=complex))  # noqa: E731
    return SusceptibilityQuad(np.zeros(np.size(a1)), arr(a1), arr(a2), arr(b1), arr(b2))


def _sweep(p, n=801):
    W = derive_params(p).W
    span = abs(p.Omega) + 20
    delta = np.unique(np.concatenate([np.linspace(-50 * W, 50 * W, 201), np.linspace(-span, span, n)]))
    return susceptibilities(delta, p)


def test_empty_medium(canonical):
    q = _sweep(canonical)
    for c in (transfer_coefficients(q, 0.0), thin_medium_coefficients(q, 0.0)):
        assert np.all(c.A1 == 1) and np.all(c.A2 == 1)
        assert np.all(c.B1 == 0) and np.all(c.B2 == 0)


def test_uncoupled_propagation(rng):
    a1 = rng.normal(size=50) + 1j * rng.uniform(0, 1, 50)
    a2 = rng.normal(size=50) - 1j * rng.uniform(0, 1, 50)
    L = 0.7
    c = transfer_coefficients(_quad(a1, a2, 0, 0), L)
    assert np.all(c.B1 == 0) and np.all(c.B2 == 0)
    assert np.allclose(c.A1, np.exp(1j * a1 * L), rtol=1e-12, atol=0)
    assert np.allclose(c.A2, np.exp(1j * a2 * L), rtol=1e-12, atol=0)


def test_resonant_generation_amplitude(canonical):
    q = susceptibilities(0.0, canonical)
    full = transfer_coefficients(q, 1e-3)
    thin = thin_medium_coefficients(q, 1e-3)
    assert thin.B1 == 2.5e-4
    assert abs(full.B1.imag) < 1e-12 * abs(full.B1) and full.B1.real > 0
    assert full.B1.real == pytest.approx(2.5e-4, rel=1e-3)


def test_branch_invariance(detuned, rng):
    q = _sweep(detuned, 401)
    for L in (1e-4, 1e-2, 0.5):
        plus = transfer_coefficients(q, L, branch=1)
        minus = transfer_coefficients(q, L, branch=-1)
        for name in ("A1", "A2", "B1", "B2", "D"):
            x, y = getattr(plus, name), getattr(minus, name)
            assert np.max(np.abs(x - y) / np.abs(x)) <= 1e-12
        assert np.array_equal(plus.R, -minus.R)


def test_thin_limit_is_linear(canonical, detuned):
    for p in (canonical, detuned):
        q = _sweep(p)
        devs = []
        for L in (1e-2, 1e-3, 1e-4):
            full, thin = transfer_coefficients(q, L), thin_medium_coefficients(q, L)
            devs.append(np.max(np.abs(full.B1 - thin.B1) / np.abs(thin.B1)))
        assert devs[1] <= 1e-2
        # O(L) or better: the first-order term cancels for a resonant pump
        orders = np.log10(np.array(devs[:-1]) / np.array(devs[1:]))
        assert np.all(orders > 0.9)
        if p.Omega != 0:
            assert np.allclose(orders, 1.0, atol=0.05)


def test_reciprocity_swap(detuned):
    q = _sweep(detuned, 201)
    c, s = transfer_coefficients(q, 0.05), transfer_coefficients(q.swapped(), 0.05)
    for x, y in (("A1", "A2"), ("B1", "B2"), ("A2", "A1"), ("B2", "B1")):
        assert np.allclose(getattr(s, x), getattr(c, y), rtol=1e-13, atol=0)


def test_generation_ratio(detuned):
    q = _sweep(detuned, 201)
    c = transfer_coefficients(q, 0.01)
    assert np.allclose(c.B1 / c.B2, q.beta1 / q.beta2, rtol=1e-12, atol=0)


def test_small_R_series():
    # R = 0 exactly: sin(RL)/R -> L, D -> 1
    b = 0.3
    c = transfer_coefficients(_quad(0, 0, b, 0), 0.2)
    assert c.R[0] == 0
    assert c.D[0] == 1.0
    assert c.B1[0] == pytest.approx(1j * b * 0.2, rel=1e-15)


def test_oscillation_threshold_raises():
    b = np.pi / 2  # R = b, D = cos(b L) = 0 at L = 1
    with pytest.raises(GainDivergenceError):
        transfer_coefficients(_quad(0, 0, 1j * b, 1j * b), 1.0)


def test_negative_length_rejected(canonical):
    with pytest.raises(ValueError):
        transfer_coefficients(susceptibilities(0.0, canonical), -1.0)
