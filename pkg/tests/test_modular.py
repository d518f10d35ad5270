import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_model, random_op, unit
from wstar.errors import NonFiniteMultiplier
from wstar.model import build_model
from wstar.modular import (ModularCalculus, apply_multiplier, arveson_spectrum, form_alpha, g_map,
                           modular_flow, spectral_truncate)

LN2 = np.log(2.0)


def test_flow_is_trivial_on_tracial(tracial2):
    rng = np.random.default_rng(1)
    x = random_op(rng, 2)
    assert np.allclose(modular_flow(tracial2, 0.37, x).mat, x, atol=1e-15)


def test_flow_on_matrix_unit(p23):
    # mpmath oracle: exp(0.7 i ln 2)
    y = modular_flow(p23, 0.7, unit(2, 0, 1)).mat
    assert y[0, 1] == pytest.approx(0.8845802782750324 + 0.46638796220192713j, abs=1e-15)
    assert abs(y[1, 0]) < 1e-15


def test_flow_group_law(nondiag):
    rng = np.random.default_rng(2)
    x = random_op(rng, 2)
    a = modular_flow(nondiag, 0.3, modular_flow(nondiag, 0.5, x)).mat
    assert np.allclose(a, modular_flow(nondiag, 0.8, x).mat, atol=1e-13)


def test_flow_matches_rho_conjugation(nondiag):
    rng = np.random.default_rng(3)
    x = random_op(rng, 2)
    rho = np.asarray(nondiag.model.rho)
    w, v = np.linalg.eigh(rho)
    rit = (v * w ** 1.1j) @ v.conj().T
    assert np.allclose(modular_flow(nondiag, 1.1, x).mat, rit @ x @ rit.conj().T, atol=1e-13)


def test_g_multiplier_value(p23):
    # oracle: sech(ln2 / 2) = 2 sqrt(2) / 3
    y = g_map(p23, 0.0, unit(2, 0, 1)).mat
    assert y[0, 1].real == pytest.approx(0.942809041582063365867792482807, abs=1e-15)


def test_e_half_form(p23):
    # oracle: E_1(e12, e12) = 2/3
    assert form_alpha(p23, 1.0, unit(2, 0, 1), unit(2, 0, 1)).real == pytest.approx(2 / 3, abs=1e-15)
    assert form_alpha(p23, 0.0, unit(2, 0, 1), unit(2, 0, 1)).real == pytest.approx(1 / 3, abs=1e-15)


def test_spectrum_of_matrix_units():
    mc = ModularCalculus(random_model(np.random.default_rng(0), 1))
    assert arveson_spectrum(mc, np.eye(1)) == (0.0,)
    geo = ModularCalculus(build_model(eigenvalues=[4 / 7, 2 / 7, 1 / 7]))
    assert arveson_spectrum(geo, unit(3, 0, 1)) == pytest.approx((LN2,))
    assert arveson_spectrum(geo, unit(3, 2, 0)) == pytest.approx((-2 * LN2,))
    assert arveson_spectrum(geo, np.zeros((3, 3))) == ()


def test_full_spectrum(p23):
    assert p23.spectrum() == pytest.approx((-LN2, 0.0, LN2))


def test_spectral_truncation(p23):
    x = np.ones((2, 2))
    assert np.allclose(spectral_truncate(p23, 0.5, x).mat, np.eye(2))
    assert np.allclose(spectral_truncate(p23, LN2, x).mat, x)
    with pytest.raises(ValueError):
        spectral_truncate(p23, -1.0, x)


def test_nonfinite_multiplier(p23):
    with pytest.raises(NonFiniteMultiplier), np.errstate(divide="ignore"):
        apply_multiplier(p23, lambda r: 1.0 / r, np.eye(2))


def test_scalar_callable_multiplier(p23):
    y = apply_multiplier(p23, lambda r: 2.0 if r > 0 else 1.0, np.ones((2, 2))).mat
    assert np.allclose(y, [[1, 2], [1, 1]])


@given(st.integers(2, 5), st.integers(0, 2 ** 31), st.floats(-3, 3), st.floats(-3, 3))
def test_flow_preserves_state_and_products(d, seed, t, s):
    rng = np.random.default_rng(seed)
    mc = ModularCalculus(random_model(rng, d, diagonal=bool(seed % 2)))
    x, y = random_op(rng, d), random_op(rng, d)
    rho = np.asarray(mc.model.rho)
    sx = modular_flow(mc, t, x).mat
    assert np.trace(rho @ sx) == pytest.approx(np.trace(rho @ x), abs=1e-12)
    assert np.allclose(modular_flow(mc, t, x @ y).mat, sx @ modular_flow(mc, t, y).mat, atol=1e-12)
    assert np.allclose(modular_flow(mc, t, x.conj().T).mat, sx.conj().T, atol=1e-12)


@given(st.integers(2, 5), st.integers(0, 2 ** 31), st.floats(-2, 2))
def test_kms_condition(d, seed, _):
    # phi(x sigma_{-i}(y)) = phi(y x), i.e. phi(x rho y rho^{-1}) = phi(y x)
    rng = np.random.default_rng(seed)
    mc = ModularCalculus(random_model(rng, d, diagonal=False))
    x, y = random_op(rng, d), random_op(rng, d)
    rho = np.asarray(mc.model.rho)
    shifted = apply_multiplier(mc, lambda r: np.exp(r), y).mat
    assert np.trace(rho @ x @ shifted) == pytest.approx(np.trace(rho @ y @ x), abs=1e-10)
