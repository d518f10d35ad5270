import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_model, random_op, unit
from wstar.errors import BadRange, BadWeights, LengthMismatch, NonPositiveBandwidth
from wstar.modular import ModularCalculus, arveson_spectrum
from wstar.model import build_model
from wstar.smearing import (big_smeared_product, dlvp_map, fejer_map, parse_word, polynomial_direct,
                            polynomial_norm_bound, smeared_polynomial, smeared_product,
                            spectral_membership_test)

LN2 = np.log(2.0)


def test_fejer_value(p23):
    # oracle (quadosc of the time kernel): 1 - ln 2
    y = fejer_map(p23, 1.0, 0.0, unit(2, 0, 1)).mat
    assert y[0, 1].real == pytest.approx(0.306852819440054690582767878542, abs=1e-15)


def test_fejer_translation_sign(p23):
    e12 = unit(2, 0, 1)
    assert fejer_map(p23, 0.5, LN2, e12).mat[0, 1] == pytest.approx(1.0)
    assert abs(fejer_map(p23, 0.5, -LN2, e12).mat[0, 1]) == 0.0


def test_fejer_bandwidth_validation(p23):
    with pytest.raises(NonPositiveBandwidth):
        fejer_map(p23, 0.0, 0.0, np.eye(2))
    with pytest.raises(NonPositiveBandwidth):
        dlvp_map(p23, -1, np.eye(2))


def test_dlvp_identity_inside_band(p23):
    x = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert np.allclose(dlvp_map(p23, 1, x).mat, x)
    assert np.allclose(dlvp_map(p23, 0, x).mat, [[1.0, 2 * (1 - LN2)], [3 * (1 - LN2), 4.0]])


def test_big_product_is_dlvp_product(p23):
    rng = np.random.default_rng(4)
    a, b = random_op(rng, 2), random_op(rng, 2)
    lhs = big_smeared_product(p23, 0, 1, a, b).mat
    rhs = dlvp_map(p23, 1, a).mat @ dlvp_map(p23, 2, b).mat
    assert np.allclose(lhs, rhs, atol=1e-14)


def test_smeared_product_definition(nondiag):
    rng = np.random.default_rng(5)
    x, y = random_op(rng, 2), random_op(rng, 2)
    ref = fejer_map(nondiag, 2, 0, x).mat @ fejer_map(nondiag, 3, 0, y).mat
    assert np.allclose(smeared_product(nondiag, 2, 3, x, y).mat, ref)


def test_parse_word():
    assert parse_word("x x* x") == (False, True, False)
    assert parse_word("") == ()
    with pytest.raises(ValueError):
        parse_word("xy")


def test_polynomial_weights_and_bound(p23):
    with pytest.raises(BadWeights):
        smeared_polynomial(p23, [(1, "x")], [0.5, 0.6], [1, 2], np.eye(2))
    with pytest.raises(LengthMismatch):
        smeared_polynomial(p23, [(1, "x")], [1.0], [1, 2], np.eye(2))
    assert polynomial_norm_bound([(2, "xx*"), (1j, "")], 3) == 19


@given(st.integers(2, 4), st.integers(0, 2 ** 31))
def test_smeared_polynomial_matches_direct(d, seed):
    rng = np.random.default_rng(seed)
    mc = ModularCalculus(random_model(rng, d))
    x = random_op(rng, d)
    poly = [(0.5, "x x* x"), (1 - 2j, "x*x"), (0.25, "x"), (3.0, "")]
    lam, N = [0.3, 0.7], [1, 3]
    a = smeared_polynomial(mc, poly, lam, N, x).mat
    b = polynomial_direct(mc, poly, lam, N, x).mat
    assert np.allclose(a, b, atol=1e-12)


@given(st.integers(2, 5), st.integers(0, 2 ** 31), st.floats(0.1, 4.0), st.floats(-3.0, 3.0))
def test_fejer_band_limits(d, seed, m, l):
    rng = np.random.default_rng(seed)
    mc = ModularCalculus(random_model(rng, d))
    spec = arveson_spectrum(mc, fejer_map(mc, m, l, random_op(rng, d)))
    assert all(l - m - 1e-9 <= s <= l + m + 1e-9 for s in spec)


def test_membership():
    mc = ModularCalculus(build_model(eigenvalues=[4 / 7, 2 / 7, 1 / 7]))
    e12, e13 = unit(3, 0, 1), unit(3, 0, 2)
    assert spectral_membership_test(mc, 1, e12, 6)
    assert not spectral_membership_test(mc, 1, e13, 6)
    assert spectral_membership_test(mc, 0, np.eye(3), 4)
    assert not spectral_membership_test(mc, 0, e12, 4)
    with pytest.raises(BadRange):
        spectral_membership_test(mc, 2, e12, 3)
