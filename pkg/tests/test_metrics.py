import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_model, random_op, unit
from wstar.errors import LengthMismatch
from wstar.metrics import (axiom17_identity, continuity_modular_check, continuity_product_check,
                           continuity_product_constant, inequality_17b, metric, norm_l2, norm_sharp,
                           norm_star_spectral, norm_star_variational, normg_identity_check, norms,
                           step5_decomposition)
from wstar.modular import ModularCalculus


def test_norm_values(p23, tracial2):
    e12 = unit(2, 0, 1)
    assert norm_l2(p23, e12) == pytest.approx(np.sqrt(1 / 3))
    assert norm_sharp(p23, e12) == pytest.approx(1.0)
    # oracle: sqrt(2) / 3
    assert norm_star_spectral(p23, e12) == pytest.approx(0.471404520791031682933896241403, abs=1e-15)
    assert norm_star_spectral(tracial2, np.eye(2)) == pytest.approx(np.sqrt(0.5))
    b = norms(p23, e12)
    assert (b.l2, b.sharp, b.star) == pytest.approx((np.sqrt(1 / 3), 1.0, np.sqrt(2) / 3))


def test_variational_modes_agree(nondiag):
    rng = np.random.default_rng(7)
    x = random_op(rng, 2)
    exact, _ = norm_star_variational(nondiag, x)
    numeric, _ = norm_star_variational(nondiag, x, mode="numeric_search")
    assert exact == pytest.approx(norm_star_spectral(nondiag, x), abs=1e-12)
    assert numeric >= exact - 1e-9
    assert numeric == pytest.approx(exact, abs=1e-6)
    with pytest.raises(ValueError):
        norm_star_variational(nondiag, x, mode="bogus")


def test_continuity_constant():
    assert continuity_product_constant(0.0) == 3.0
    assert continuity_product_constant(2.0) == pytest.approx(2 * np.e ** 2 + np.e)


def test_axiom17_length_mismatch(p23):
    with pytest.raises(LengthMismatch):
        axiom17_identity(p23, [1.0], [1, 2], [np.eye(2)])


def _setup(d, seed):
    rng = np.random.default_rng(seed)
    return rng, ModularCalculus(random_model(rng, d, diagonal=bool(seed % 2)))


@given(st.integers(1, 6), st.integers(0, 2 ** 31))
def test_normg_identity(d, seed):
    rng, mc = _setup(d, seed)
    lhs, rhs = normg_identity_check(mc, random_op(rng, d, 3.0))
    assert abs(lhs - rhs) <= 1e-10 * (1 + lhs)


@given(st.integers(1, 6), st.integers(0, 2 ** 31))
def test_norm_ordering(d, seed):
    rng, mc = _setup(d, seed)
    x = random_op(rng, d)
    b = norms(mc, x)
    four_d2, rhs = inequality_17b(mc, x)
    assert four_d2 <= rhs * (1 + 1e-12)
    assert b.star <= b.l2 + 1e-12
    assert b.star <= min(b.l2, norm_l2(mc, x.conj().T)) + 1e-12
    assert b.sharp <= np.sqrt(2) * np.linalg.norm(x, 2) + 1e-12


@given(st.integers(2, 5), st.integers(0, 2 ** 31))
def test_metric_axioms(d, seed):
    rng, mc = _setup(d, seed)
    x, y, z = (random_op(rng, d) for _ in range(3))
    assert metric(mc, x, x) == 0.0
    assert metric(mc, x, y) == pytest.approx(metric(mc, y, x))
    assert metric(mc, x, z) <= metric(mc, x, y) + metric(mc, y, z) + 1e-12


@given(st.integers(2, 5), st.integers(0, 2 ** 31))
def test_variational_never_beats_spectral(d, seed):
    rng, mc = _setup(d, seed)
    x = random_op(rng, d)
    value, _ = norm_star_variational(mc, x, mode="numeric_search", starts=2)
    assert value >= norm_star_spectral(mc, x) - 1e-9


@given(st.integers(2, 5), st.integers(0, 2 ** 31), st.sampled_from([0.5, 1.0, 2.0]))
def test_continuity_product(d, seed, a):
    rng, mc = _setup(d, seed)
    lhs, rhs = continuity_product_check(mc, a, random_op(rng, d), random_op(rng, d))
    assert lhs <= rhs * (1 + 1e-12)


@given(st.integers(2, 5), st.integers(0, 2 ** 31), st.floats(-2.0, 2.0))
def test_continuity_modular(d, seed, t):
    rng, mc = _setup(d, seed)
    lhs, rhs = continuity_modular_check(mc, t, random_op(rng, d))
    assert lhs <= rhs + 1e-14


@given(st.integers(2, 4), st.integers(0, 2 ** 31))
def test_axiom17_identity(d, seed):
    rng, mc = _setup(d, seed)
    xs = [random_op(rng, d) for _ in range(2)]
    lhs, rhs = axiom17_identity(mc, [0.5 + 0.5j, -1.0], [1, 2], xs)
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)


@given(st.integers(2, 5), st.integers(0, 2 ** 31))
def test_step5(d, seed):
    rng, mc = _setup(d, seed)
    x = random_op(rng, d)
    y, z, value, bound = step5_decomposition(mc, x)
    assert np.allclose(y.mat + z.mat, x, atol=1e-12)
    assert value == pytest.approx(norm_star_spectral(mc, x) ** 2, rel=1e-10, abs=1e-14)
    assert value <= bound
