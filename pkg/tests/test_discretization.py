import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_model, random_op, unit
from wstar.discretization import (KernelSpec, axiom16_bound, axiom16_check, axiom18_check, fejer_tail_rigorous,
                                  fejer_tail_stated, form_recursion, form_recursion_bound, form_top_level,
                                  form_top_level_bound, form_weights, grid, make_scheme, resolvent_power,
                                  resolvent_power_formula, riemann_sigma_f)
from wstar.errors import BadExponents, UnsupportedKernel
from wstar.metrics import metric
from wstar.model import build_model
from wstar.modular import ModularCalculus
from wstar.transforms import g_hat


def test_grid_shape():
    t = grid(3)
    assert t.size == 54 and t[0] == -3.0 and t[-1] == pytest.approx(3 - 1 / 9)
    assert np.allclose(np.diff(t), 1 / 9)
    with pytest.raises(ValueError):
        grid(0)


def test_riemann_tracial(tracial2):
    x = np.array([[1.0, 2.0], [0.0, 1j]])
    r = riemann_sigma_f(tracial2, KernelSpec.fejer(1.0), 3, x)
    s = make_scheme(KernelSpec.fejer(1.0), 3)
    assert np.allclose(r.approx.mat, s.weights.sum() * x)
    assert metric(tracial2, r.approx, r.exact) <= r.bound


def test_riemann_f1_oracle(p23):
    r = riemann_sigma_f(p23, KernelSpec.fejer(1.0), 3, unit(2, 0, 1))
    # oracle: (1/9) sum_k f_1(k/9) exp(i ln2 k/9) at mpmath precision
    assert r.approx.mat[0, 1] == pytest.approx(
        0.394927031987117715549583167067 - 0.00683018177254719894271921711794j, abs=1e-13)
    assert r.exact.mat[0, 1] == pytest.approx(1 - np.log(2))
    assert metric(p23, r.approx, r.exact) <= r.bound


def test_riemann_converges(p23):
    rng = np.random.default_rng(11)
    x = random_op(rng, 2)
    errs = [metric(p23, *riemann_sigma_f(p23, KernelSpec.fejer(1.0), n, x)[:3:2]) for n in (3, 6)]
    assert errs[1] <= 0.5 * errs[0]


def test_unsupported_kernel(p23):
    with pytest.raises(UnsupportedKernel):
        riemann_sigma_f(p23, KernelSpec("gauss", (1.0,)), 2, np.eye(2))
    with pytest.raises(UnsupportedKernel):
        riemann_sigma_f(p23, KernelSpec.fejer(0.0), 2, np.eye(2))


@pytest.mark.parametrize("kernel", [KernelSpec.fejer(1, 0), KernelSpec.fejer(2, 0), KernelSpec.fejer(1, 1),
                                    KernelSpec.fejer(2, -1), KernelSpec.g(0), KernelSpec.g(0.25),
                                    KernelSpec.g(-1)])
@pytest.mark.parametrize("n", range(2, 7))
def test_riemann_bound_holds(kernel, n):
    rng = np.random.default_rng(n)
    for d in (2, 3, 5):
        mc = ModularCalculus(random_model(rng, d, diagonal=False))
        for _ in range(4):
            r = riemann_sigma_f(mc, kernel, n, random_op(rng, d, 2.0))
            assert metric(mc, r.approx, r.exact) <= r.bound


def test_stated_fejer_tail_fails_for_narrow_kernel(tracial2):
    # The tail mass of f_m outside [-n, n] decays like 4/(pi m n), not n^-3.
    x = np.ones((2, 2))
    stated = riemann_sigma_f(tracial2, KernelSpec.fejer(0.5), 5, x)
    rigorous = riemann_sigma_f(tracial2, KernelSpec.fejer(0.5), 5, x, tail="rigorous")
    err = metric(tracial2, stated.approx, stated.exact)
    assert err > stated.bound
    assert err <= rigorous.bound
    assert fejer_tail_rigorous(0.5, 5) > fejer_tail_stated(0.5, 5)


def test_axiom16_examples(tracial2, p23):
    assert axiom16_check(tracial2, 1.0, 2, np.eye(2)) == 0.0
    for n in (2, 3, 4):
        assert axiom16_check(p23, 0.0, n, unit(2, 0, 1)) == 0.0
    rng = np.random.default_rng(3)
    assert axiom16_check(p23, 1.0, 2, random_op(rng, 2, 2.0), m=2) == 0.0
    assert axiom16_bound(0, 3, 1) < axiom16_bound(0, 2, 1)


def test_axiom18_margin(p23):
    rng = np.random.default_rng(4)
    for n in (2, 3):
        assert axiom18_check(p23, 2, 1.0, n, random_op(rng, 2), m=1) == 0.0


def test_form_weights_scalar_identity():
    # the scalar integral cos(a pi)/(2 pi) int e^{a t} sech(t/2) dt is 1 (mpmath oracle)
    # on a grid wide enough that the exponential tails are negligible
    for alpha in (0.25, 1 / 3):
        t, w = form_weights(alpha, 60)
        assert float(np.sum(w * g_hat(t, 0.0))) == pytest.approx(1.0, abs=1e-4)


def test_form_recursion_tracial(tracial2):
    rng = np.random.default_rng(5)
    x, y = random_op(rng, 2), random_op(rng, 2)
    r = form_recursion(tracial2, 0.25, 0.0, 4, 1, 1, x, y)
    assert abs(r.approx - r.exact) <= r.bound


def test_form_recursion_p23(p23):
    rng = np.random.default_rng(6)
    x, y = random_op(rng, 2), random_op(rng, 2)
    r = form_recursion(p23, 1 / 3, 1 / 3, 4, 1, 2, x, y)
    assert abs(r.approx - r.exact) <= r.bound


@pytest.mark.parametrize("alpha, beta", [(0.0, 0.0), (0.5, 0.0), (0.4, 0.6)])
def test_form_recursion_rejects(p23, alpha, beta):
    with pytest.raises(BadExponents):
        form_recursion(p23, alpha, beta, 3, 1, 1, np.eye(2), np.eye(2))


def test_form_top_level(p23, tracial2):
    rng = np.random.default_rng(8)
    x, y = random_op(rng, 2), random_op(rng, 2)
    for mc in (tracial2, p23):
        r = form_top_level(mc, 1 / 3, 4, 2, 1, x, y)
        assert abs(r.approx - r.exact) <= r.bound
    z = form_top_level(p23, 1 / 3, 4, 2, 1, np.zeros((2, 2)), y)
    assert z.approx == 0 and z.exact == 0
    with pytest.raises(BadExponents):
        form_top_level(p23, 1 / 3, 4, 1, 2, x, y)


def test_bounds_monotone_in_n():
    for alpha, beta in ((0.25, 0.0), (1 / 3, 1 / 3), (0.25, 1 / 3)):
        b = [form_recursion_bound(alpha, beta, n, 1.0) for n in range(2, 7)]
        assert all(u >= v for u, v in zip(b, b[1:]))
    b = [form_top_level_bound(1 / 3, n, 2, 1.0) for n in range(2, 7)]
    assert all(u >= v for u, v in zip(b, b[1:]))


def test_resolvent_power():
    assert resolvent_power(0.5, 2.0) == pytest.approx(2 ** -0.5, abs=1e-8)
    # oracle: 2.5^(-1/3)
    assert resolvent_power(1 / 3, 2.5) == pytest.approx(0.736806299728077321155964566716, abs=1e-8)


def test_resolvent_formula(p23):
    e1 = resolvent_power_formula(p23, 1 / 3, 0.5, 10_000)
    e2 = resolvent_power_formula(p23, 1 / 3, 0.5, 20_000)
    assert e1 <= 1e-8 and e2 <= e1


@given(st.integers(2, 4), st.integers(0, 2 ** 31), st.sampled_from([0.25, 1 / 3]),
       st.sampled_from([0.0, 1 / 3]), st.integers(2, 5))
def test_forms_contract(d, seed, alpha, beta, n):
    rng = np.random.default_rng(seed)
    mc = ModularCalculus(random_model(rng, d))
    x, y = random_op(rng, d), random_op(rng, d)
    r = form_recursion(mc, alpha, beta, n, 2, 1, x, y)
    assert abs(r.approx - r.exact) <= r.bound
    r = form_top_level(mc, alpha, n, 2, 1, x, y)
    assert abs(r.approx - r.exact) <= r.bound
