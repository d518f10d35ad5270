import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_model, random_op, unit
from wstar import definability as D
from wstar.errors import NonPositiveU, ParameterWindowViolation
from wstar.modular import ModularCalculus

LN2 = math.log(2.0)


def test_minimizer_radius():
    assert D.minimizer_radius(1, 1, 1.0) == pytest.approx(3 * math.e)
    with pytest.raises(NonPositiveU):
        D.minimizer_radius(1, 1, 0.0)


def test_psi_modes_agree(nondiag):
    rng = np.random.default_rng(0)
    x, y = random_op(rng, 2), random_op(rng, 2)
    vals = [D.psi_variational(nondiag, 1, 2, 0.3, x, y, mode)[0]
            for mode in ("spectral", "exact_minimizer", "numeric_search")]
    assert vals[1] == pytest.approx(vals[0], abs=1e-12)
    assert vals[2] == pytest.approx(vals[0], abs=1e-9)
    with pytest.raises(ValueError):
        D.psi_variational(nondiag, 1, 1, 0.3, x, y, "guess")


def test_psi_on_matrix_unit(p23):
    # <F_1 e12, Delta (u + Delta)^{-1} F_1 e12>_phi = (1 - ln2)^2 * 2/(u + 2) * 1/3
    e = unit(2, 0, 1)
    want = (1 - LN2) ** 2 * 2 / (0.5 + 2) / 3
    assert D.psi_exact(p23, 1, 1, [0.5], e, e).real == pytest.approx(want, rel=1e-14)
    assert D.psi_form(p23, 1, 1, 0.5, e, e).real == pytest.approx(want, rel=1e-12)


def test_polarization(p23):
    rng = np.random.default_rng(1)
    assert D.polarization_error(p23, 2, 1, 0.1, random_op(rng, 2), random_op(rng, 2)) < 1e-13


@given(st.integers(2, 4), st.integers(0, 2 ** 31), st.lists(st.floats(1e-3, 5.0), min_size=1, max_size=3),
       st.floats(1e-6, 1.0))
def test_perturbation_bound(d, seed, us, eps):
    rng = np.random.default_rng(seed)
    mc = ModularCalculus(random_model(rng, d, diagonal=False))
    m = 1.5
    x, y = random_op(rng, d, m), random_op(rng, d, m)
    i = int(rng.integers(len(us)))
    moved = list(us)
    moved[i] += eps
    change = abs(D.psi_exact(mc, 1, 2, moved, x, y) - D.psi_exact(mc, 1, 2, us, x, y))
    assert change <= D.perturbation_bound(us, i, eps, m) * (1 + 1e-9) + 1e-15


def test_psi_multi_repeated_nodes(p23):
    rng = np.random.default_rng(2)
    x, y = random_op(rng, 2), random_op(rng, 2)
    r = D.psi_multi_report(p23, 1, 1, [0.5, 0.5], x, y)
    assert r.nodes == (0.5, 0.5 + 1e-6)
    assert abs(r.value - r.exact) <= r.bound + r.remainder
    assert D.psi_multi(p23, 1, 1, [0.5, 2.0], x, y) == pytest.approx(D.psi_exact(p23, 1, 1, [0.5, 2.0], x, y))
    with pytest.raises(ValueError):
        D.psi_multi_report(p23, 1, 1, [], x, y)


def test_a_distance_identity(nondiag):
    rng = np.random.default_rng(3)
    lhs, rhs = D.a_distance_identity(nondiag, 0.4, 1, 2, random_op(rng, 2), random_op(rng, 2))
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-15)


def test_fractional_resolvent_oracle():
    # mpmath: 2.5^(-1/4), 1.5^(-1/4), 1^(-1/4)
    want = np.array([0.795270728767050665173867675627, 0.903602003609844831962218052891, 1.0])
    value, rem = D.fractional_resolvent(0.25, [2.5, 1.5, 1.0])
    assert np.all(np.abs(value - want) <= rem)
    assert np.all(rem < 1e-10)


def test_b_stage_exact_multiplier(p23):
    r = D.chain_maps(p23, "B_pow", {"u": 0.5, "t": 0.25, "K": 1}, unit(2, 0, 1))
    assert r.exact.mat[0, 1] == pytest.approx((1 - LN2) * 0.795270728767050665173867675627, rel=1e-14)
    assert r.ok


@pytest.mark.parametrize("t", [0.75, 1.3])
def test_b_stage_composition(p23, t):
    rng = np.random.default_rng(4)
    assert D.chain_maps(p23, "B_pow", {"u": 0.5, "t": t, "K": 1}, random_op(rng, 2)).ok


def test_c_stage_oracle(p23):
    # mpmath: int_0^inf e^{-20 v} 2.5^{-v} dv
    r = D.chain_maps(p23, "C_log", {"u": 0.5, "beta": 20.0, "K": 1}, unit(2, 0, 1))
    assert r.exact.mat[0, 1] == pytest.approx((1 - LN2) * 0.0478096242215694881288650214963, rel=1e-13)
    assert r.ok


def test_windows():
    assert D.c_log_window(1.0, D.min_beta(1.0, 1), 1) > 0
    assert D.c_log_window(1.0, D.min_beta(1.0, 1) - 1, 1) <= 0


def test_window_violations(p23):
    x = np.eye(2)
    with pytest.raises(ParameterWindowViolation):
        D.chain_maps(p23, "C_log", {"u": 0.5, "beta": 5.0, "K": 1}, x)
    beta = D.min_beta(0.5, 1)   # inside the C window but not the E window at 2K + 2
    with pytest.raises(ParameterWindowViolation):
        D.chain_maps(p23, "E_exp", {"u": 0.5, "beta": beta, "t": 0.1, "K": 1}, x)
    with pytest.raises(ParameterWindowViolation):
        D.f_forms(p23, "F_ubt", {"u": 0.5, "beta": beta, "t": 0.1, "K": 1, "L": 1}, x, x)
    with pytest.raises(NonPositiveU):
        D.chain_maps(p23, "A_res", {"u": -1.0, "K": 1}, x)
    with pytest.raises(ValueError):
        D.chain_maps(p23, "Z", {}, x)
    with pytest.raises(ValueError):
        D.f_forms(p23, "F_q", {}, x, x)


@pytest.mark.parametrize("stage, params", [
    ("A_res", {"u": 0.1, "K": 2}),
    ("B_pow", {"u": 1e-3, "t": 0.1, "K": 2}),
    ("C_log", {"u": 0.1, "beta": D.min_beta(0.1, 2), "K": 2}),
    ("E_exp", {"u": 0.5, "beta": D.min_beta(0.5, 4), "t": 0.25, "K": 1}),
])
def test_chain_maps_contract(nondiag, stage, params):
    rng = np.random.default_rng(5)
    r = D.chain_maps(nondiag, stage, params, random_op(rng, 2))
    assert r.error <= r.bound + r.remainder
    assert r.norm <= r.norm_bound


def test_form_transitions(p23):
    rng = np.random.default_rng(6)
    x, y = random_op(rng, 2), random_op(rng, 2)
    p = {"u": 0.1, "beta": D.min_beta(0.1, 4), "t": 0.25, "K": 1, "L": 2}
    for stage in D.FORM_STAGES:
        r = D.f_forms(p23, stage, p, x, y)
        assert r.neighbor_gap <= r.bound
    top = D.f_forms(p23, "F_ubt", p, x, y)
    assert abs(top.constructive - top.value) <= top.constructive_bound
    assert D.f_forms(p23, "F_t", p, x, y) == (D.form_t(p23, 0.25, x, y), 0.0, 0.0, None, None)


@given(st.integers(1, 5), st.integers(0, 2 ** 31), st.floats(-3.0, 3.0))
def test_sigma_distance(d, seed, t):
    rng = np.random.default_rng(seed)
    mc = ModularCalculus(random_model(rng, d, diagonal=False))
    lhs, rhs = D.sigma_distance_via_forms(mc, t, random_op(rng, d), random_op(rng, d))
    assert abs(lhs - rhs) <= D.SIGMA_DISTANCE_TOL


def test_default_sweep_covers_all_stages():
    sweep = D.default_sweep()
    assert {name for name, _ in sweep} == set(D.STAGES) == set(D.STAGE_NAMES)
    assert len(sweep) == 170


def test_run_chain(periodic_half):
    mc, _ = periodic_half
    records = D.run_chain(mc, seed=3)
    failed = [r.to_json() for r in records if not r.passed]
    assert not failed
    doc = json.dumps([r.to_json() for r in records])
    assert json.loads(doc)[0]["stage"] == "psi_prime"
    assert [r.to_json() for r in D.run_chain(mc, seed=3)] == json.loads(doc)
