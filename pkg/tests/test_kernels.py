import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from wstar import _kernels_py, kernels

try:
    from wstar import _ckernels
except ImportError:  # extension not built
    _ckernels = None

needs_c = pytest.mark.skipif(_ckernels is None, reason="compiled kernels not built")


def _data(seed, n_r, n_t):
    rng = np.random.default_rng(seed)
    r = rng.normal(scale=3.0, size=n_r)
    t = rng.uniform(-5, 5, size=n_t)
    w = rng.normal(size=n_t) + 1j * rng.normal(size=n_t)
    return r, t, w


def test_reference_values():
    r = np.array([0.0, np.log(2.0)])
    t = np.array([0.0, 1.0])
    w = np.array([1.0 + 0j, 2.0 + 0j])
    assert np.allclose(_kernels_py.trig_sum(r, t, w), [3.0, 1.0 + 2.0 * np.exp(1j * np.log(2.0))])
    assert np.allclose(_kernels_py.sech_sum(r, t, w.real), [1.0 + 2.0 / np.cosh(0.5), 1 / np.cosh(np.log(2) / 2)
                                                           + 2.0 / np.cosh((np.log(2) - 1) / 2)])
    c, s = np.array([1.0, 2.0]), np.array([1.0, 3.0])
    assert np.allclose(_kernels_py.resolvent_sum(c, s, np.ones(2)), [1 / 2 + 1 / 4, 1 / 3 + 1 / 5])


@needs_c
@given(st.integers(0, 2 ** 31), st.integers(1, 40), st.integers(1, 300))
def test_backends_agree(seed, n_r, n_t):
    r, t, w = _data(seed, n_r, n_t)
    for name, args in (("trig_sum", (r, t, w)), ("sech_sum", (r, t, w.real.copy())),
                       ("resolvent_sum", (np.exp(r), np.exp(t), np.abs(w)))):
        a = np.asarray(getattr(_ckernels, name)(*args))
        b = np.asarray(getattr(_kernels_py, name)(*args))
        assert np.allclose(a, b, rtol=1e-12, atol=1e-12 * np.max(np.abs(b))), name


@needs_c
def test_sech_extreme_arguments():
    r = np.array([-800.0, 0.0, 900.0])
    t = np.array([-1000.0, 0.0, 1000.0])
    w = np.ones(3)
    a, b = _ckernels.sech_sum(r, t, w), _kernels_py.sech_sum(r, t, w)
    assert np.all(np.isfinite(a)) and np.allclose(a, b)


def test_backend_selection():
    assert kernels.BACKEND in ("cython", "numpy")
    env = dict(os.environ, WSTAR_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from wstar import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True).stdout.strip()
    assert out == "numpy"


def test_pure_python_suite_parity():
    code = ("import json; from wstar import catalog; from wstar.clogic import run_suite;"
            "m, c = catalog.build_recipe(catalog.diagonal((2/3, 1/3)));"
            "r = run_suite(m, ['15', '16', '19'], constants=c, timing=False);"
            "print(json.dumps([x.value for x in r.reports]))")
    vals = {}
    for flag in ("0", "1"):
        env = dict(os.environ, WSTAR_PURE_PYTHON=flag)
        out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        vals[flag] = np.array(eval(out.stdout))  # noqa: S307 - list of floats printed above
    assert np.allclose(vals["0"], vals["1"], rtol=1e-9, atol=1e-12)
