"""The phi-norms, the model metric and the identities linking them.

Three norms are attached to a faithful state:

* ``||x||_phi = phi(x^* x)^{1/2}``
* ``||x||_phi^# = (||x||_phi^2 + ||x^*||_phi^2)^{1/2}``
* ``||x||_phi^* = inf_y (phi(y^* y) + phi((x - y)(x - y)^*))^{1/2}``

The last one defines the metric ``d(x, y) = ||x - y||_phi^*``.  Its closed form
is ``||Delta^{1/2} (1 + Delta)^{-1/2} x xi||``, i.e. the weight
``p_i p_j / (p_i + p_j)`` on ``|x~_ij|^2``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg

from .errors import LengthMismatch
from .model import Operator, as_matrix
from .modular import spectral_truncate
from .smearing import fejer_multiplier, smeared_product


@dataclass(frozen=True)
class NormBundle:
    l2: float
    sharp: float
    star: float


def norms(mc, x):
    """All three phi-norms of ``x``."""
    xe = mc.to_eig(x)
    l2 = mc.sqnorm_e(xe, mc.w_l2)
    adj = mc.sqnorm_e(xe, mc.w_l2_adj)
    star = mc.sqnorm_e(xe, mc.w_star)
    return NormBundle(float(np.sqrt(l2)), float(np.sqrt(l2 + adj)), float(np.sqrt(star)))


def norm_l2(mc, x):
    return float(np.sqrt(mc.sqnorm_e(mc.to_eig(x), mc.w_l2)))


def norm_sharp(mc, x):
    xe = mc.to_eig(x)
    return float(np.sqrt(mc.sqnorm_e(xe, mc.w_l2 + mc.w_l2_adj)))


def norm_star_spectral(mc, x):
    """``||x||_phi^*`` from the multiplier formula."""
    return float(np.sqrt(mc.sqnorm_e(mc.to_eig(x), mc.w_star)))


def _variational_objective(rho, x, y):
    d = x - y
    return float(np.trace(rho @ y.conj().T @ y).real + np.trace(rho @ d @ d.conj().T).real)


def norm_star_variational(mc, x, mode="exact_minimizer", seed=0, starts=4, rtol=1e-14):
    """``||x||_phi^*`` from its defining infimum.

    Parameters
    ----------
    mode : {"exact_minimizer", "numeric_search"}
        ``exact_minimizer`` evaluates the objective at
        ``y = Delta (1 + Delta)^{-1}`` applied to ``x``.  ``numeric_search``
        minimizes the quadratic objective by conjugate gradients on its
        normal equation ``y rho + rho y = rho x``, working in the standard
        basis with products against ``rho`` only.  The first start is
        ``x / 2``, the others are random.

    Returns
    -------
    value : float
    argmin : Operator
    """
    rho = np.asarray(mc.model.rho)
    xm = as_matrix(x)
    if mode == "exact_minimizer":
        lam = mc.ratios
        y = mc.from_eig(lam / (1.0 + lam) * mc.to_eig(xm))
        return float(np.sqrt(max(_variational_objective(rho, xm, y), 0.0))), Operator(y)
    if mode != "numeric_search":
        raise ValueError(f"unknown mode {mode!r}")
    rng = np.random.default_rng(seed)
    n = mc.dim

    def apply(v):
        y = v.reshape(n, n)
        return (y @ rho + rho @ y).ravel()

    op = LinearOperator((n * n, n * n), matvec=apply, dtype=complex)
    rhs = (rho @ xm).ravel()
    best_val, best_y = np.inf, None
    for k in range(starts):
        if k == 0:
            y0 = 0.5 * xm
        else:
            y0 = xm * rng.uniform(0, 1) + 0.1 * (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
        sol, _ = cg(op, rhs, x0=y0.ravel(), rtol=rtol, atol=0.0, maxiter=50 * n * n)
        y = sol.reshape(n, n)
        val = _variational_objective(rho, xm, y)
        if val < best_val:
            best_val, best_y = val, y
    return float(np.sqrt(max(best_val, 0.0))), Operator(best_y)


def metric(mc, x, y):
    """Model distance ``d(x, y) = ||x - y||_phi^*``."""
    return norm_star_spectral(mc, as_matrix(x) - as_matrix(y))


def normg_identity_check(mc, x):
    """Both sides of ``2 ||x||^* = ||G_0(x)||^#``."""
    xe = mc.to_eig(x)
    lhs = 2.0 * np.sqrt(mc.sqnorm_e(xe, mc.w_star))
    ge = mc.g_multiplier(0.0) * xe
    rhs = np.sqrt(mc.sqnorm_e(ge, mc.w_l2 + mc.w_l2_adj))
    return float(lhs), float(rhs)


def axiom17_identity(mc, lam, K, xs):
    """Both sides of the polarized ``4 (||.||^*)^2`` identity for smeared sums.

    The left side uses the multiplier norm; the right side uses only the
    state, smeared products and ``G_0`` in the standard basis.
    """
    if not (len(lam) == len(K) == len(xs)):
        raise LengthMismatch("lam, K and xs must have equal length")
    total = np.zeros((mc.dim, mc.dim), dtype=complex)
    for c, k, x in zip(lam, K, xs):
        total += complex(c) * mc.from_eig(fejer_multiplier(mc, k) * mc.to_eig(x))
    lhs = 4.0 * norm_star_spectral(mc, total) ** 2
    rho = np.asarray(mc.model.rho)
    g0 = [mc.from_eig(mc.g_multiplier(0.0) * mc.to_eig(x)) for x in xs]
    rhs = 0j
    for i in range(len(xs)):
        for j in range(len(xs)):
            c = np.conj(complex(lam[i])) * complex(lam[j])
            a = smeared_product(mc, K[i], K[j], g0[i].conj().T, g0[j]).mat
            b = smeared_product(mc, K[j], K[i], g0[j], g0[i].conj().T).mat
            rhs += c * (np.trace(rho @ a) + np.trace(rho @ b))
    return float(lhs), float(rhs.real)


def inequality_17b(mc, x):
    """``4 d(x, 0)^2`` and ``||x xi||^2 + ||x^* xi||^2``."""
    xe = mc.to_eig(x)
    return float(4.0 * mc.sqnorm_e(xe, mc.w_star)), float(mc.sqnorm_e(xe, mc.w_l2 + mc.w_l2_adj))


def step5_decomposition(mc, x):
    """Split ``x = y + z`` with ``||y||_phi^2 + ||z^*||_phi^2 = d(x, 0)^2``.

    ``y`` is the pullback of ``Delta (1 + Delta)^{-1} x xi``.

    Returns
    -------
    y, z : Operator
    value : float
        ``||y||_phi^2 + ||z^*||_phi^2``
    bound : float
        ``(2 d(x, 0))^2``
    """
    xe = mc.to_eig(x)
    lam = mc.ratios
    ye = lam / (1.0 + lam) * xe
    ze = xe - ye
    value = mc.sqnorm_e(ye, mc.w_l2) + mc.sqnorm_e(ze, mc.w_l2_adj)
    bound = 4.0 * mc.sqnorm_e(xe, mc.w_star)
    return Operator(mc.from_eig(ye)), Operator(mc.from_eig(ze)), float(value), float(bound)


def continuity_product_constant(a):
    """``C_a = 2 e^a + e^{a/2}``."""
    return 2.0 * np.exp(a) + np.exp(0.5 * a)


def continuity_product_check(mc, a, x, y):
    """``||x' y||^*`` against ``C_a ||x'|| ||y||^*`` for ``x'`` truncated to ``[-a, a]``."""
    xt = spectral_truncate(mc, a, x)
    lhs = norm_star_spectral(mc, xt.mat @ as_matrix(y))
    rhs = continuity_product_constant(a) * xt.opnorm * norm_star_spectral(mc, y)
    return lhs, float(rhs)


def continuity_modular_check(mc, t, x):
    """``||sigma_t(x) - x||^*`` against ``2 |t| ||x||^#``."""
    xe = mc.to_eig(x)
    diff = (mc.flow_multiplier(t) - 1.0) * xe
    lhs = float(np.sqrt(mc.sqnorm_e(diff, mc.w_star)))
    rhs = 2.0 * abs(t) * float(np.sqrt(mc.sqnorm_e(xe, mc.w_l2 + mc.w_l2_adj)))
    return lhs, rhs
