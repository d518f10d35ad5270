"""Exact Tomita-Takesaki data of a finite model.

In the eigenbasis of ``rho = U diag(p) U^*`` the modular operator acts on
``x xi`` entrywise: component ``(i, j)`` of ``U^* x U`` is multiplied by
``lambda_ij = p_i / p_j``.  Every Borel function of ``ln Delta`` is therefore a
multiplier on the matrix of log-ratios ``r_ij = ln p_i - ln p_j``.
"""
from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, NonFiniteMultiplier
from .model import Operator, as_matrix
from .transforms import g_hat

SPECTRUM_MERGE = 1e-9
SPECTRUM_REL_TOL = 1e-12


class ModularCalculus:
    """Eigen-data of a :class:`~wstar.model.WStarModel`.

    Attributes
    ----------
    model : WStarModel
    log_ratios : ndarray
        ``r_ij = ln p_i - ln p_j`` (antisymmetric, zero diagonal).
    ratios : ndarray
        ``lambda_ij = p_i / p_j``.
    w_l2, w_l2_adj, w_star : ndarray
        Weights turning ``|x~_ij|^2`` into ``||x||_phi^2``, ``||x^*||_phi^2`` and
        ``(||x||_phi^*)^2``.
    """

    def __init__(self, model):
        self.model = model
        p = np.asarray(model.p, dtype=float)
        self.dim = model.dim
        self.p = p
        logp = np.log(p)
        self.log_ratios = logp[:, None] - logp[None, :]
        self.ratios = p[:, None] / p[None, :]
        self.w_l2 = np.broadcast_to(p[None, :], (self.dim, self.dim)).copy()
        self.w_l2_adj = np.broadcast_to(p[:, None], (self.dim, self.dim)).copy()
        self.w_star = p[:, None] * p[None, :] / (p[:, None] + p[None, :])
        self.U = np.asarray(model.U)
        self.Uh = self.U.conj().T
        self._flat_r = self.log_ratios.ravel()
        self._cache = {}
        for arr in (self.log_ratios, self.ratios, self.w_l2, self.w_l2_adj, self.w_star):
            arr.setflags(write=False)

    # -- coordinates ---------------------------------------------------------
    def to_eig(self, x):
        """Eigen-coordinates ``U^* x U`` (works on stacks of matrices)."""
        mat = as_matrix(x)
        if mat.shape[-2:] != (self.dim, self.dim):
            raise DimensionMismatch(f"expected {self.dim}x{self.dim} operator, got {mat.shape}")
        return self.Uh @ mat @ self.U

    def from_eig(self, xe):
        return self.U @ xe @ self.Uh

    # -- multipliers ---------------------------------------------------------
    def multiplier(self, f):
        """Evaluate ``f`` on the log-ratio matrix and check it is finite."""
        try:
            vals = np.asarray(f(self.log_ratios), dtype=complex)
        except (TypeError, ValueError):
            vals = np.vectorize(lambda v: complex(f(float(v))), otypes=[complex])(self.log_ratios)
        if vals.shape != self.log_ratios.shape:
            vals = np.broadcast_to(vals, self.log_ratios.shape).astype(complex)
        if not np.all(np.isfinite(vals)):
            raise NonFiniteMultiplier("multiplier is not finite on the modular spectrum")
        return vals

    def cached(self, key, build):
        """Memoize a multiplier (or any derived array) under ``key``."""
        val = self._cache.get(key)
        if val is None:
            val = build()
            if isinstance(val, np.ndarray):
                val.setflags(write=False)
            self._cache[key] = val
        return val

    def flow_multiplier(self, t):
        return np.exp(1j * t * self.log_ratios)

    def g_multiplier(self, s):
        return g_hat(self.log_ratios, s)

    # -- quadratic quantities in eigen-coordinates ---------------------------
    def state_e(self, xe):
        """``phi`` of an eigen-coordinate matrix (or stack)."""
        return np.einsum("...ii,i->...", xe, self.p)

    def inner_e(self, xe, ye, weight=None):
        w = self.w_l2 if weight is None else weight
        return np.sum(np.conj(xe) * ye * w, axis=(-2, -1))

    def sqnorm_e(self, xe, weight):
        return np.sum((xe.real ** 2 + xe.imag ** 2) * weight, axis=(-2, -1))

    def spectrum(self):
        """Arveson spectrum of the flow: the merged set of all ``r_ij``."""
        return _merge(self._flat_r)


def _merge(values):
    vals = np.sort(np.asarray(values, dtype=float).ravel())
    out = []
    for v in vals:
        if not out or v - out[-1] > SPECTRUM_MERGE:
            out.append(float(v))
    return tuple(0.0 if abs(v) < SPECTRUM_MERGE else v for v in out)


def _mc_apply(mc, mult, x):
    xe = mc.to_eig(x)
    return Operator(mc.from_eig(mult * xe))


def apply_multiplier(mc, f, x):
    """Apply ``f(ln Delta)`` to ``x xi`` and pull back to the algebra.

    Parameters
    ----------
    mc : ModularCalculus
    f : callable
        Function of the log-ratio; vectorized callables are used directly.
    x : Operator or array_like

    Returns
    -------
    Operator
    """
    return _mc_apply(mc, mc.multiplier(f), x)


def modular_flow(mc, t, x):
    """``sigma_t(x) = rho^{it} x rho^{-it}``."""
    return _mc_apply(mc, mc.flow_multiplier(t), x)


def g_map(mc, s, x):
    """``G_s(x)``: multiplier ``2 e^{s/2} e^{r/2} / (e^r + e^s)``."""
    return _mc_apply(mc, mc.g_multiplier(s), x)


def form_alpha(mc, alpha, x, y):
    """``E_alpha(x, y) = <Delta^alpha x xi, y xi>``, conjugate-linear in ``x``."""
    xe, ye = mc.to_eig(x), mc.to_eig(y)
    return complex(mc.inner_e(xe, ye, mc.w_l2 * np.exp(alpha * mc.log_ratios)))


def arveson_spectrum(mc, x, tol=SPECTRUM_REL_TOL):
    """Log-ratios carried by ``x``, merged within 1e-9.

    A component counts when its magnitude exceeds ``tol * ||x||``.  Returns a
    sorted tuple, empty iff ``x`` vanishes.
    """
    mat = as_matrix(x)
    norm = float(np.linalg.norm(mat, 2))
    if norm == 0.0:
        return ()
    xe = mc.to_eig(mat)
    mask = np.abs(xe) > tol * norm
    return _merge(mc.log_ratios[mask])


def spectral_truncate(mc, a, x):
    """Keep the eigen-components with ``|r_ij| <= a`` (closed interval)."""
    if a < 0:
        raise ValueError("truncation radius must be non-negative")
    keep = (np.abs(mc.log_ratios) <= a + 1e-12).astype(float)
    return _mc_apply(mc, keep, x)
