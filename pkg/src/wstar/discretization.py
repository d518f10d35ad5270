"""Riemann-sum schemes for smeared flows and forms, with closed-form bounds.

Every scheme samples the flow on the half-open grid ``t_k = k / n^2``,
``k = -n^3, ..., n^3 - 1``.  A weighted sum ``sum_k w_k sigma_{t_k}(x)`` is the
multiplier ``W(r) = sum_k w_k exp(i t_k r)`` on the log-ratio matrix, which
is what the summation kernels evaluate.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kernels
from .errors import BadExponents, UnsupportedKernel
from .model import Operator, as_matrix
from .smearing import fejer_multiplier
from .transforms import fejer_translate_time, g_time


def grid(n):
    """Left endpoints ``k / n^2`` for ``k = -n^3 .. n^3 - 1``."""
    n = int(n)
    if n < 1:
        raise ValueError("resolution n must be a positive integer")
    k = np.arange(-n ** 3, n ** 3, dtype=float)
    return k / n ** 2


@dataclass(frozen=True)
class KernelSpec:
    """Smearing kernel: ``fejer`` with ``(m, l)`` or ``g`` with ``(s,)``."""

    kind: str
    params: tuple

    @staticmethod
    def fejer(m, l=0.0):
        return KernelSpec("fejer", (float(m), float(l)))

    @staticmethod
    def g(s):
        return KernelSpec("g", (float(s),))


@dataclass(frozen=True)
class RiemannScheme:
    """Grid, weights and the three constants entering the error bound."""

    n: int
    times: np.ndarray
    weights: np.ndarray
    l1: float
    tail: float
    deriv: float

    def bound(self, star, sharp):
        """``tail ||x||^* + 2 ||f||_1 / n^2 ||x||^# + ||f'||_inf / n ||x||^*``."""
        n = self.n
        return self.tail * star + 2.0 * self.l1 / n ** 2 * sharp + self.deriv / n * star


def fejer_tail_stated(m, n):
    return 8.0 / (np.pi * m * n ** 3)


def fejer_tail_rigorous(m, n):
    """Tail mass bound ``int_{|t| >= n} f_m <= 4 / (pi m n)``."""
    return 4.0 / (np.pi * m * n)


def make_scheme(kernel, n, tail="stated"):
    """Build the Riemann scheme of a kernel.

    Parameters
    ----------
    kernel : KernelSpec
    n : int
    tail : {"stated", "rigorous"}
        Fejer tail constant: ``8 / (pi m n^3)`` as usually quoted, or the
        provable ``4 / (pi m n)``.
    """
    t = grid(n)
    if kernel.kind == "fejer":
        m, l = kernel.params
        if not m > 0:
            raise UnsupportedKernel("Fejer bandwidth must be positive")
        w = fejer_translate_time(t, m, l) / n ** 2
        tl = fejer_tail_stated(m, n) if tail == "stated" else fejer_tail_rigorous(m, n)
        deriv = m * m / np.pi + abs(l) * m / (2.0 * np.pi)
        return RiemannScheme(int(n), t, w, 1.0, tl, deriv)
    if kernel.kind == "g":
        (s,) = kernel.params
        w = g_time(t, s) / n ** 2
        return RiemannScheme(int(n), t, w, 1.0, 4.0 * np.exp(-np.pi * n) / np.pi, abs(s) + np.pi / 2.0)
    raise UnsupportedKernel(f"no Riemann scheme for kernel kind {kernel.kind!r}")


def scheme_multiplier(mc, scheme):
    """``W(r_ij)`` for the scheme, memoized on the calculus."""
    key = ("scheme", scheme.n, scheme.times.tobytes(), scheme.weights.tobytes())

    def build():
        vals = kernels.trig_sum(mc.log_ratios.ravel(), scheme.times, scheme.weights)
        return vals.reshape(mc.log_ratios.shape)

    return mc.cached(key, build)


def exact_kernel_multiplier(mc, kernel):
    if kernel.kind == "fejer":
        return fejer_multiplier(mc, *kernel.params)
    if kernel.kind == "g":
        return mc.g_multiplier(kernel.params[0]).astype(complex)
    raise UnsupportedKernel(kernel.kind)


class SchemeResult(NamedTuple):
    approx: object
    bound: float
    exact: object


def riemann_sigma_f(mc, kernel, n, x, tail="stated"):
    """Riemann approximation of ``sigma_f(x)`` and its closed-form bound.

    Returns
    -------
    SchemeResult
        ``approx`` and ``exact`` are Operators; ``bound`` bounds
        ``d(approx, exact)``.
    """
    scheme = make_scheme(kernel, n, tail)
    xe = mc.to_eig(x)
    approx = scheme_multiplier(mc, scheme) * xe
    exact = exact_kernel_multiplier(mc, kernel) * xe
    star = float(np.sqrt(mc.sqnorm_e(xe, mc.w_star)))
    sharp = float(np.sqrt(mc.sqnorm_e(xe, mc.w_l2 + mc.w_l2_adj)))
    return SchemeResult(Operator(mc.from_eig(approx)), float(scheme.bound(star, sharp)),
                        Operator(mc.from_eig(exact)))


def _radius(m, *xs):
    if m is not None:
        return float(m)
    return max(float(np.linalg.norm(as_matrix(x), 2)) for x in xs)


def axiom16_bound(s, n, m):
    return 8.0 * np.exp(-np.pi * n) * m / np.pi + 4.0 * m / n ** 2 + 4.0 * (np.pi + abs(s)) * m / n


def axiom16_check(mc, s, n, x, m=None):
    """Margin of the ``G_s`` Riemann axiom: ``max(0, d(G_s x, sum) - bound)``.

    The bound uses ``|s|``; with a signed ``s`` the closed form undercuts the
    true error for sufficiently negative ``s``.
    """
    m = _radius(m, x)
    scheme = make_scheme(KernelSpec.g(s), n)
    xe = mc.to_eig(x)
    diff = (mc.g_multiplier(s) - scheme_multiplier(mc, scheme)) * xe
    dist = float(np.sqrt(mc.sqnorm_e(diff, mc.w_star)))
    return max(0.0, dist - axiom16_bound(s, n, m))


def axiom18_bound(N, l, n, m):
    return (4.0 * m / n ** 2 + 16.0 * m / (np.pi * N * n ** 3)
            + abs(l) * N * m / (n * np.pi) + 2.0 * m * N ** 2 / (np.pi * n))


def axiom18_check(mc, N, l, n, x, m=None):
    """Margin of the translated Fejer Riemann axiom."""
    m = _radius(m, x)
    scheme = make_scheme(KernelSpec.fejer(N, l), n)
    xe = mc.to_eig(x)
    diff = (fejer_multiplier(mc, N, l) - scheme_multiplier(mc, scheme)) * xe
    dist = float(np.sqrt(mc.sqnorm_e(diff, mc.w_star)))
    return max(0.0, dist - axiom18_bound(N, l, n, m))


# --- forms --------------------------------------------------------------------

def form_weights(alpha, n):
    """Grid and weights ``cos(alpha pi) / (2 pi n^2) e^{alpha t_k}`` of the form scheme."""
    t = grid(n)
    return t, np.cos(alpha * np.pi) / (2.0 * np.pi * n ** 2) * np.exp(alpha * t)


def form_multiplier(mc, alpha, n):
    """Real multiplier ``S(r) = sum_k w_k sech((r - t_k) / 2)`` so that the
    form sum equals ``E_beta(S x, y)``."""
    t, w = form_weights(alpha, n)

    def build():
        return kernels.sech_sum(mc.log_ratios.ravel(), t, w).reshape(mc.log_ratios.shape)

    return mc.cached(("formsum", float(alpha), int(n)), build)


def _form_sum(mc, alpha, beta, n, K, L, x, y):
    xe = fejer_multiplier(mc, K) * mc.to_eig(x)
    ye = fejer_multiplier(mc, L) * mc.to_eig(y)
    weight = mc.w_l2 * np.exp(beta * mc.log_ratios)
    approx = complex(mc.inner_e(form_multiplier(mc, alpha, n) * xe, ye, weight))
    return approx, xe, ye


def form_recursion_bound(alpha, beta, n, m):
    eps = min(0.5 - alpha, 1.0 - beta - alpha)
    delta = min(eps, alpha)
    step = abs(1.0 - np.exp(1.0 / n ** 2))
    return (4.0 * np.exp(-n * delta) * m * m / (np.pi * delta)
            + step * 2.0 * (3.0 + np.exp(eps / n ** 2)) * m * m / (np.pi * delta))


def form_recursion(mc, alpha, beta, n, K, L, x, y, m=None):
    """Riemann sum for ``E_{alpha+beta}`` from ``E_beta`` of ``G_t``-images.

    Returns
    -------
    SchemeResult
        ``approx`` and ``exact`` are complex numbers for the smeared pair
        ``(F_K x, F_L y)``.
    """
    if not (0.0 < alpha < 0.5) or beta < 0.0 or alpha + beta >= 1.0:
        raise BadExponents(f"need 0 < alpha < 1/2, beta >= 0, alpha + beta < 1; got {alpha}, {beta}")
    m = _radius(m, x, y)
    approx, xe, ye = _form_sum(mc, alpha, beta, n, K, L, x, y)
    exact = complex(mc.inner_e(xe, ye, mc.w_l2 * np.exp((alpha + beta) * mc.log_ratios)))
    return SchemeResult(approx, float(form_recursion_bound(alpha, beta, n, m)), exact)


def form_top_level_bound(alpha, n, K, m):
    mu = 0.5 - alpha
    step = abs(1.0 - np.exp(1.0 / n ** 2))
    amp = 1.0 + np.exp(1.5 * K)
    return (2.0 * np.exp(-n * mu) * amp * m * m / (np.pi * mu)
            + step * (3.0 + np.exp(mu / n ** 2)) * amp * m * m / (np.pi * mu))


def form_top_level(mc, alpha, n, K, L, x, y, m=None):
    """The ``alpha + beta = 1`` scheme compared with ``phi(m_{L,K}(y, x^*))``."""
    if not (0.0 < alpha < 0.5):
        raise BadExponents(f"need 0 < alpha < 1/2, got {alpha}")
    if L > K:
        raise BadExponents(f"need L <= K, got L={L}, K={K}")
    m = _radius(m, x, y)
    approx, xe, ye = _form_sum(mc, alpha, 1.0 - alpha, n, K, L, x, y)
    # phi(F_L(y) F_K(x)^*) in eigen-coordinates
    exact = complex(np.einsum("ij,ij,i->", ye, np.conj(xe), mc.p))
    return SchemeResult(approx, float(form_top_level_bound(alpha, n, K, m)), exact)


# --- fractional powers of resolvents -------------------------------------------

def resolvent_power(alpha, c, quad_points=10_000, lo=1e-8, hi=1e8):
    """``c^{-alpha}`` from ``sin(alpha pi)/pi int_0^inf s^{-alpha} / (c + s) ds``.

    Trapezoid rule in ``log s`` on ``[lo, hi]`` plus the two leading terms of
    the analytic tails on ``[0, lo]`` and ``[hi, inf)``.

    Parameters
    ----------
    alpha : float in (0, 1)
    c : array_like of positive float
    """
    c = np.atleast_1d(np.asarray(c, dtype=float))
    u = np.linspace(np.log(lo), np.log(hi), int(quad_points))
    h = u[1] - u[0]
    s = np.exp(u)
    w = h * s ** (1.0 - alpha)
    w[0] *= 0.5
    w[-1] *= 0.5
    body = kernels.resolvent_sum(c, s, w)
    low = lo ** (1.0 - alpha) / ((1.0 - alpha) * c) - lo ** (2.0 - alpha) / ((2.0 - alpha) * c * c)
    high = hi ** (-alpha) / alpha - c * hi ** (-alpha - 1.0) / (alpha + 1.0)
    return np.sin(alpha * np.pi) / np.pi * (body + low + high)


def resolvent_power_formula(mc, alpha, eps, quad_points=10_000):
    """Largest error of the fractional-power integral over the spectrum of Delta."""
    lam = np.unique(np.round(mc.ratios.ravel(), 15))
    scale = 1.0 + eps
    approx = resolvent_power(alpha, lam + eps, quad_points, 1e-8 * scale, 1e8 * scale)
    exact = (lam + eps) ** (-alpha)
    return float(np.max(np.abs(approx - exact)))
