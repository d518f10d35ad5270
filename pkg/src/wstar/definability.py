"""The chain of forms and maps that makes the modular flow definable.

Starting from the resolvent form ``psi_{K,L,u}`` the chain builds, in order,
the maps ``A = (u + Delta)^{-1} F_K``, ``B = (u + Delta)^{-t} F_K``,
``C = (beta + ln(u + Delta))^{-1} F_K`` and the bounded exponential
``E = exp(i t beta ln(u+Delta) / (beta + ln(u+Delta))) F_K``, then the forms
``F_{K,L,u,beta,t}``, ``F_{K,L,u,t}``, ``F_{K,L,t}`` and ``F_t``, whose last
member gives the distance ``d(sigma_t(x), y)``.

Every stage is computed twice: exactly, as a multiplier on the log-ratio
matrix, and constructively, from the quadrature, series or algebraic identity
that defines it from the previous stage.  Each constructive evaluation comes
with a closed-form error bound and a truncation remainder; the universal
contract is ``|constructive - exact| <= bound + remainder``.

Stages are checked in isolation: the constructive formula of a stage is fed
with exact lower stages, except for ``E``, which consumes the constructive
``C`` and propagates its error explicitly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy.integrate import simpson
from scipy.sparse.linalg import LinearOperator, cg

from . import kernels
from .errors import NonPositiveU, ParameterWindowViolation
from .metrics import metric
from .model import Operator, as_matrix
from .modular import modular_flow
from .smearing import fejer_multiplier

EPS = float(np.finfo(float).eps)
PSI_PRIME_TOL = 1e-9
SIGMA_DISTANCE_TOL = 1e-10
DEFAULT_QUAD_POINTS = 10_000
DEFAULT_KMAX = 40
DEFAULT_SIMPSON_TOL = 1e-13
MAX_SIMPSON_NODES = 400_001

STAGE_NAMES = ("psi_prime", "psi", "psi_multi", "A_res", "B_pow", "C_log", "E_exp",
               "F_ubt", "F_ut", "F_t_finiteKL", "F_t", "sigma_distance")


# --- helpers -------------------------------------------------------------------

def _check_u(*us):
    for u in us:
        if not u > 0:
            raise NonPositiveU(f"resolvent parameter u must be positive, got {u}")


def _eig(mc, x):
    return mc.to_eig(as_matrix(x))


def _roundoff(terms, scale):
    """A priori bound ``terms * eps * scale`` for a sum of ``terms`` items."""
    return 4.0 * max(int(terms), 1) * EPS * np.asarray(scale, dtype=float)


def _frob_bound(per_entry, xe):
    """Operator-norm bound ``||(R o x~)||_F`` for an entrywise error ``R``."""
    return float(np.sqrt(np.sum((per_entry * np.abs(xe)) ** 2)))


def _phi_norm(mc, xe):
    return float(np.sqrt(mc.sqnorm_e(xe, mc.w_l2)))


def _star_norm(mc, xe):
    return float(np.sqrt(mc.sqnorm_e(xe, mc.w_star)))


def _opnorm(x):
    return float(np.linalg.norm(as_matrix(x), 2))


# --- the resolvent forms ----------------------------------------------------------

def minimizer_radius(K, L, u):
    """``m(K, L, u) = 3 (e^K + e^L) / (2 sqrt(u))``."""
    _check_u(u)
    return 3.0 * (math.exp(K) + math.exp(L)) / (2.0 * math.sqrt(u))


def _psi_target(mc, K, L, x, y):
    """Eigen-coordinates of ``X = F_K(y) + F_L(x)``."""
    return fejer_multiplier(mc, K) * _eig(mc, y) + fejer_multiplier(mc, L) * _eig(mc, x)


def _variational_objective(rho, X, z, u):
    d = X - z
    return float(np.trace(rho @ z.conj().T @ z).real + np.trace(rho @ d @ d.conj().T).real / u)


def psi_variational(mc, K, L, u, x, y, mode="spectral", rtol=1e-14):
    """``psi'_{K,L,u}(x, y) = ||Delta^{1/2} (u + Delta)^{-1/2} X xi||^2``.

    Here ``X = F_K(y) + F_L(x)``.  The value is also the infimum over ``z`` of
    ``phi(z^* z) + phi((X - z)(X - z)^*) / u``, reached at
    ``z = Delta (u + Delta)^{-1} X``.

    Parameters
    ----------
    mode : {"spectral", "exact_minimizer", "numeric_search"}
        ``spectral`` sums the multiplier ``lambda / (u + lambda)``;
        ``exact_minimizer`` evaluates the objective, with traces against
        ``rho``, at the closed-form minimizer; ``numeric_search`` minimizes
        the objective by conjugate gradients on its normal equation
        ``z rho + rho z / u = rho X / u`` started from ``X / 2``.

    Returns
    -------
    value : float
    argmin : Operator
    """
    _check_u(u)
    Xe = _psi_target(mc, K, L, x, y)
    lam = mc.ratios
    ze = lam / (u + lam) * Xe
    if mode == "spectral":
        return float(mc.sqnorm_e(Xe, mc.w_l2 * lam / (u + lam))), Operator(mc.from_eig(ze))
    rho = np.asarray(mc.model.rho)
    X = mc.from_eig(Xe)
    if mode == "exact_minimizer":
        z = mc.from_eig(ze)
        return _variational_objective(rho, X, z, u), Operator(z)
    if mode != "numeric_search":
        raise ValueError(f"unknown mode {mode!r}")
    d = mc.dim

    def apply(v):
        z = v.reshape(d, d)
        return (z @ rho + rho @ z / u).ravel()

    op = LinearOperator((d * d, d * d), matvec=apply, dtype=complex)
    rhs = (rho @ X / u).ravel()
    sol, _ = cg(op, rhs, x0=(0.5 * X).ravel(), rtol=rtol, atol=0.0, maxiter=50 * d * d)
    z = sol.reshape(d, d)
    return _variational_objective(rho, X, z, u), Operator(z)


def psi_exact(mc, K, L, u_list, x, y):
    """``phi(F_K(y)^* Delta prod_i (u_i + Delta)^{-1} F_L(x))`` as a multiplier."""
    us = np.atleast_1d(np.asarray(u_list, dtype=float))
    _check_u(*us)
    lam = mc.ratios
    mult = lam.copy()
    for u in us:
        mult = mult / (u + lam)
    ye = fejer_multiplier(mc, K) * _eig(mc, y)
    xe = fejer_multiplier(mc, L) * _eig(mc, x)
    return complex(mc.inner_e(ye, xe, mc.w_l2 * mult))


def psi_form(mc, K, L, u, x, y):
    """``psi_{K,L,u}(x, y) = E_{1/2,K,L}(y, G_{ln u}(x)) / (2 sqrt(u))``.

    Built from the half-power form and the map ``G_s``; equals
    ``phi(F_K(y)^* Delta (u + Delta)^{-1} F_L(x))``.
    """
    _check_u(u)
    ye = fejer_multiplier(mc, K) * _eig(mc, y)
    ge = fejer_multiplier(mc, L) * (mc.g_multiplier(math.log(u)) * _eig(mc, x))
    half = mc.cached(("Eweight", 0.5), lambda: mc.w_l2 * np.exp(0.5 * mc.log_ratios))
    return complex(mc.inner_e(ye, ge, half)) / (2.0 * math.sqrt(u))


def polarization_error(mc, K, L, u, x, y):
    """``|psi - (1/4) sum_k (-i)^k psi'(i^k x, y)|``."""
    xm = as_matrix(x)
    recon = 0j
    for k in range(4):
        val, _ = psi_variational(mc, K, L, u, (1j ** k) * xm, y)
        recon += (-1j) ** k * val
    return abs(psi_exact(mc, K, L, [u], x, y) - 0.25 * recon)


def perturbation_bound(u_list, i, eps, m):
    """``eps m^2 / (u_1 ... u_n (u_i + eps))``: change of ``psi_{K,L,u_1..u_n}`` on
    ``D_m`` when ``u_i`` moves to ``u_i + eps``.

    Splitting ``Delta = Delta^{1/2} Delta^{1/2}`` over both arguments and
    ``||Delta^{1/2} z xi|| = ||z^* xi|| <= ||z||`` leaves the sup of
    ``eps prod_j (u_j + lambda)^{-1} (u_i + eps + lambda)^{-1}``.
    """
    us = [float(v) for v in u_list]
    return eps * m * m / (float(np.prod(us)) * (us[i] + eps))


class PsiMulti(NamedTuple):
    value: complex
    exact: complex
    bound: float
    remainder: float
    nodes: tuple


def psi_multi_report(mc, K, L, u_list, x, y, eps=1e-6):
    """Partial-fraction evaluation of the multi-resolvent form.

    Distinct parameters use ``prod_i (u_i + lambda)^{-1} = sum_i c_i / (u_i + lambda)``
    with ``c_i = prod_{j != i} 1 / (u_j - u_i)``.  The ``k``-th repeat of a
    value is moved by ``k * eps`` and each move adds its perturbation bound.

    Returns
    -------
    PsiMulti
        ``bound`` is the summed perturbation bound, ``remainder`` the
        rounding allowance of the partial-fraction sum.
    """
    us = [float(v) for v in u_list]
    _check_u(*us)
    if not us:
        raise ValueError("u_list must not be empty")
    m = max(_opnorm(x), _opnorm(y))
    nodes, bound, seen = list(us), 0.0, {}
    for i, u in enumerate(us):
        k = seen.get(u, 0)
        seen[u] = k + 1
        if k:
            delta = k * eps
            bound += perturbation_bound(nodes, i, delta, m)
            nodes[i] = u + delta
    if len(set(nodes)) != len(nodes):
        raise ValueError("perturbed parameters still coincide; pick another eps")
    value, scale = 0j, 0.0
    for i, ui in enumerate(nodes):
        c = 1.0
        for j, uj in enumerate(nodes):
            if j != i:
                c /= uj - ui
        term = c * psi_form(mc, K, L, ui, x, y)
        value += term
        scale += abs(term)
    exact = psi_exact(mc, K, L, us, x, y)
    return PsiMulti(value, exact, float(bound), _roundoff(8 * len(nodes), scale), tuple(nodes))


def psi_multi(mc, K, L, u_list, x, y, eps=1e-6):
    """``phi(F_K(y)^* Delta (u_1 + Delta)^{-1} ... (u_n + Delta)^{-1} F_L(x))``
    by resolvent partial fractions; see :func:`psi_multi_report`."""
    return psi_multi_report(mc, K, L, u_list, x, y, eps).value


def a_distance_identity(mc, u, K, L, x, y):
    """Both sides of the expansion of ``(||A_{u,K}(x) - F_L(y)||^*)^2``.

    The right side is ``psi_{K,K,1,u,u}(x, x) - 2 Re psi_{L,K,1,u}(x, y)
    + (||F_L(y)||^*)^2``.
    """
    _check_u(u)
    xe, ye = _eig(mc, x), _eig(mc, y)
    ae = fejer_multiplier(mc, K) * xe / (u + mc.ratios)
    fl = fejer_multiplier(mc, L) * ye
    lhs = _star_norm(mc, ae - fl) ** 2
    rhs = (psi_exact(mc, K, K, [1.0, u, u], x, x).real
           - 2.0 * psi_exact(mc, L, K, [1.0, u], x, y).real
           + _star_norm(mc, fl) ** 2)
    return float(lhs), float(rhs)


# --- the maps A, B, C, E ------------------------------------------------------------

class ChainMapResult(NamedTuple):
    """Constructive and exact images of one chain map.

    ``||approx - exact|| <= bound + remainder`` in operator norm; ``norm`` is
    checked against the stated domain bound ``norm_bound`` (for ``E_exp`` both
    are phi-norms).
    """

    approx: Operator
    exact: Operator
    bound: float
    remainder: float
    norm: float
    norm_bound: float

    @property
    def error(self):
        return float(np.linalg.norm(self.approx.mat - self.exact.mat, 2))

    @property
    def ok(self):
        return self.error <= self.bound + self.remainder and self.norm <= self.norm_bound


def fractional_resolvent(t, c, quad_points=DEFAULT_QUAD_POINTS):
    """``c^{-t}`` from ``sin(t pi)/pi int_0^inf v^{-t} (c + v)^{-1} dv`` with a remainder.

    Trapezoid rule in ``ln v`` on ``[1e-8 min c, 1e8 max c]`` with the first
    Euler-Maclaurin end correction, plus two terms of the convergent tail
    expansions on ``[0, lo]`` and ``[hi, inf)``.

    Parameters
    ----------
    t : float in (0, 1)
    c : array_like of positive float

    Returns
    -------
    value, remainder : ndarray
        ``|value - c^{-t}| <= remainder`` entrywise.
    """
    c = np.atleast_1d(np.asarray(c, dtype=float))
    lo, hi = 1e-8 * float(c.min()), 1e8 * float(c.max())
    tau = np.linspace(math.log(lo), math.log(hi), int(quad_points))
    h = tau[1] - tau[0]
    s = np.exp(tau)
    w = h * s ** (1.0 - t)
    w[0] *= 0.5
    w[-1] *= 0.5
    body = kernels.resolvent_sum(c, s, w)
    # integrand g(tau) = e^{(1-t) tau} / (c + e^tau); |(ln g)'| <= 1 so |g'''| <= 2 g
    ga, gb = lo ** (1.0 - t) / (c + lo), hi ** (1.0 - t) / (c + hi)
    dga = ga * ((1.0 - t) - lo / (c + lo))
    dgb = gb * ((1.0 - t) - hi / (c + hi))
    body = body - h * h / 12.0 * (dgb - dga)
    low = lo ** (1.0 - t) / ((1.0 - t) * c) - lo ** (2.0 - t) / ((2.0 - t) * c * c)
    high = hi ** (-t) / t - c * hi ** (-t - 1.0) / (t + 1.0)
    rem = (lo ** (3.0 - t) / ((3.0 - t) * c ** 3) + c * c * hi ** (-t - 2.0) / (t + 2.0)
           + 2.0 * 2.0 * h ** 4 / 720.0 * (ga + gb) * 2.0)
    pref = math.sin(t * math.pi) / math.pi
    value = pref * (body + low + high)
    rem = pref * rem + _roundoff(quad_points, np.abs(value) + pref * np.abs(low + high))
    return value, rem


def c_log_window(u, beta, K):
    """Margin of ``beta + 2 ln u > 4K + 2 ln 24 + 2`` (positive inside)."""
    return beta + 2.0 * math.log(u) - (4.0 * K + 2.0 * math.log(24.0) + 2.0)


def min_beta(u, K):
    """Smallest integer ``beta`` inside the ``C`` window for ``(u, K)``."""
    return float(math.floor(4.0 * K + 2.0 * math.log(24.0) + 2.0 - 2.0 * math.log(u)) + 1)


def _require_c_window(u, beta, K, stage):
    margin = c_log_window(u, beta, K)
    if not margin > 0:
        raise ParameterWindowViolation(
            f"{stage}: beta + 2 ln(u) > 4K + 2 ln(24) + 2 fails for u={u}, beta={beta}, K={K} "
            f"(margin {margin:.4g})")


def _a_stage(mc, u, K, x):
    _check_u(u)
    xe = _eig(mc, x)
    lam = mc.ratios
    fk = fejer_multiplier(mc, K)
    exact = fk * xe / (u + lam)
    # A = u^{-1} F_K - (2 u sqrt(u))^{-1} Delta^{1/2} G_{ln u} F_K
    dg = np.sqrt(lam) * mc.g_multiplier(math.log(u))
    approx = fk * xe / u - dg * (fk * xe) / (2.0 * u * math.sqrt(u))
    m = _opnorm(x)
    first = math.ceil(3.0 * m * math.exp(K) / (2.0 * math.sqrt(u)))
    second = m / u + 3.0 * m * math.exp(K) / (2.0 * math.sqrt(u) * u)
    scale = (1.0 / u + np.abs(dg) / (2.0 * u * math.sqrt(u))) * np.abs(fk)
    bound = _frob_bound(8.0 * EPS * scale, xe)
    return approx, exact, bound, 0.0, min(first, second)


def _b_composition_steps(t):
    if not t > 0:
        raise ParameterWindowViolation(f"B_pow needs t > 0, got {t}")
    return 1 if t < 0.5 else int(math.floor(2.0 * t)) + 1


def b_norm_bound(u, t, K, m):
    """Stated operator-norm bound for ``B_{u,t,K}`` on ``D_m``."""
    n = _b_composition_steps(t)
    if n == 1:
        if u < 1:
            return 8.0 * math.exp(K) * u ** (-0.5 - t) * m
        return m * (u ** (-t) / (1.0 - t)
                    + 3.0 * t * (4.0 - t) * math.exp(K) * u ** (-0.5 - t) / (2.0 * (1.0 + 2.0 * t) * (1.0 - t)))
    if not u < 1:
        return math.inf
    return 8.0 ** n * 3.0 ** (n - 1) * math.exp(2 * (n - 1) * K + K) * u ** (-n / 2.0 - t) * m


def _b_stage(mc, u, t, K, x, quad_points=DEFAULT_QUAD_POINTS):
    _check_u(u)
    n = _b_composition_steps(t)
    xe = _eig(mc, x)
    lam = mc.ratios
    fk = fejer_multiplier(mc, K)
    exact = fk * (u + lam) ** (-t) * xe
    step_t = t / n
    c = (u + lam).ravel()
    vals, rem = fractional_resolvent(step_t, c, quad_points)
    vals, rem = vals.reshape(lam.shape), rem.reshape(lam.shape)
    # (2 B_{t/n, 2K} - B_{t/n, K})^{n-1} o B_{t/n, K}
    out = fk * vals * xe
    if n > 1:
        fix = 2.0 * fejer_multiplier(mc, 2 * K) - fk
        for _ in range(n - 1):
            out = fix * vals * out
    a = (u + lam) ** (-step_t)
    per_entry = np.abs(fk) * ((a + rem) ** n - a ** n)
    remainder = _frob_bound(per_entry, xe)
    bound = _frob_bound(_roundoff(4 * n, 1.0) * np.abs(fk) * (a + rem) ** n, xe)
    return out, exact, bound, remainder, b_norm_bound(u, t, K, _opnorm(x))


def c_norm_bound(u, beta, K, m):
    """Stated operator-norm bound for ``C_{u,beta,K}`` on ``D_m`` (``u < 1``)."""
    if not u < 1:
        return math.inf
    g = beta + math.log(u)
    return math.exp(g / 2.0) / (3.0 * g * (1.0 - math.exp(-1.0))) * math.exp(-K) * m


def _laplace_log(mc, u, beta, K, tol=DEFAULT_SIMPSON_TOL):
    """Entrywise ``int_0^inf e^{-beta v} (u + lambda)^{-v} dv`` by composite Simpson.

    Returns the multiplier (without ``F_K``) and its entrywise remainder,
    valid on the support ``|r| < K`` of ``F_K``.
    """
    a = np.log(u + mc.ratios)
    lo = beta + math.log(u + math.exp(-K))
    hi = beta + math.log(u + math.exp(K))
    V = 40.0 / lo
    h = (180.0 * tol / (V * hi ** 4)) ** 0.25
    intervals = int(math.ceil(V / h))
    intervals += intervals % 2
    nodes = min(intervals + 1, MAX_SIMPSON_NODES)
    v = np.linspace(0.0, V, nodes)
    h = v[1] - v[0]
    rate = beta + a
    vals = simpson(np.exp(-np.multiply.outer(v, rate)), x=v, axis=0)
    tail = math.exp(-lo * V) / lo
    rule = V * h ** 4 * hi ** 4 / 180.0
    rem = rule + tail + _roundoff(nodes, 1.0 / lo)
    return vals, np.full(a.shape, rem)


def _c_stage(mc, u, beta, K, x, tol=DEFAULT_SIMPSON_TOL):
    _check_u(u)
    _require_c_window(u, beta, K, "C_log")
    xe = _eig(mc, x)
    fk = fejer_multiplier(mc, K)
    exact = fk * xe / (beta + np.log(u + mc.ratios))
    vals, rem = _laplace_log(mc, u, beta, K, tol)
    approx = fk * vals * xe
    remainder = _frob_bound(np.abs(fk) * rem, xe)
    return approx, exact, 0.0, remainder, c_norm_bound(u, beta, K, _opnorm(x))


def e_series_terms(u, beta, t, K):
    """Sup bounds of ``theta = beta a / (beta + a)``, ``a = ln(u + lambda)``, on ``|r| < K``."""
    a_lo, a_hi = math.log(u + math.exp(-K)), math.log(u + math.exp(K))
    return max(abs(beta * a / (beta + a)) for a in (a_lo, a_hi))


def e_series_remainder(theta_bar, t, k_max):
    """``sum_{k > k_max} |t|^k theta^k / k!`` by a geometric envelope."""
    z = abs(t) * theta_bar
    k = k_max + 1
    first = math.exp(k * math.log(z) - math.lgamma(k + 1)) if z > 0 else 0.0
    q = z / (k + 1)
    return first / (1.0 - q) if q < 1 else math.inf


def _e_stage(mc, u, beta, t, K, x, k_max=DEFAULT_KMAX, tol=DEFAULT_SIMPSON_TOL):
    _check_u(u)
    K = int(K)
    _require_c_window(u, beta, 2 * K + 2, "E_exp")
    xe = _eig(mc, x)
    a = np.log(u + mc.ratios)
    fk = fejer_multiplier(mc, K)
    theta = beta * a / (beta + a)
    exact = np.exp(1j * t * theta) * fk * xe

    def s_map(k):
        f = fejer_multiplier(mc, k)
        vals, rem = _laplace_log(mc, u, beta, k, tol)
        # beta (F_k - beta C_k) as a multiplier, with its entrywise error
        return beta * (f - beta * f * vals), beta * beta * np.abs(f) * rem

    S, eS = s_map(K)
    T2, eT2 = s_map(2 * K + 2)
    T1, eT1 = s_map(K + 1)
    T = 2.0 * T2 - T1
    eT = 2.0 * eT2 + eT1
    mult = fk.astype(complex)
    term = S.astype(complex)
    coef = 1.0 + 0j
    for k in range(1, k_max + 1):
        coef = coef * (1j * t) / k
        mult = mult + coef * term
        term = T * term
    approx = mult * xe
    theta_bar = e_series_terms(u, beta, t, K)
    s_bar = theta_bar
    e_s = float(np.max(eS))
    e_t = float(np.max(eT))
    prop = 0.0
    for k in range(1, k_max + 1):
        w = abs(t) ** k / math.factorial(k)
        prop += w * ((theta_bar + e_t) ** (k - 1) * (s_bar + e_s) - theta_bar ** (k - 1) * s_bar)
    remainder = e_series_remainder(theta_bar, t, k_max)
    support = np.abs(fk)
    bound = _frob_bound(support * (prop + _roundoff(4 * k_max, math.exp(abs(t) * (theta_bar + e_t)))), xe)
    rem = _frob_bound(support * remainder, xe)
    return approx, exact, bound, rem, _phi_norm(mc, fk * xe)


def chain_maps(mc, stage, params, x):
    """Constructive and exact image of ``x`` under a chain map.

    Parameters
    ----------
    stage : {"A_res", "B_pow", "C_log", "E_exp"}
    params : dict
        ``A_res``: ``u, K``.  ``B_pow``: ``u, t, K`` and optionally
        ``quad_points``; ``t >= 1/2`` uses the composition
        ``(2 B_{t/n,2K} - B_{t/n,K})^{n-1} o B_{t/n,K}`` with ``n > 2t``.
        ``C_log``: ``u, beta, K`` and optionally ``tol``; requires
        ``beta + 2 ln u > 4K + 2 ln 24 + 2``.  ``E_exp``: ``u, beta, t, K``
        and optionally ``k_max``; requires the ``C`` window at ``2K + 2``.

    Returns
    -------
    ChainMapResult

    Raises
    ------
    ParameterWindowViolation, NonPositiveU
    """
    p = dict(params)
    if stage == "A_res":
        approx, exact, bound, rem, nb = _a_stage(mc, p["u"], p["K"], x)
    elif stage == "B_pow":
        approx, exact, bound, rem, nb = _b_stage(mc, p["u"], p["t"], p["K"], x,
                                                 p.get("quad_points", DEFAULT_QUAD_POINTS))
    elif stage == "C_log":
        approx, exact, bound, rem, nb = _c_stage(mc, p["u"], p["beta"], p["K"], x,
                                                 p.get("tol", DEFAULT_SIMPSON_TOL))
    elif stage == "E_exp":
        approx, exact, bound, rem, nb = _e_stage(mc, p["u"], p["beta"], p["t"], p["K"], x,
                                                 p.get("k_max", DEFAULT_KMAX))
    else:
        raise ValueError(f"unknown chain map {stage!r}")
    if stage == "E_exp":
        norm = _phi_norm(mc, exact)
    else:
        norm = float(np.linalg.norm(mc.from_eig(exact), 2))
    return ChainMapResult(Operator(mc.from_eig(approx)), Operator(mc.from_eig(exact)),
                          float(bound), float(rem), norm, float(nb))


# --- the forms F ------------------------------------------------------------------------

FORM_STAGES = ("F_ubt", "F_ut", "F_t_finiteKL", "F_t")


class FormResult(NamedTuple):
    """Spectral value of a form stage and its distance to the next stage.

    ``neighbor_gap <= bound`` is the stage transition inequality.  For
    ``F_ubt`` the constructive value ``2 psi_{L,2K,1}(E x, y) - psi_{L,K,1}(E x, y)``
    is also given, within ``constructive_bound`` of ``value``.
    """

    value: complex
    neighbor_gap: float
    bound: float
    constructive: complex | None = None
    constructive_bound: float | None = None


def _form_value(mc, mult, xe, ye):
    return complex(mc.inner_e(ye, mult * xe, mc.w_star))


def _stage_value(mc, stage, p, xe, ye):
    K, L = p.get("K"), p.get("L")
    if stage == "F_t":
        return _form_value(mc, mc.flow_multiplier(p["t"]), xe, ye)
    fx = fejer_multiplier(mc, K) * xe
    fy = fejer_multiplier(mc, L) * ye
    t = p["t"]
    if stage == "F_t_finiteKL":
        return _form_value(mc, mc.flow_multiplier(t), fx, fy)
    a = np.log(p["u"] + mc.ratios)
    if stage == "F_ut":
        return _form_value(mc, np.exp(1j * t * a), fx, fy)
    beta = p["beta"]
    return _form_value(mc, np.exp(1j * t * beta * a / (beta + a)), fx, fy)


def duhamel_beta_bound(u, beta, t, K, L, xn, yn):
    """``(t / beta) ln(u + e^L) ln(u + e^K) ||y||_phi ||x||_phi``."""
    return abs(t) / beta * math.log(u + math.exp(L)) * math.log(u + math.exp(K)) * xn * yn


def duhamel_u_bound(u, t, K, xn, yn):
    """``t u / (u + e^{-K}) ||y||_phi ||x||_phi``."""
    return abs(t) * u / (u + math.exp(-K)) * xn * yn


def f_forms(mc, stage, params, x, y):
    """Evaluate a form stage and its transition to the next one.

    Parameters
    ----------
    stage : {"F_ubt", "F_ut", "F_t_finiteKL", "F_t"}
    params : dict
        ``K, L, u, beta, t`` as needed; ``F_ubt`` requires the ``E`` window.

    Returns
    -------
    FormResult
    """
    if stage not in FORM_STAGES:
        raise ValueError(f"unknown form stage {stage!r}")
    p = dict(params)
    if "u" in p and stage in ("F_ubt", "F_ut"):
        _check_u(p["u"])
    xe, ye = _eig(mc, x), _eig(mc, y)
    xn, yn = _phi_norm(mc, xe), _phi_norm(mc, ye)
    value = _stage_value(mc, stage, p, xe, ye)
    if stage == "F_t":
        return FormResult(value, 0.0, 0.0)
    nxt = FORM_STAGES[FORM_STAGES.index(stage) + 1]
    gap = abs(value - _stage_value(mc, nxt, p, xe, ye))
    K, L, t = p["K"], p["L"], p["t"]
    if stage == "F_ubt":
        _require_c_window(p["u"], p["beta"], 2 * int(K) + 2, "F_ubt")
        bound = duhamel_beta_bound(p["u"], p["beta"], t, K, L, xn, yn)
        e = chain_maps(mc, "E_exp", {k: p[k] for k in ("u", "beta", "t", "K")}, x)
        ex = e.approx
        cons = 2.0 * psi_exact(mc, L, 2 * K, [1.0], ex, y) - psi_exact(mc, L, K, [1.0], ex, y)
        # |<F_L y, Delta (1+Delta)^{-1} (2F_2K - F_K)(E^ x - E x)>| <= ||y||_phi ||E^ x - E x||_F-type bound
        cb = yn * (e.bound + e.remainder) * float(np.sqrt(np.max(mc.p))) + _roundoff(16, yn * xn)
        return FormResult(value, float(gap), float(bound), cons, float(cb))
    if stage == "F_ut":
        return FormResult(value, float(gap), float(duhamel_u_bound(p["u"], t, K, xn, yn)))
    fy = fejer_multiplier(mc, L) * ye
    fx = fejer_multiplier(mc, K) * xe
    bound = (_star_norm(mc, fy - ye) * _star_norm(mc, xe)
             + _star_norm(mc, fx - xe) * _star_norm(mc, ye))
    return FormResult(value, float(gap), float(bound) + _roundoff(16, _star_norm(mc, xe) * _star_norm(mc, ye)))


def form_t(mc, t, x, y):
    """``F_t(x, y) = phi(y^* Delta (1 + Delta)^{-1} sigma_t(x))``."""
    return _stage_value(mc, "F_t", {"t": t}, _eig(mc, x), _eig(mc, y))


def sigma_distance_via_forms(mc, t, x, y):
    """``d(sigma_t(x), y)^2`` directly and as ``Re(F_0(x,x) + F_0(y,y) - 2 F_t(x,y))``.

    The left side applies ``rho^{it} . rho^{-it}`` and the metric; the right side
    only uses the forms.
    """
    lhs = metric(mc, modular_flow(mc, t, x), y) ** 2
    rhs = (form_t(mc, 0.0, x, x) + form_t(mc, 0.0, y, y) - 2.0 * form_t(mc, t, x, y)).real
    return float(lhs), float(rhs)


# --- stages and sweep -------------------------------------------------------------------

@dataclass(frozen=True)
class ChainStage:
    """One link of the chain.

    ``run(mc, params, x, y)`` returns ``(exact, constructive, bound,
    remainder)``; the contract is ``|constructive - exact| <= bound + remainder``,
    measured in operator norm for maps and in absolute value for forms.
    """

    name: str
    run: Callable = field(repr=False, compare=False)

    def check(self, mc, params, x, y):
        exact, cons, bound, rem = self.run(mc, params, x, y)
        if isinstance(exact, Operator):
            gap = float(np.linalg.norm(exact.mat - cons.mat, 2))
            exact_v, cons_v = exact.opnorm, cons.opnorm
        else:
            gap = float(abs(exact - cons))
            exact_v, cons_v = exact, cons
        return StageRecord(self.name, dict(params), exact_v, cons_v, gap, float(bound), float(rem),
                           bool(gap <= bound + rem))


@dataclass
class StageRecord:
    stage: str
    params: dict
    exact: complex | float
    constructive: complex | float
    gap: float
    bound: float
    remainder: float
    passed: bool

    def to_json(self):
        def num(v):
            if isinstance(v, complex):
                return [v.real, v.imag]
            return float(v)

        def param(v):
            return [float(u) for u in v] if isinstance(v, (list, tuple)) else float(v)

        return {"stage": self.stage, "params": {k: param(v) for k, v in sorted(self.params.items())},
                "exact": num(self.exact), "constructive": num(self.constructive), "gap": self.gap,
                "bound": self.bound, "remainder": self.remainder, "pass": self.passed}


def _run_psi_prime(mc, p, x, y):
    spec, _ = psi_variational(mc, p["K"], p["L"], p["u"], x, y, "spectral")
    a, _ = psi_variational(mc, p["K"], p["L"], p["u"], x, y, "exact_minimizer")
    b, _ = psi_variational(mc, p["K"], p["L"], p["u"], x, y, "numeric_search")
    worst = a if abs(a - spec) >= abs(b - spec) else b
    return spec, worst, PSI_PRIME_TOL, 0.0


def _run_psi(mc, p, x, y):
    exact = psi_exact(mc, p["K"], p["L"], [p["u"]], x, y)
    cons = psi_form(mc, p["K"], p["L"], p["u"], x, y)
    return exact, cons, _roundoff(64, max(_opnorm(x), _opnorm(y)) ** 2 / p["u"]), 0.0


def _run_psi_multi(mc, p, x, y):
    r = psi_multi_report(mc, p["K"], p["L"], p["u_list"], x, y, p.get("eps", 1e-6))
    return r.exact, r.value, r.bound, r.remainder


def _map_runner(stage):
    def run(mc, p, x, y):
        r = chain_maps(mc, stage, p, x)
        return r.exact, r.approx, r.bound, r.remainder
    return run


def _form_runner(stage):
    def run(mc, p, x, y):
        if stage == "F_ubt":
            r = f_forms(mc, stage, p, x, y)
            return r.value, r.constructive, r.constructive_bound, 0.0
        prev = FORM_STAGES[FORM_STAGES.index(stage) - 1]
        r = f_forms(mc, prev, p, x, y)
        exact = _stage_value(mc, stage, p, _eig(mc, x), _eig(mc, y))
        prior = _stage_value(mc, prev, p, _eig(mc, x), _eig(mc, y))
        return exact, prior, r.bound, 0.0
    return run


def _run_sigma(mc, p, x, y):
    lhs, rhs = sigma_distance_via_forms(mc, p["t"], x, y)
    return lhs, rhs, SIGMA_DISTANCE_TOL, 0.0


STAGES = {
    "psi_prime": ChainStage("psi_prime", _run_psi_prime),
    "psi": ChainStage("psi", _run_psi),
    "psi_multi": ChainStage("psi_multi", _run_psi_multi),
    "A_res": ChainStage("A_res", _map_runner("A_res")),
    "B_pow": ChainStage("B_pow", _map_runner("B_pow")),
    "C_log": ChainStage("C_log", _map_runner("C_log")),
    "E_exp": ChainStage("E_exp", _map_runner("E_exp")),
    "F_ubt": ChainStage("F_ubt", _form_runner("F_ubt")),
    "F_ut": ChainStage("F_ut", _form_runner("F_ut")),
    "F_t_finiteKL": ChainStage("F_t_finiteKL", _form_runner("F_t_finiteKL")),
    "F_t": ChainStage("F_t", _form_runner("F_t")),
    "sigma_distance": ChainStage("sigma_distance", _run_sigma),
}
"""For the form stages ``F_ut``, ``F_t_finiteKL`` and ``F_t`` the constructive
value is the previous stage, so their contract is the transition bound."""


def random_ball(rng, d, m=1.0):
    """A complex Gaussian matrix rescaled to operator norm ``m * U(0, 1]``."""
    x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return x * (m * (1.0 - rng.uniform()) / np.linalg.norm(x, 2))


def default_sweep(us=(1e-3, 0.1, 0.5), ts=(0.1, 0.25), Ks=(1, 2), Ls=(1, 2)):
    """``(stage, params)`` pairs of the default parameter sweep.

    ``beta`` is the smallest integer inside the window each stage needs.
    """
    out = []
    for u in us:
        for K in Ks:
            for L in Ls:
                out.append(("psi_prime", {"K": K, "L": L, "u": u}))
                out.append(("psi", {"K": K, "L": L, "u": u}))
                out.append(("psi_multi", {"K": K, "L": L, "u_list": (1.0, u, u)}))
            out.append(("A_res", {"u": u, "K": K}))
            out.append(("C_log", {"u": u, "beta": min_beta(u, K), "K": K}))
            for t in ts:
                out.append(("B_pow", {"u": u, "t": t, "K": K}))
                out.append(("E_exp", {"u": u, "beta": min_beta(u, 2 * K + 2), "t": t, "K": K}))
                for L in Ls:
                    fp = {"K": K, "L": L, "u": u, "beta": min_beta(u, 2 * K + 2), "t": t}
                    for name in FORM_STAGES:
                        out.append((name, fp))
    for t in ts:
        out.append(("sigma_distance", {"t": t}))
    return out


def run_chain(mc, sweep=None, seed=0, m=1.0):
    """Check every stage of a sweep on fresh random ``x, y`` in ``D_m``.

    Returns
    -------
    list of StageRecord
    """
    rng = np.random.default_rng(seed)
    sweep = default_sweep() if sweep is None else sweep
    out = []
    for name, params in sweep:
        x = random_ball(rng, mc.dim, m)
        y = random_ball(rng, mc.dim, m)
        out.append(STAGES[name].check(mc, params, x, y))
    return out
