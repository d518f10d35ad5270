"""The axiom schemas (1)-(27) as finite families of closed conditions.

Each schema is instantiated over a finite parameter grid (times, bandwidths,
Riemann resolutions, scalar vectors).  Identities ``lhs = rhs`` become
``sup max(d(lhs, rhs), ...)``; scalar identities use the modulus of the
complex difference.  Every instance is a closed condition whose true value
on a model of the theory is 0.

Tiers
-----
exact
    algebraic identities, checked at 1e-10.
bound
    inequalities with explicit constants (the condition already subtracts
    the bound).
inf
    existence statements; passing means a witness below tolerance was found.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ..catalog import renormalization
from ..discretization import axiom16_bound, axiom18_bound, form_recursion_bound, form_top_level_bound
from ..errors import BadInstantiation
from ..smearing import parse_word
from .ast import (ONE, ZERO, AffineCombo, Add, BigSmearProd, Const, Dlvp, Fejer, Gmap, Hypot, Inf,
                  Max, Mul, Num, Rel, RiemannSum, Scale, Sigma, SmearProd, Sqrt, Star, Sup, TauPoly,
                  Var, dist, phi_abs, positive_part, sub, sup_all, total)

EXACT_TOL = 1e-10
ALL_IDS = tuple(str(i) for i in range(1, 28))


@dataclass(frozen=True)
class Instantiation:
    """Finite parameter grid for the schemas.

    Parameters
    ----------
    times : tuple of float
        Values of ``t`` and ``s``.
    bandwidths : tuple of int
        Values of ``K, L, N``.
    riemann_n : tuple of int
        Riemann resolutions ``n``.
    radius : float
        Ball radius ``m`` for the quantified variables.
    gamma : float, optional
        Spacing of the lattice ``Gamma = gamma Z`` for (21)-(23).
    N23 : float, optional
        Bandwidth of (23); defaults to half the smallest nonzero gap.
    """

    times: tuple = (0.0, 0.25, -0.25, 1.0, -1.0)
    bandwidths: tuple = (1, 2, 4)
    riemann_n: tuple = (2, 3)
    radius: float = 1.0
    gamma: float | None = None
    N23: float | None = None


@dataclass(frozen=True)
class AxiomInstance:
    axiom_id: str
    label: str
    condition: object
    tier: str
    expected_fail: bool = False
    info: dict = field(default_factory=dict, compare=False, hash=False)


@dataclass
class ModelContext:
    """What instantiation needs to know about the model."""

    spectrum: tuple = (0.0,)
    constants: dict = field(default_factory=dict)
    phi_w00: float | None = None

    @classmethod
    def from_calculus(cls, mc, constants=None):
        constants = dict(constants or {})
        phi_w00 = None
        if "w_0_0" in constants:
            w = mc.to_eig(constants["w_0_0"])
            phi_w00 = float(mc.state_e(w).real)
        return cls(tuple(mc.spectrum()), constants, phi_w00)

    def smallest_gap(self):
        nz = [abs(v) for v in self.spectrum if abs(v) > 1e-9]
        return min(nz) if nz else None

    def levels(self):
        k = 0
        while f"w_{k}_{k}" in self.constants:
            k += 1
        return k


# --- helpers -------------------------------------------------------------------------

def _fmt(v):
    if isinstance(v, complex):
        return f"{v.real:g}{v.imag:+g}j" if v.imag else f"{v.real:g}"
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, (list, tuple)):
        return "[" + ",".join(_fmt(u) for u in v) + "]"
    return str(v)


def _label(axiom, **params):
    if not params:
        return f"A{axiom}"
    return f"A{axiom}[" + ",".join(f"{k}={_fmt(v)}" for k, v in params.items()) + "]"


def _vars(names, m):
    return [Var(n, float(m)) for n in names]


def _scalar_gap(re_coefs, im_coefs, const=(0.0, 0.0)):
    """``|a - b|`` for complex scalars given as affine combinations."""
    rc, ra = zip(*re_coefs)
    ic, ia = zip(*im_coefs)
    return Hypot((AffineCombo(tuple(rc), tuple(ra), const[0]), AffineCombo(tuple(ic), tuple(ia), const[1])))


def _phi_gap(a, b):
    """``|phi(a) - phi(b)|`` from separate evaluations of each side."""
    return _scalar_gap([(1.0, Rel("phi_r", (a,))), (-1.0, Rel("phi_r", (b,)))],
                       [(1.0, Rel("phi_i", (a,))), (-1.0, Rel("phi_i", (b,)))])


def _identity(variables, pairs, scalars=()):
    parts = [dist(a, b) for a, b in pairs] + list(scalars)
    body = parts[0] if len(parts) == 1 else Max(tuple(parts))
    return sup_all(variables, body)


def _bound_condition(variables, gap, bound):
    return sup_all(variables, positive_part(AffineCombo((1.0,), (gap,), -float(bound))))


LAMBDA_PAIRS = ((2.0 + 0j, -0.5 + 0j), (0.5 + 1j, -1j))
LAMBDA_VECTORS = ((1.0 + 0j, -1.0 + 0.5j), (1.0 + 0j, 0.3j, -0.7 + 0j))


def _pairs(values):
    vals = list(values)
    return [(a, b) for a in vals for b in vals]


# --- (1)-(12): algebra, state and positivity -----------------------------------------

def ax1(inst, ctx):
    x, y, z = _vars("xyz", inst.radius)
    out = []
    for lam, mu in LAMBDA_PAIRS:
        pairs = [
            (Add(x, Add(y, z)), Add(Add(x, y), z)),
            (Add(x, ZERO), x),
            (Add(x, Scale(-1.0, x)), ZERO),
            (Add(x, y), Add(y, x)),
            (Scale(lam, Scale(mu, x)), Scale(lam * mu, x)),
            (Scale(lam, Add(x, y)), Add(Scale(lam, x), Scale(lam, y))),
            (Scale(lam + mu, x), Add(Scale(lam, x), Scale(mu, x))),
            (Scale(1.0, x), x),
        ]
        out.append(AxiomInstance("1", _label(1, lam=lam, mu=mu), _identity([x, y, z], pairs), "exact"))
    return out


def _assoc(K1, K2, K3, x1, x2, x3):
    inner_l = SmearProd(K1, K2, x1, x2)
    lhs = Add(Scale(float(K1 + K2 + 2), SmearProd(K1 + K2 + 2, K3, inner_l, x3)),
              Scale(-float(K1 + K2 + 1), SmearProd(K1 + K2 + 1, K3, inner_l, x3)))
    inner_r = SmearProd(K2, K3, x2, x3)
    rhs = Add(Scale(float(K3 + K2 + 2), SmearProd(K1, K2 + 2 + K3, x1, inner_r)),
              Scale(-float(K3 + K2 + 1), SmearProd(K1, K2 + 1 + K3, x1, inner_r)))
    return lhs, rhs


def ax2(inst, ctx):
    x, y, z = _vars("xyz", inst.radius)
    out = []
    bw = inst.bandwidths
    triples = sorted({(bw[0], bw[0], bw[0]), (bw[0], bw[min(1, len(bw) - 1)], bw[-1]),
                      (bw[-1], bw[min(1, len(bw) - 1)], bw[0])})
    lam = LAMBDA_PAIRS[1][0]
    for K1, K2, K3 in triples:
        K, L = K1, K3
        pairs = [
            (Add(Scale(lam, SmearProd(K, L, x, y)), SmearProd(K, L, x, z)), SmearProd(K, L, x, Add(Scale(lam, y), z))),
            (SmearProd(K1, L, Fejer(K2, 0.0, x), y), SmearProd(K2, L, Fejer(K1, 0.0, x), y)),
            (Dlvp(K + L, Fejer(K, 0.0, x)), Fejer(K, 0.0, x)),
            (Dlvp(K1 + K2 + L, SmearProd(K1, K2, x, y)), SmearProd(K1, K2, x, y)),
            _assoc(K1, K2, K3, x, y, z),
        ]
        out.append(AxiomInstance("2", _label(2, K=(K1, K2, K3)), _identity([x, y, z], pairs), "exact"))
    return out


def ax3(inst, ctx):
    x, y = _vars("xy", inst.radius)
    out = []
    for lam, _ in LAMBDA_PAIRS:
        pairs = [(Star(Star(x)), x), (Star(Add(x, y)), Add(Star(x), Star(y))),
                 (Star(Scale(lam, x)), Scale(lam.conjugate(), Star(x)))]
        out.append(AxiomInstance("3", _label(3, lam=lam), _identity([x, y], pairs), "exact"))
    return out


def ax4(inst, ctx):
    x, y = _vars("xy", inst.radius)
    out = []
    for K, L in [(1, 2), (2, 1), (4, 4)]:
        pairs = [(Star(SmearProd(K, L, x, y)), SmearProd(L, K, Star(y), Star(x))),
                 (Fejer(K, 0.0, Star(x)), Star(Fejer(K, 0.0, x)))]
        norm_gap = Hypot((AffineCombo((1.0, -1.0), (dist(x, ZERO), dist(Star(x), ZERO))),))
        out.append(AxiomInstance("4", _label(4, K=K, L=L), _identity([x, y], pairs, [norm_gap]), "exact"))
    return out


def ax5(inst, ctx):
    x, y = _vars("xy", inst.radius)
    gap = Hypot((AffineCombo((1.0, -1.0), (dist(x, y), dist(sub(x, y), ZERO))),))
    return [AxiomInstance("5", _label(5), sup_all([x, y], gap), "exact")]


def ax6(inst, ctx):
    (x,) = _vars("x", inst.radius)
    out = []
    for K, N in _pairs(inst.bandwidths[:2]):
        pairs = [(Fejer(N, 0.0, ONE), ONE), (SmearProd(K, N, ONE, x), Fejer(N, 0.0, x)),
                 (SmearProd(N, K, x, ONE), Fejer(N, 0.0, x))]
        out.append(AxiomInstance("6", _label(6, K=K, N=N), _identity([x], pairs), "exact"))
    return out


def ax7(inst, ctx):
    x, y = _vars("xy", inst.radius)
    gap = _scalar_gap(
        [(1.0, Rel("phi_r", (Add(x, y),))), (-1.0, Rel("phi_r", (x,))), (-1.0, Rel("phi_r", (y,)))],
        [(1.0, Rel("phi_i", (Add(x, y),))), (-1.0, Rel("phi_i", (x,))), (-1.0, Rel("phi_i", (y,)))])
    return [AxiomInstance("7", _label(7), sup_all([x, y], gap), "exact")]


def ax8(inst, ctx):
    (x,) = _vars("x", inst.radius)
    out = []
    for lam, _ in LAMBDA_PAIRS:
        a, b = lam.real, lam.imag
        conj_gap = _scalar_gap([(1.0, Rel("phi_r", (Star(x),))), (-1.0, Rel("phi_r", (x,)))],
                               [(1.0, Rel("phi_i", (Star(x),))), (1.0, Rel("phi_i", (x,)))])
        lin_gap = _scalar_gap(
            [(1.0, Rel("phi_r", (Scale(lam, x),))), (-a, Rel("phi_r", (x,))), (b, Rel("phi_i", (x,)))],
            [(1.0, Rel("phi_i", (Scale(lam, x),))), (-a, Rel("phi_i", (x,))), (-b, Rel("phi_r", (x,)))])
        unit_gap = _scalar_gap([(1.0, Rel("phi_r", (ONE,)))], [(1.0, Rel("phi_i", (ONE,)))], (-1.0, 0.0))
        body = Max((conj_gap, lin_gap, unit_gap))
        out.append(AxiomInstance("8", _label(8, lam=lam), sup_all([x], body), "exact"))
    return out


def ax9(inst, ctx):
    out = []
    bw = inst.bandwidths
    for lam in LAMBDA_VECTORS:
        n = len(lam)
        Ks = tuple(bw[i % len(bw)] for i in range(n))
        xs = _vars([f"x{i}" for i in range(n)], inst.radius)
        terms = [Scale(lam[i].conjugate() * lam[j], SmearProd(Ks[i], Ks[j], Star(xs[i]), xs[j]))
                 for i in range(n) for j in range(n)]
        body = positive_part(AffineCombo((-1.0,), (Rel("phi_r", (total(terms),)),)))
        out.append(AxiomInstance("9", _label(9, lam=lam, K=Ks), sup_all(xs, body), "bound"))
    return out


def ax10(inst, ctx):
    out = []
    bw = inst.bandwidths
    for lam in LAMBDA_VECTORS[:1]:
        n = len(lam)
        for K in bw[:2]:
            Ks = tuple(bw[i % len(bw)] for i in range(n))
            a = Var("a", float(n))
            xs = _vars([f"x{i}" for i in range(n)], inst.radius)
            terms = []
            for i in range(n):
                for j in range(n):
                    big = BigSmearProd(K + Ks[i], K + Ks[j], Star(SmearProd(K, Ks[i], a, xs[i])),
                                       SmearProd(K, Ks[j], a, xs[j]))
                    small = SmearProd(Ks[i], Ks[j], Star(xs[i]), xs[j])
                    terms.append(Scale(lam[i].conjugate() * lam[j], Add(big, Scale(-float(n * n), small))))
            body = positive_part(Rel("phi_r", (total(terms),)))
            out.append(AxiomInstance("10", _label(10, n=n, K=K, Ki=Ks), sup_all([a] + xs, body), "bound"))
    return out


def monomial_expansion(word, lam, N, x):
    """Nested ``M`` expansion of one monomial of ``sum_i lam_i F_{N_i}(x)``."""
    stars = parse_word(word)
    k = len(stars)
    if k == 0:
        return ONE
    factors = [Star(x) if s else x for s in stars]
    if k == 1:
        return total([Scale(l_, Fejer(n, 0.0, factors[0])) for l_, n in zip(lam, N)])
    terms = []
    for idx in itertools.product(range(len(N)), repeat=k):
        coef = float(np.prod([lam[i] for i in idx]))
        if coef == 0.0:
            continue
        Ns = [N[i] for i in idx]
        inner = SmearProd(Ns[-2], Ns[-1], factors[-2], factors[-1])
        for pos in range(k - 3, -1, -1):
            inner = BigSmearProd(Ns[pos], sum(Ns[pos + 1:]), Fejer(Ns[pos], 0.0, factors[pos]), inner)
        terms.append(Scale(coef, inner))
    return total(terms)


POLYNOMIALS = (
    ((1.0 + 0j, "x x* x"), (-0.5 + 0j, "x"), (0.25j, "")),
    ((1.0 + 0j, "x* x"), (2.0 + 0j, "x x")),
)
POLY_WEIGHTS = (((0.5, 0.5), (1, 2)), ((1.0,), (2,)))


def ax11(inst, ctx):
    (x,) = _vars("x", inst.radius)
    out = []
    for pi, poly in enumerate(POLYNOMIALS):
        for lam, N in POLY_WEIGHTS:
            rhs = total([Scale(c, monomial_expansion(w, lam, N, x)) for c, w in poly])
            lhs = TauPoly(poly, lam, N, x)
            out.append(AxiomInstance("11", _label(11, p=pi, lam=lam, N=N), _identity([x], [(lhs, rhs)]), "exact"))
    return out


def ax12(inst, ctx):
    out = []
    m = inst.radius
    for K in inst.bandwidths[:2]:
        for n in (1, 2):
            Ks = tuple(inst.bandwidths[i % len(inst.bandwidths)] for i in range(n))
            x = Var("x", m)
            ys = _vars([f"y{i}" for i in range(n)], m)
            lhs = total([Fejer(K, 0.0, x)] + [SmearProd(Ks[i], K, ys[i], x) for i in range(n)])
            rhs = total([ONE] + [Fejer(Ks[i], 0.0, ys[i]) for i in range(n)])
            gap = AffineCombo((1.0, -3.0 * m * math.exp(K)), (dist(lhs, ZERO), dist(rhs, ZERO)))
            out.append(AxiomInstance("12", _label(12, K=K, Ki=Ks), sup_all([x] + ys, positive_part(gap)), "bound"))
    return out


# --- (13)-(20): modular data ---------------------------------------------------------

def _time_pairs(times):
    ts = list(times)
    return [(ts[i], ts[(i + 1) % len(ts)]) for i in range(len(ts))]


def ax13(inst, ctx):
    x, y = _vars("xy", inst.radius)
    lam = LAMBDA_PAIRS[1][0]
    out = []
    for t, s in _time_pairs(inst.times):
        pairs = [(Sigma(t, Sigma(s, x)), Sigma(t + s, x)),
                 (Sigma(t, Add(Scale(lam, x), y)), Add(Scale(lam, Sigma(t, x)), Sigma(t, y))),
                 (Sigma(0.0, x), x),
                 (Sigma(t, Star(x)), Star(Sigma(t, x)))]
        out.append(AxiomInstance("13", _label(13, t=t, s=s),
                                 _identity([x, y], pairs, [_phi_gap(Sigma(t, x), x)]), "exact"))
    return out


def ax14(inst, ctx):
    x, y = _vars("xy", inst.radius)
    out = []
    bw = inst.bandwidths
    for i, t in enumerate(inst.times):
        K, L = bw[i % len(bw)], bw[(i + 1) % len(bw)]
        pairs = [(Sigma(t, SmearProd(K, L, x, y)), SmearProd(K, L, Sigma(t, x), Sigma(t, y))),
                 (Sigma(t, Fejer(K, 0.0, x)), Fejer(K, 0.0, Sigma(t, x)))]
        out.append(AxiomInstance("14", _label(14, t=t, K=K, L=L), _identity([x, y], pairs), "exact"))
    return out


def ax15(inst, ctx):
    out = []
    for t in inst.times:
        for n in (1, 2):
            x = Var("x", float(n))
            gap = AffineCombo((1.0,), (dist(Sigma(t, x), x),), -4.0 * abs(t) * n)
            out.append(AxiomInstance("15", _label(15, t=t, n=n), Sup(x, positive_part(gap)), "bound"))
    return out


def ax16(inst, ctx):
    m = inst.radius
    x = Var("x", m)
    out = []
    for s in inst.times:
        for n in inst.riemann_n:
            gap = dist(Gmap(s, x), RiemannSum("g", (float(s),), n, x))
            out.append(AxiomInstance("16", _label(16, s=s, n=n),
                                     _bound_condition([x], gap, axiom16_bound(s, n, m)), "bound"))
    return out


def ax17(inst, ctx):
    out = []
    bw = inst.bandwidths
    for lam in LAMBDA_VECTORS:
        n = len(lam)
        Ks = tuple(bw[i % len(bw)] for i in range(n))
        xs = _vars([f"x{i}" for i in range(n)], inst.radius)
        D = dist(total([Scale(lam[i], Fejer(Ks[i], 0.0, xs[i])) for i in range(n)]), ZERO)
        rhs = []
        for i in range(n):
            for j in range(n):
                gi, gj = Gmap(0.0, xs[i]), Gmap(0.0, xs[j])
                rhs.append(Scale(lam[i].conjugate() * lam[j],
                                 Add(SmearProd(Ks[i], Ks[j], Star(gi), gj), SmearProd(Ks[j], Ks[i], gj, Star(gi)))))
        R = total(rhs)
        gap = Hypot((AffineCombo((4.0, -1.0), (Mul(D, D), Rel("phi_r", (R,)))), Rel("phi_i", (R,))))
        out.append(AxiomInstance("17", _label(17, lam=lam, K=Ks), sup_all(xs, gap), "exact"))
    return out


def ax18(inst, ctx):
    m = inst.radius
    x = Var("x", m)
    out = []
    bw = inst.bandwidths
    for N, l in [(bw[0], 0.5), (bw[min(1, len(bw) - 1)], -1.0)]:
        for n in inst.riemann_n:
            gap = dist(Fejer(N, l, x), RiemannSum("fejer", (float(N), float(l)), n, x))
            out.append(AxiomInstance("18", _label(18, N=N, l=l, n=n),
                                     _bound_condition([x], gap, axiom18_bound(N, l, n, m)), "bound"))
    return out


def _E(alpha, K, L, a, b):
    return Rel("E_r", (a, b), (float(alpha), K, L)), Rel("E_i", (a, b), (float(alpha), K, L))


def ax19(inst, ctx):
    m = inst.radius
    x, y = _vars("xy", m)
    out = []
    bw = inst.bandwidths
    for K, L in [(bw[0], bw[0]), (bw[0], bw[min(1, len(bw) - 1)])]:
        er, ei = _E(0.0, K, L, x, y)
        p = SmearProd(K, L, Star(x), y)
        gap = _scalar_gap([(1.0, er), (-1.0, Rel("phi_r", (p,)))], [(1.0, ei), (-1.0, Rel("phi_i", (p,)))])
        out.append(AxiomInstance("19", _label(19, part="E0", K=K, L=L), sup_all([x, y], gap), "exact"))
    K, L = bw[0], bw[0]
    for alpha in (0.25, 1.0 / 3.0):
        for beta in (0.0, 1.0 / 3.0):
            for n in inst.riemann_n:
                ar, ai = _E(alpha + beta, K, L, x, y)
                br, bi = _E(beta, K, L, RiemannSum("gform", (alpha,), n, x), y)
                gap = _scalar_gap([(1.0, ar), (-1.0, br)], [(1.0, ai), (-1.0, bi)])
                bound = form_recursion_bound(alpha, beta, n, m)
                out.append(AxiomInstance("19", _label(19, alpha=alpha, beta=beta, n=n, K=K, L=L),
                                         _bound_condition([x, y], gap, bound), "bound"))
    return out


def ax20(inst, ctx):
    m = inst.radius
    x, y = _vars("xy", m)
    out = []
    bw = inst.bandwidths
    for K, L in [(bw[0], bw[0]), (bw[min(1, len(bw) - 1)], bw[0])]:
        for alpha in (0.25, 1.0 / 3.0):
            for n in inst.riemann_n:
                p = SmearProd(L, K, y, Star(x))
                br, bi = _E(1.0 - alpha, K, L, RiemannSum("gform", (alpha,), n, x), y)
                gap = _scalar_gap([(1.0, Rel("phi_r", (p,))), (-1.0, br)], [(1.0, Rel("phi_i", (p,))), (-1.0, bi)])
                bound = form_top_level_bound(alpha, n, K, m)
                out.append(AxiomInstance("20", _label(20, alpha=alpha, n=n, K=K, L=L),
                                         _bound_condition([x, y], gap, bound), "bound"))
    return out


# --- (21)-(27): spectrum, periodic states, geometric states ----------------------------

def _gamma(inst, ctx, axiom):
    if inst.gamma is not None:
        if not inst.gamma > 0:
            raise BadInstantiation("lattice spacing gamma must be positive")
        return float(inst.gamma)
    raise BadInstantiation(f"axiom ({axiom}) needs the lattice spacing gamma of Gamma = gamma Z")


def ax21(inst, ctx):
    gamma = _gamma(inst, ctx, 21)
    x = Var("x", inst.radius)
    out = []
    for j in range(-3, 3):
        l, N = (j + 0.5) * gamma, gamma / 2.0
        out.append(AxiomInstance("21", _label(21, gamma=gamma, N=N, l=l),
                                 Sup(x, dist(Fejer(N, l, x), ZERO)), "bound", info={"gamma": gamma}))
    return out


def ax22(inst, ctx):
    gamma = _gamma(inst, ctx, 22)
    x = Var("x", 1.0)
    out = []
    for n in (1, 2):
        l, N = -n * gamma, gamma / 2.0
        c = math.ceil(abs(l) + N) + 1
        unit = Hypot((AffineCombo((1.0,), (dist(BigSmearProd(c, c, Star(x), x), ONE),)),))
        band = dist(sub(Scale(2.0, Fejer(N, l, x)), Fejer(N / 2.0, l, x)), x)
        out.append(AxiomInstance("22", _label(22, gamma=gamma, N=N, l=l),
                                 Inf(x, Max((unit, band))), "inf", expected_fail=True))
    return out


def xi(K, a):
    """``xi_K(a) = sqrt(phi(M_{(K,K)}(a^*, a)) - |phi(a)|^2)``."""
    pa = phi_abs(a)
    return Sqrt(AffineCombo((1.0, -1.0), (Rel("phi_r", (BigSmearProd(K, K, Star(a), a),)), Mul(pa, pa))))


def com(K, a, b):
    return sub(SmearProd(K, K, b, a), SmearProd(K, K, a, b))


def eta(K, a, var="y"):
    y = Var(var, 1.0)
    c = com(K, a, y)
    return Sup(y, Rel("phi_r", (BigSmearProd(2 * K, 2 * K, Star(c), c),)))


def proj(K, a):
    q = SmearProd(K, K, a, Star(a))
    return sub(q, SmearProd(2 * K, 2 * K, q, Star(q)))


def _factor_conditions(K, a_of, x, tag):
    """The two displays shared by (23) and (26) for the element ``a_of(x)``."""
    a = a_of
    sup_part = Sup(x, positive_part(AffineCombo((1.0, -1.0), (xi(K, a), eta(K, a)))))
    P = proj(K, a)
    norm_part = Rel("phi_r", (SmearProd(4 * K, 4 * K, Star(P), P),))
    trace_gap = _scalar_gap([(1.0, Rel("phi_r", (BigSmearProd(K, K, a, _star_inside(a)),)))],
                            [(1.0, Rel("phi_i", (BigSmearProd(K, K, a, _star_inside(a)),)))],
                            (-1.0 / math.pi, 0.0))
    inf_part = Inf(x, AffineCombo((1.0, 1.0), (norm_part, trace_gap)))
    return sup_part, inf_part


def _star_inside(a):
    """``F_N(x^*)`` for ``a = F_N(x)`` and ``w x^* w`` for corners; plain star otherwise."""
    if isinstance(a, Fejer):
        return Fejer(a.m, a.l, Star(a.arg))
    return Star(a)


def ax23(inst, ctx):
    if inst.gamma is not None:
        gap = float(inst.gamma)
    else:
        gap = ctx.smallest_gap()
    N = inst.N23 if inst.N23 is not None else (gap / 2.0 if gap else 1.0)
    if gap is not None and N >= gap:
        raise BadInstantiation(f"axiom (23) needs N < |log lambda| = {gap:.6g}, got N = {N:.6g}")
    K = math.ceil(N)
    x = Var("x", 1.0)
    a = Fejer(N, 0.0, x)
    sup_part, inf_part = _factor_conditions(K, a, x, "23")
    return [AxiomInstance("23", _label(23, part="sup", N=N, K=K), sup_part, "bound", expected_fail=True),
            AxiomInstance("23", _label(23, part="inf", N=N, K=K), inf_part, "inf", expected_fail=True)]


def _need_units(ctx, axiom, levels=1):
    have = ctx.levels()
    if have < levels:
        raise BadInstantiation(f"axiom ({axiom}) needs matrix-unit constants w_j_k; model has none")
    return have


def ax24(inst, ctx):
    L = _need_units(ctx, 24, 2)
    c = renormalization(L)
    w = lambda j, k: Const(f"w_{j}_{k}")  # noqa: E731
    parts = []
    for j in range(L):
        for k in range(L):
            target = c * 2.0 ** (-j - 1) if j == k else 0.0
            parts.append(_scalar_gap([(1.0, Rel("phi_r", (w(j, k),)))], [(1.0, Rel("phi_i", (w(j, k),)))],
                                     (-target, 0.0)))
            parts.append(dist(Star(w(k, j)), w(j, k)))
            Kjk = math.ceil(abs(j - k) * math.log(2.0))
            parts.append(dist(Dlvp(Kjk + 1, w(j, k)), w(j, k)))
            for l in range(L):
                for mm in range(L):
                    Klm = math.ceil(abs(l - mm) * math.log(2.0))
                    rhs = w(j, mm) if k == l else ZERO
                    parts.append(dist(BigSmearProd(Kjk, Klm, w(j, k), w(l, mm)), rhs))
    deltas = [(c - 1.0) * 2.0 ** (-j - 1) for j in range(L)]
    return [AxiomInstance("24", _label(24, levels=L), Max(tuple(parts)), "exact",
                          info={"c": c, "deltas": deltas})]


def corner(N, x, k=0, j=0):
    """``w_kk F_N(x) w_jj`` written with smeared products."""
    return BigSmearProd(N, 0, BigSmearProd(0, N, Const(f"w_{k}_{k}"), Fejer(N, 0.0, x)), Const(f"w_{j}_{j}"))


def ax25(inst, ctx):
    _need_units(ctx, 25)
    x, y = _vars("xy", 1.0)
    out = []
    for N in inst.bandwidths:
        cx, cy = corner(N, x), corner(N, y)
        fix = dist(Dlvp(1, cx), cx)
        trace = _phi_gap(BigSmearProd(0, 0, cx, cy), BigSmearProd(0, 0, cy, cx))
        out.append(AxiomInstance("25", _label(25, N=N), sup_all([x, y], Max((fix, trace))), "exact"))
    return out


def ax26(inst, ctx):
    _need_units(ctx, 26)
    x = Var("x", 1.0)
    a = corner(1, x)
    sup_part, inf_part = _factor_conditions(1, a, x, "26")
    return [AxiomInstance("26", _label(26, part="sup"), sup_part, "bound", expected_fail=True),
            AxiomInstance("26", _label(26, part="inf"), inf_part, "inf", expected_fail=True)]


def ax27(inst, ctx):
    _need_units(ctx, 27)
    x, y = _vars("xy", 1.0)
    w00 = ctx.constants["w_0_0"]
    rank = int(np.linalg.matrix_rank(np.asarray(getattr(w00, "mat", w00))))
    phi_w = ctx.phi_w00
    cx, cy = corner(1, x), corner(1, y)
    if phi_w is None:
        raise BadInstantiation("axiom (27) needs phi(w_0_0) in the model context")
    k = 1.0 / float(phi_w)
    ar, ai = Rel("phi_r", (cx,)), Rel("phi_i", (cx,))
    br, bi = Rel("phi_r", (cy,)), Rel("phi_i", (cy,))
    lhs = BigSmearProd(0, 0, cx, cy)
    gap = _scalar_gap([(1.0, Rel("phi_r", (lhs,))), (-k, Mul(ar, br)), (k, Mul(ai, bi))],
                      [(1.0, Rel("phi_i", (lhs,))), (-k, Mul(ar, bi)), (-k, Mul(ai, br))])
    return [AxiomInstance("27", _label(27), sup_all([x, y], gap), "exact", expected_fail=rank > 1,
                          info={"factor": k, "corner_rank": rank})]


BUILDERS = {str(i): globals()[f"ax{i}"] for i in range(1, 28)}


def parse_ids(spec):
    """``"1-20"``, ``"21,24-25"`` or ``"all"`` to a list of axiom ids."""
    if spec is None or str(spec).strip().lower() in ("", "all"):
        return list(ALL_IDS)
    out = []
    for part in str(spec).split(","):
        part = part.strip()
        if "-" in part:
            a, b = part.split("-", 1)
            lo, hi = int(a), int(b)
            if lo > hi:
                raise ValueError(f"empty axiom range {part!r}")
            out.extend(str(i) for i in range(lo, hi + 1))
        else:
            out.append(str(int(part)))
    bad = [i for i in out if i not in BUILDERS]
    if bad:
        raise ValueError(f"unknown axiom ids {bad}")
    return list(dict.fromkeys(out))


def axiom_library(inst=None, ctx=None, ids=None):
    """Instantiate the requested schemas.

    Parameters
    ----------
    inst : Instantiation, optional
    ctx : ModelContext, optional
        Spectrum and constants of the target model; needed by (23)-(27).
    ids : iterable of str, optional
        Axiom ids; all 27 when omitted.

    Returns
    -------
    dict of str to list of AxiomInstance

    Raises
    ------
    BadInstantiation
        If a requested schema cannot be instantiated (missing lattice,
        missing constants, or a bandwidth outside its window).
    """
    inst = inst or Instantiation()
    ctx = ctx or ModelContext()
    ids = list(ALL_IDS) if ids is None else [str(i) for i in ids]
    return {i: BUILDERS[i](inst, ctx) for i in ids}
