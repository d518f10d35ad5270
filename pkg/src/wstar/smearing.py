"""Fejer and De la Vallee Poussin smearing, smeared products and polynomials.

All maps are exact multipliers on the modular spectrum.  The smeared product
``m_{K,L}(x, y) = F_K(x) F_L(y)`` is the uniformly continuous replacement of
the product, and ``M_{K,L}(a, b) = H_{K+1}(a) H_{L+1}(b)`` is written as the
four-term combination of smeared products.
"""
from __future__ import annotations

import itertools

import numpy as np

from .errors import BadRange, BadWeights, LengthMismatch, NonPositiveBandwidth
from .model import Operator, as_matrix
from .transforms import fejer_hat

MEMBERSHIP_TOL = 1e-10


def fejer_multiplier(mc, m, l=0.0):
    """Multiplier of ``F_{m,l}`` on the log-ratio matrix."""
    if not m > 0:
        raise NonPositiveBandwidth(f"Fejer bandwidth must be positive, got {m}")
    m, l = float(m), float(l)
    return mc.cached(("fejer", m, l), lambda: fejer_hat(mc.log_ratios, m, l).astype(complex))


def dlvp_multiplier(mc, K):
    """Multiplier of ``H_K = (K+1) F_{K+1} - K F_K``."""
    K = int(K)
    if K < 0:
        raise NonPositiveBandwidth(f"H_K needs K >= 0, got {K}")

    def build():
        out = (K + 1) * fejer_multiplier(mc, K + 1)
        if K > 0:
            out = out - K * fejer_multiplier(mc, K)
        return out

    return mc.cached(("dlvp", K), build)


def _apply(mc, mult, x):
    return Operator(mc.from_eig(mult * mc.to_eig(x)))


def fejer_map(mc, m, l, x):
    """Fejer smearing ``F_{m,l}(x)``, band-limited to ``[l - m, l + m]``."""
    return _apply(mc, fejer_multiplier(mc, m, l), x)


def dlvp_map(mc, K, x):
    """De la Vallee Poussin map ``H_K(x) = (K+1) F_{K+1}(x) - K F_K(x)``."""
    return _apply(mc, dlvp_multiplier(mc, K), x)


def smeared_product_e(mc, K, L, xe, ye):
    """Smeared product in eigen-coordinates (stacks allowed)."""
    return (fejer_multiplier(mc, K) * xe) @ (fejer_multiplier(mc, L) * ye)


def big_smeared_product_e(mc, K, L, ae, be):
    """Four-term ``M_{(K,L)}`` in eigen-coordinates."""
    terms = (
        ((K + 1) * (L + 1), K + 1, L + 1),
        ((K + 2) * (L + 2), K + 2, L + 2),
        (-(K + 1) * (L + 2), K + 1, L + 2),
        (-(K + 2) * (L + 1), K + 2, L + 1),
    )
    out = 0
    for coef, a, b in terms:
        out = out + coef * smeared_product_e(mc, a, b, ae, be)
    return out


def smeared_product(mc, K, L, x, y):
    """``m_{K,L}(x, y) = F_K(x) F_L(y)``."""
    return Operator(mc.from_eig(smeared_product_e(mc, K, L, mc.to_eig(x), mc.to_eig(y))))


def big_smeared_product(mc, K, L, a, b):
    """``M_{(K,L)}(a, b)``, equal to ``H_{K+1}(a) H_{L+1}(b)``."""
    return Operator(mc.from_eig(big_smeared_product_e(mc, K, L, mc.to_eig(a), mc.to_eig(b))))


# --- smeared polynomials -------------------------------------------------------

def parse_word(word):
    """Normalize a monomial to a tuple of booleans (True means ``x^*``).

    Accepts strings such as ``"x x* x"`` or ``"xx*x"`` and sequences of
    booleans.
    """
    if isinstance(word, str):
        tokens = word.replace(" ", "")
        out = []
        i = 0
        while i < len(tokens):
            if tokens[i] != "x":
                raise ValueError(f"bad monomial {word!r}")
            star = i + 1 < len(tokens) and tokens[i + 1] == "*"
            out.append(star)
            i += 2 if star else 1
        return tuple(out)
    return tuple(bool(b) for b in word)


def check_weights(lam, N):
    lam = [float(v) for v in lam]
    N = [int(v) for v in N]
    if len(lam) != len(N) or not lam:
        raise LengthMismatch("weights and bandwidths must have the same positive length")
    if any(v < 0 or v > 1 for v in lam) or abs(sum(lam) - 1.0) > 1e-12:
        raise BadWeights(f"weights {lam} are not convex")
    if any(v < 1 for v in N):
        raise NonPositiveBandwidth("bandwidths must be positive integers")
    return lam, N


def _monomial_expansion_e(mc, word, lam, N, xe):
    """Nested ``M`` expansion of one monomial applied to convex Fejer sums."""
    k = len(word)
    xs = [np.conj(np.swapaxes(xe, -1, -2)) if s else xe for s in word]
    if k == 0:
        return np.broadcast_to(np.eye(mc.dim, dtype=complex), xe.shape).copy()
    if k == 1:
        return sum(l_ * (fejer_multiplier(mc, n) * xs[0]) for l_, n in zip(lam, N))
    total = 0
    for idx in itertools.product(range(len(N)), repeat=k):
        coef = float(np.prod([lam[i] for i in idx]))
        if coef == 0.0:
            continue
        Ns = [N[i] for i in idx]
        inner = smeared_product_e(mc, Ns[-2], Ns[-1], xs[-2], xs[-1])
        for pos in range(k - 3, -1, -1):
            tail = sum(Ns[pos + 1:])
            inner = big_smeared_product_e(mc, Ns[pos], tail, fejer_multiplier(mc, Ns[pos]) * xs[pos], inner)
        total = total + coef * inner
    return total


def smeared_polynomial_e(mc, poly, lam, N, xe):
    lam, N = check_weights(lam, N)
    out = 0
    for coef, word in poly:
        out = out + complex(coef) * _monomial_expansion_e(mc, parse_word(word), lam, N, xe)
    if isinstance(out, int):
        out = np.zeros_like(xe)
    return out


def smeared_polynomial(mc, poly, lam, N, x):
    """Evaluate ``p^.(sum_i lam_i F_{N_i}(x))`` through the nested-M expansion.

    Parameters
    ----------
    poly : list of (complex, word)
        Terms of a *-polynomial; a word is a string over ``x`` and ``x*``
        (``""`` is the constant term).
    lam : sequence of float
        Convex weights.
    N : sequence of int
        Fejer bandwidths, one per weight.

    Raises
    ------
    BadWeights
        If the weights are not convex.
    """
    return Operator(mc.from_eig(smeared_polynomial_e(mc, poly, lam, N, mc.to_eig(x))))


def polynomial_direct(mc, poly, lam, N, x):
    """Reference value ``p(sum_i lam_i F_{N_i}(x))`` with true matrix products."""
    lam, N = check_weights(lam, N)
    y = sum(l_ * as_matrix(fejer_map(mc, n, 0.0, x)) for l_, n in zip(lam, N))
    ys = y.conj().T
    out = np.zeros((mc.dim, mc.dim), dtype=complex)
    for coef, word in poly:
        term = np.eye(mc.dim, dtype=complex)
        for s in parse_word(word):
            term = term @ (ys if s else y)
        out += complex(coef) * term
    return Operator(out)


def polynomial_norm_bound(poly, n):
    """Integer domain radius ``ceil(sum |c| n^deg)`` for inputs of norm ``<= n``."""
    total = sum(abs(complex(c)) * float(n) ** len(parse_word(w)) for c, w in poly)
    return int(np.ceil(total - 1e-12))


def spectral_membership_test(mc, K, x, L_max):
    """Decide ``x in M(sigma, [-K, K])`` with translated Fejer windows.

    For ``K >= 1`` the windows ``F_{K, +-L}`` with integer ``L`` in
    ``[2K, L_max]`` are used.  For ``K = 0`` the zero-width windows are
    degenerate and unit-width windows ``F_{1, +-L}``, ``1 <= L <= L_max`` are
    used instead; their supports cover ``]0, L_max + 1[`` on each side.

    Returns
    -------
    bool
        True iff every window annihilates ``x`` to ``1e-10 ||x||``.
    """
    K = int(K)
    if K < 0:
        raise BadRange("K must be non-negative")
    lo, width = (2 * K, K) if K > 0 else (1, 1)
    if L_max < lo:
        raise BadRange(f"L_max={L_max} must be at least {lo}")
    mat = as_matrix(x)
    norm = float(np.linalg.norm(mat, 2))
    if norm == 0.0:
        return True
    xe = mc.to_eig(mat)
    for L in range(lo, int(L_max) + 1):
        for sign in (1, -1):
            y = fejer_multiplier(mc, width, sign * L) * xe
            if np.linalg.norm(y, 2) > MEMBERSHIP_TOL * norm:
                return False
    return True
