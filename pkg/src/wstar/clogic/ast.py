"""Terms and conditions of the continuous-logic language.

Terms denote operators, conditions denote reals.  Every term knows the
radius of the operator-norm ball its value is guaranteed to lie in, given the
radii of its variables; this is the domain typing of the language (for
example ``m_{K,L} : D_n x D_m -> D_{nm}``).

Nodes are frozen dataclasses, so formulas are hashable and comparable.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

# --- terms -----------------------------------------------------------------------


class Term:
    """Base class of operator-valued expressions."""

    children: Tuple["Term", ...] = ()

    def bound(self, radii=None):
        raise NotImplementedError

    def free_vars(self):
        out = set()
        for c in self.children:
            out |= c.free_vars()
        return out


@dataclass(frozen=True)
class Var(Term):
    name: str
    radius: float = 1.0

    def bound(self, radii=None):
        if radii and self.name in radii:
            return float(radii[self.name])
        return float(self.radius)

    def free_vars(self):
        return {self.name}


@dataclass(frozen=True)
class Const(Term):
    """``"0"``, ``"1"`` or a named model constant such as ``"w_0_1"``."""

    name: str

    def bound(self, radii=None):
        return 0.0 if self.name == "0" else 1.0

    def free_vars(self):
        return set()


def _unary(cls):
    cls.children = property(lambda self: (self.arg,))
    return cls


def _binary(cls):
    cls.children = property(lambda self: (self.left, self.right))
    return cls


@_unary
@dataclass(frozen=True)
class Scale(Term):
    lam: complex
    arg: Term

    def bound(self, radii=None):
        return abs(complex(self.lam)) * self.arg.bound(radii)


@_binary
@dataclass(frozen=True)
class Add(Term):
    left: Term
    right: Term

    def bound(self, radii=None):
        return self.left.bound(radii) + self.right.bound(radii)


@_unary
@dataclass(frozen=True)
class Star(Term):
    arg: Term

    def bound(self, radii=None):
        return self.arg.bound(radii)


@_unary
@dataclass(frozen=True)
class Sigma(Term):
    t: float
    arg: Term

    def bound(self, radii=None):
        return self.arg.bound(radii)


@_unary
@dataclass(frozen=True)
class Gmap(Term):
    s: float
    arg: Term

    def bound(self, radii=None):
        return self.arg.bound(radii)


@_unary
@dataclass(frozen=True)
class Fejer(Term):
    m: float
    l: float
    arg: Term

    def bound(self, radii=None):
        return self.arg.bound(radii)


@_binary
@dataclass(frozen=True)
class SmearProd(Term):
    K: int
    L: int
    left: Term
    right: Term

    def bound(self, radii=None):
        return self.left.bound(radii) * self.right.bound(radii)


@_binary
@dataclass(frozen=True)
class BigSmearProd(Term):
    K: int
    L: int
    left: Term
    right: Term

    def bound(self, radii=None):
        # sum of the absolute coefficients of the four-term combination
        c = (2 * self.K + 3) * (2 * self.L + 3)
        return c * self.left.bound(radii) * self.right.bound(radii)


@_unary
@dataclass(frozen=True)
class Dlvp(Term):
    K: int
    arg: Term

    def bound(self, radii=None):
        return (2 * self.K + 1) * self.arg.bound(radii)


@_unary
@dataclass(frozen=True)
class TauPoly(Term):
    """``p(sum_i lam_i F_{N_i}(x))`` through the nested smeared expansion.

    ``poly`` is a tuple of ``(coefficient, word)`` with words over ``x``
    and ``x*``.
    """

    poly: tuple
    lam: tuple
    N: tuple
    arg: Term

    def __post_init__(self):
        # canonical words ("xx*x") so that equal polynomials compare equal
        from ..smearing import parse_word

        poly = tuple((c, "".join("x*" if s else "x" for s in parse_word(w))) for c, w in self.poly)
        object.__setattr__(self, "poly", poly)

    def bound(self, radii=None):
        from ..smearing import parse_word

        n = self.arg.bound(radii)
        return float(sum(abs(complex(c)) * n ** len(parse_word(w)) for c, w in self.poly))


@_unary
@dataclass(frozen=True)
class RiemannSum(Term):
    """Riemann sum ``sum_k w_k T_{t_k}(x)`` on the grid ``k / n^2``.

    ``family`` is ``"g"`` (params ``(s,)``, flows), ``"fejer"`` (params
    ``(N, l)``, flows) or ``"gform"`` (params ``(alpha,)``, ``G_{t_k}`` maps
    with weights ``cos(alpha pi) / (2 pi n^2) e^{alpha t_k}``).
    """

    family: str
    params: tuple
    n: int
    arg: Term

    def weights(self):
        from .. import discretization as D

        if self.family == "gform":
            return D.form_weights(self.params[0], self.n)
        kernel = D.KernelSpec("fejer" if self.family == "fejer" else "g", tuple(self.params))
        sch = D.make_scheme(kernel, self.n)
        return sch.times, sch.weights

    def bound(self, radii=None):
        _, w = self.weights()
        return float(np.sum(np.abs(w))) * self.arg.bound(radii)


# --- conditions ------------------------------------------------------------------


class Condition:
    """Base class of real-valued formulas."""

    children: tuple = ()

    def free_vars(self):
        out = set()
        for c in self.children:
            out |= c.free_vars()
        return out


RELATIONS = ("phi_r", "phi_i", "d", "E_r", "E_i")


@dataclass(frozen=True)
class Rel(Condition):
    """Atomic relation.

    ``phi_r``, ``phi_i`` take one term; ``d`` takes two; ``E_r``/``E_i``
    take two terms and ``params = (alpha, N, M)`` and denote the real or
    imaginary part of ``E_alpha(F_N(a), F_M(b))``.
    """

    name: str
    terms: tuple
    params: tuple = ()

    def __post_init__(self):
        if self.name not in RELATIONS:
            raise ValueError(f"unknown relation {self.name!r}")

    @property
    def children(self):
        return self.terms


@dataclass(frozen=True)
class Num(Condition):
    value: float

    def free_vars(self):
        return set()


@dataclass(frozen=True)
class Max(Condition):
    args: tuple

    @property
    def children(self):
        return self.args


@dataclass(frozen=True)
class Min(Condition):
    args: tuple

    @property
    def children(self):
        return self.args


@dataclass(frozen=True)
class Sub(Condition):
    left: Condition
    right: Condition

    @property
    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Abs(Condition):
    arg: Condition

    @property
    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class AffineCombo(Condition):
    """``const + sum_i coefs[i] * args[i]``."""

    coefs: tuple
    args: tuple
    const: float = 0.0

    @property
    def children(self):
        return self.args


@dataclass(frozen=True)
class Hypot(Condition):
    """Euclidean length of the argument values (modulus of a complex pair)."""

    args: tuple

    @property
    def children(self):
        return self.args


@dataclass(frozen=True)
class Mul(Condition):
    left: Condition
    right: Condition

    @property
    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Sqrt(Condition):
    """Square root of the positive part."""

    arg: Condition

    @property
    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Sup(Condition):
    var: Var
    body: Condition

    @property
    def radius(self):
        return self.var.radius

    @property
    def children(self):
        return (self.body,)

    def free_vars(self):
        return self.body.free_vars() - {self.var.name}


@dataclass(frozen=True)
class Inf(Condition):
    var: Var
    body: Condition

    @property
    def radius(self):
        return self.var.radius

    @property
    def children(self):
        return (self.body,)

    def free_vars(self):
        return self.body.free_vars() - {self.var.name}


# --- builders ----------------------------------------------------------------------

ZERO = Const("0")
ONE = Const("1")


def sub(a, b):
    """Term ``a - b``."""
    return Add(a, Scale(-1.0, b))


def total(terms):
    terms = list(terms)
    out = terms[0]
    for t in terms[1:]:
        out = Add(out, t)
    return out


def phi_abs(term):
    """``|phi(term)|``."""
    return Hypot((Rel("phi_r", (term,)), Rel("phi_i", (term,))))


def dist(a, b):
    return Rel("d", (a, b))


def positive_part(c):
    return Max((Num(0.0), c))


def sup_all(variables, body):
    for v in reversed(list(variables)):
        body = Sup(v, body)
    return body


def inf_all(variables, body):
    for v in reversed(list(variables)):
        body = Inf(v, body)
    return body


def quantifier_prefix(cond, kind):
    """Split off consecutive quantifiers of one kind: ``(vars, body)``."""
    out = []
    while isinstance(cond, kind):
        out.append(cond.var)
        cond = cond.body
    return out, cond
