"""Prefix S-expression syntax for fixture formulas.

Terms::

    x                       variable (radius taken from the enclosing binder)
    zero  one  (w 0 1)      constants
    (scale 2 t)  (scale 0.5+1j t)
    (add a b)  (star a)  (sigma t a)  (g s a)  (fejer m l a)
    (m K L a b)  (M K L a b)  (H K a)
    (tau ((1 xx*) (0.5 x)) (0.5 0.5) (1 2) a)
    (riemann g (0.25) 2 a)

Conditions::

    (phi_r t) (phi_i t) (d a b) (E_r alpha N M a b) (E_i alpha N M a b)
    3.5  (max c ...) (min c ...) (sub c c) (abs c) (hypot c ...)
    (mul c c) (sqrt c) (affine (1 -1) (c c) 0)
    (sup x 1 c)  (inf x 1 c)
"""
from __future__ import annotations

import re

from ..errors import ParseError
from . import ast as A

_TOKEN = re.compile(r"\s*(\(|\)|[^\s()]+)")

TERM_HEADS = {"scale", "add", "star", "sigma", "g", "fejer", "m", "M", "H", "tau", "riemann", "w"}
COND_HEADS = {"phi_r", "phi_i", "d", "E_r", "E_i", "max", "min", "sub", "abs", "hypot",
              "mul", "sqrt", "affine", "sup", "inf"}
RESERVED = TERM_HEADS | COND_HEADS | {"zero", "one"}


def tokenize(text):
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"cannot tokenize at offset {pos}")
        out.append(m.group(1))
        pos = m.end()
    return out


def read(text):
    """Nested lists of atoms."""
    tokens = tokenize(text)
    if not tokens:
        raise ParseError("empty input")
    stack, cur = [], []
    for tok in tokens:
        if tok == "(":
            stack.append(cur)
            cur = []
        elif tok == ")":
            if not stack:
                raise ParseError("unbalanced ')'")
            done, cur = cur, stack.pop()
            cur.append(done)
        else:
            cur.append(tok)
    if stack:
        raise ParseError("unbalanced '('")
    if len(cur) != 1:
        raise ParseError("expected exactly one expression")
    return cur[0]


def _num(tok, kind=float):
    if isinstance(tok, list):
        raise ParseError(f"expected a number, got a list {tok}")
    try:
        if kind is complex:
            return complex(tok.replace("i", "j")) if "j" in tok or "i" in tok else complex(float(tok))
        val = float(tok)
        if kind is int:
            if val != int(val):
                raise ValueError
            return int(val)
        return val
    except ValueError as exc:
        raise ParseError(f"bad number {tok!r}") from exc


def _arity(expr, n):
    if len(expr) != n + 1:
        raise ParseError(f"'{expr[0]}' expects {n} arguments, got {len(expr) - 1}")


def parse_term(expr, scope=None):
    scope = scope or {}
    if isinstance(expr, str):
        if expr == "zero":
            return A.ZERO
        if expr == "one":
            return A.ONE
        if expr in RESERVED or not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", expr):
            raise ParseError(f"{expr!r} is not a variable name")
        return A.Var(expr, scope.get(expr, 1.0))
    if not expr or not isinstance(expr[0], str):
        raise ParseError("term list must start with a head symbol")
    head, args = expr[0], expr[1:]
    t = lambda e: parse_term(e, scope)  # noqa: E731
    if head == "w":
        _arity(expr, 2)
        return A.Const(f"w_{_num(args[0], int)}_{_num(args[1], int)}")
    if head == "scale":
        _arity(expr, 2)
        return A.Scale(_num(args[0], complex), t(args[1]))
    if head == "add":
        _arity(expr, 2)
        return A.Add(t(args[0]), t(args[1]))
    if head == "star":
        _arity(expr, 1)
        return A.Star(t(args[0]))
    if head == "sigma":
        _arity(expr, 2)
        return A.Sigma(_num(args[0]), t(args[1]))
    if head == "g":
        _arity(expr, 2)
        return A.Gmap(_num(args[0]), t(args[1]))
    if head == "fejer":
        _arity(expr, 3)
        return A.Fejer(_num(args[0]), _num(args[1]), t(args[2]))
    if head in ("m", "M"):
        _arity(expr, 4)
        cls = A.SmearProd if head == "m" else A.BigSmearProd
        return cls(_num(args[0], int), _num(args[1], int), t(args[2]), t(args[3]))
    if head == "H":
        _arity(expr, 2)
        return A.Dlvp(_num(args[0], int), t(args[1]))
    if head == "tau":
        _arity(expr, 4)
        poly = []
        for entry in args[0]:
            if not isinstance(entry, list) or not entry or any(isinstance(e, list) for e in entry):
                raise ParseError("tau polynomial entries are (coef word)")
            word = "".join(entry[1:])
            poly.append((_num(entry[0], complex), word))
        lam = tuple(_num(v) for v in args[1])
        N = tuple(_num(v, int) for v in args[2])
        return A.TauPoly(tuple(poly), lam, N, t(args[3]))
    if head == "riemann":
        _arity(expr, 4)
        if args[0] not in ("g", "fejer", "gform"):
            raise ParseError(f"unknown Riemann family {args[0]!r}")
        return A.RiemannSum(args[0], tuple(_num(v) for v in args[1]), _num(args[2], int), t(args[3]))
    raise ParseError(f"unknown term head {head!r}")


def parse_condition(expr, scope=None):
    scope = dict(scope or {})
    if isinstance(expr, str):
        return A.Num(_num(expr))
    if not expr or not isinstance(expr[0], str):
        raise ParseError("condition list must start with a head symbol")
    head, args = expr[0], expr[1:]
    c = lambda e: parse_condition(e, scope)  # noqa: E731
    t = lambda e: parse_term(e, scope)  # noqa: E731
    if head in ("phi_r", "phi_i"):
        _arity(expr, 1)
        return A.Rel(head, (t(args[0]),))
    if head == "d":
        _arity(expr, 2)
        return A.Rel("d", (t(args[0]), t(args[1])))
    if head in ("E_r", "E_i"):
        _arity(expr, 5)
        params = (_num(args[0]), _num(args[1], int), _num(args[2], int))
        return A.Rel(head, (t(args[3]), t(args[4])), params)
    if head in ("max", "min", "hypot"):
        if not args:
            raise ParseError(f"'{head}' needs arguments")
        cls = {"max": A.Max, "min": A.Min, "hypot": A.Hypot}[head]
        return cls(tuple(c(a) for a in args))
    if head in ("sub", "mul"):
        _arity(expr, 2)
        return (A.Sub if head == "sub" else A.Mul)(c(args[0]), c(args[1]))
    if head in ("abs", "sqrt"):
        _arity(expr, 1)
        return (A.Abs if head == "abs" else A.Sqrt)(c(args[0]))
    if head == "affine":
        _arity(expr, 3)
        coefs = tuple(_num(v) for v in args[0])
        conds = tuple(c(v) for v in args[1])
        if len(coefs) != len(conds):
            raise ParseError("affine needs as many coefficients as conditions")
        return A.AffineCombo(coefs, conds, _num(args[2]))
    if head in ("sup", "inf"):
        _arity(expr, 3)
        name = args[0]
        if not isinstance(name, str) or name in RESERVED:
            raise ParseError(f"bad bound variable {name!r}")
        radius = _num(args[1])
        if radius <= 0:
            raise ParseError("quantifier radius must be positive")
        scope[name] = radius
        body = parse_condition(args[2], scope)
        return (A.Sup if head == "sup" else A.Inf)(A.Var(name, radius), body)
    raise ParseError(f"unknown condition head {head!r}")


def parse(text):
    """Parse a condition from its S-expression text."""
    return parse_condition(read(text))


def parse_term_text(text):
    return parse_term(read(text))


# --- printing ----------------------------------------------------------------------

def _fmt(v):
    if isinstance(v, complex):
        if v.imag == 0:
            return repr(v.real)
        return f"{v.real!r}{v.imag:+}j"
    if isinstance(v, float) and v.is_integer() and abs(v) < 1e15:
        return repr(v)
    return repr(v)


def _word(w):
    if not isinstance(w, str):
        w = "".join("x*" if s else "x" for s in w)
    return w.replace(" ", "")


def format_term(t):
    if isinstance(t, A.Var):
        return t.name
    if isinstance(t, A.Const):
        if t.name == "0":
            return "zero"
        if t.name == "1":
            return "one"
        _, i, j = t.name.split("_")
        return f"(w {i} {j})"
    f = format_term
    if isinstance(t, A.Scale):
        return f"(scale {_fmt(complex(t.lam))} {f(t.arg)})"
    if isinstance(t, A.Add):
        return f"(add {f(t.left)} {f(t.right)})"
    if isinstance(t, A.Star):
        return f"(star {f(t.arg)})"
    if isinstance(t, A.Sigma):
        return f"(sigma {_fmt(t.t)} {f(t.arg)})"
    if isinstance(t, A.Gmap):
        return f"(g {_fmt(t.s)} {f(t.arg)})"
    if isinstance(t, A.Fejer):
        return f"(fejer {_fmt(t.m)} {_fmt(t.l)} {f(t.arg)})"
    if isinstance(t, A.SmearProd):
        return f"(m {t.K} {t.L} {f(t.left)} {f(t.right)})"
    if isinstance(t, A.BigSmearProd):
        return f"(M {t.K} {t.L} {f(t.left)} {f(t.right)})"
    if isinstance(t, A.Dlvp):
        return f"(H {t.K} {f(t.arg)})"
    if isinstance(t, A.TauPoly):
        poly = " ".join(f"({_fmt(complex(cf))} {_word(w)})" if w else f"({_fmt(complex(cf))})" for cf, w in t.poly)
        lam = " ".join(_fmt(v) for v in t.lam)
        N = " ".join(str(v) for v in t.N)
        return f"(tau ({poly}) ({lam}) ({N}) {f(t.arg)})"
    if isinstance(t, A.RiemannSum):
        params = " ".join(_fmt(float(v)) for v in t.params)
        return f"(riemann {t.family} ({params}) {t.n} {f(t.arg)})"
    raise TypeError(f"cannot format {type(t).__name__}")


def format_condition(c):
    f = format_condition
    if isinstance(c, A.Num):
        return _fmt(float(c.value))
    if isinstance(c, A.Rel):
        terms = " ".join(format_term(t) for t in c.terms)
        if c.name in ("E_r", "E_i"):
            a, n, m = c.params
            return f"({c.name} {_fmt(float(a))} {n} {m} {terms})"
        return f"({c.name} {terms})"
    if isinstance(c, (A.Max, A.Min, A.Hypot)):
        head = {A.Max: "max", A.Min: "min", A.Hypot: "hypot"}[type(c)]
        return f"({head} " + " ".join(f(a) for a in c.args) + ")"
    if isinstance(c, (A.Sub, A.Mul)):
        head = "sub" if isinstance(c, A.Sub) else "mul"
        return f"({head} {f(c.left)} {f(c.right)})"
    if isinstance(c, (A.Abs, A.Sqrt)):
        head = "abs" if isinstance(c, A.Abs) else "sqrt"
        return f"({head} {f(c.arg)})"
    if isinstance(c, A.AffineCombo):
        coefs = " ".join(_fmt(float(v)) for v in c.coefs)
        args = " ".join(f(a) for a in c.args)
        return f"(affine ({coefs}) ({args}) {_fmt(float(c.const))})"
    if isinstance(c, (A.Sup, A.Inf)):
        head = "sup" if isinstance(c, A.Sup) else "inf"
        return f"({head} {c.var.name} {_fmt(float(c.var.radius))} {f(c.body)})"
    raise TypeError(f"cannot format {type(c).__name__}")
