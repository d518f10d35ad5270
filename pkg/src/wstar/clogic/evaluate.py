"""Batched evaluation of terms and conditions in eigen-coordinates.

Variables are bound to arrays of shape ``(..., d, d)`` holding eigen-
coordinates ``U^* x U``; all leading axes are batch axes and broadcast.  Every
modular map is a multiplier there, and products stay products, so a whole
batch of assignments is evaluated with a handful of stacked matmuls.
"""
from __future__ import annotations

import functools

import numpy as np

from .. import discretization as D
from ..errors import BadInstantiation, DomainViolation, UnboundVariable
from ..model import DOMAIN_SLACK, Operator, as_matrix
from ..smearing import (check_weights, big_smeared_product_e, dlvp_multiplier, fejer_multiplier,
                        parse_word, smeared_product_e)
from . import ast as A


class Evaluator:
    """Evaluate formulas on one model.

    Parameters
    ----------
    mc : ModularCalculus
    constants : dict of str to Operator, optional
        Named constants such as matrix units ``w_j_k``.
    inner : callable, optional
        ``inner(var) -> ndarray (C, d, d)`` of eigen-coordinate candidates
        for quantifiers nested inside a condition.
    """

    def __init__(self, mc, constants=None, inner=None):
        self.mc = mc
        self.d = mc.dim
        self._const = {}
        for name, op in (constants or {}).items():
            self._const[name] = mc.to_eig(as_matrix(op))
        self._const["0"] = np.zeros((self.d, self.d), dtype=complex)
        self._const["1"] = np.eye(self.d, dtype=complex)
        self.inner = inner

    def has_constant(self, name):
        return name in self._const

    # -- multipliers -----------------------------------------------------------
    def _flow(self, t):
        return self.mc.cached(("flow", float(t)), lambda: self.mc.flow_multiplier(t))

    def _g(self, s):
        return self.mc.cached(("g", float(s)), lambda: self.mc.g_multiplier(s).astype(complex))

    def _riemann(self, node):
        if node.family == "gform":
            return D.form_multiplier(self.mc, node.params[0], node.n)
        kind = "fejer" if node.family == "fejer" else "g"
        return D.scheme_multiplier(self.mc, D.make_scheme(D.KernelSpec(kind, tuple(node.params)), node.n))

    # -- terms -------------------------------------------------------------------
    def term(self, t, env):
        if isinstance(t, A.Var):
            try:
                return env[t.name]
            except KeyError:
                raise UnboundVariable(f"variable {t.name!r} is not assigned") from None
        if isinstance(t, A.Const):
            try:
                return self._const[t.name]
            except KeyError:
                raise BadInstantiation(f"model has no constant {t.name!r}") from None
        f = self.term
        if isinstance(t, A.Scale):
            return complex(t.lam) * f(t.arg, env)
        if isinstance(t, A.Add):
            return f(t.left, env) + f(t.right, env)
        if isinstance(t, A.Star):
            return np.conj(np.swapaxes(f(t.arg, env), -1, -2))
        if isinstance(t, A.Sigma):
            return self._flow(t.t) * f(t.arg, env)
        if isinstance(t, A.Gmap):
            return self._g(t.s) * f(t.arg, env)
        if isinstance(t, A.Fejer):
            return fejer_multiplier(self.mc, t.m, t.l) * f(t.arg, env)
        if isinstance(t, A.SmearProd):
            return smeared_product_e(self.mc, t.K, t.L, f(t.left, env), f(t.right, env))
        if isinstance(t, A.BigSmearProd):
            return big_smeared_product_e(self.mc, t.K, t.L, f(t.left, env), f(t.right, env))
        if isinstance(t, A.Dlvp):
            return dlvp_multiplier(self.mc, t.K) * f(t.arg, env)
        if isinstance(t, A.TauPoly):
            return self._tau(t, f(t.arg, env))
        if isinstance(t, A.RiemannSum):
            return self._riemann(t) * f(t.arg, env)
        raise TypeError(f"not a term: {t!r}")

    def _tau(self, t, xe):
        # the symbol's meaning: the polynomial in sum_i lam_i F_{N_i}(x) with true products
        check_weights(t.lam, t.N)
        y = sum(l_ * (fejer_multiplier(self.mc, n) * xe) for l_, n in zip(t.lam, t.N))
        ys = np.conj(np.swapaxes(y, -1, -2))
        eye = np.broadcast_to(np.eye(self.d, dtype=complex), y.shape)
        out = 0
        for coef, word in t.poly:
            term = eye
            for star in parse_word(word):
                term = term @ (ys if star else y)
            out = out + complex(coef) * term
        return out + np.zeros_like(y)

    # -- conditions ----------------------------------------------------------------
    def cond(self, c, env):
        mc = self.mc
        if isinstance(c, A.Num):
            return np.float64(c.value)
        if isinstance(c, A.Rel):
            if c.name == "phi_r":
                return mc.state_e(self.term(c.terms[0], env)).real
            if c.name == "phi_i":
                return mc.state_e(self.term(c.terms[0], env)).imag
            if c.name == "d":
                diff = self.term(c.terms[0], env) - self.term(c.terms[1], env)
                return np.sqrt(mc.sqnorm_e(diff, mc.w_star))
            alpha, N, M = c.params
            a = fejer_multiplier(mc, N) * self.term(c.terms[0], env)
            b = fejer_multiplier(mc, M) * self.term(c.terms[1], env)
            weight = mc.cached(("Eweight", float(alpha)), lambda: mc.w_l2 * np.exp(alpha * mc.log_ratios))
            val = mc.inner_e(a, b, weight)
            return val.real if c.name == "E_r" else val.imag
        f = self.cond
        if isinstance(c, A.Max):
            return functools.reduce(np.maximum, (f(a, env) for a in c.args))
        if isinstance(c, A.Min):
            return functools.reduce(np.minimum, (f(a, env) for a in c.args))
        if isinstance(c, A.Sub):
            return f(c.left, env) - f(c.right, env)
        if isinstance(c, A.Abs):
            return np.abs(f(c.arg, env))
        if isinstance(c, A.AffineCombo):
            out = np.float64(c.const)
            for k, a in zip(c.coefs, c.args):
                out = out + k * f(a, env)
            return out
        if isinstance(c, A.Hypot):
            return np.sqrt(sum(f(a, env) ** 2 for a in c.args))
        if isinstance(c, A.Mul):
            return f(c.left, env) * f(c.right, env)
        if isinstance(c, A.Sqrt):
            return np.sqrt(np.maximum(f(c.arg, env), 0.0))
        if isinstance(c, (A.Sup, A.Inf)):
            return self._nested(c, env)
        raise TypeError(f"not a condition: {c!r}")

    def _nested(self, q, env):
        if self.inner is None:
            raise UnboundVariable("nested quantifier needs an inner candidate provider")
        cand = self.inner(q.var)
        new_env = {k: v[..., None, :, :] for k, v in env.items()}
        new_env[q.var.name] = cand
        vals = self.cond(q.body, new_env)
        vals = np.broadcast_to(vals, np.broadcast_shapes(np.shape(vals), (cand.shape[0],)))
        return vals.max(axis=-1) if isinstance(q, A.Sup) else vals.min(axis=-1)


def variable_radii(node):
    """Smallest radius declared for each variable occurring in ``node``."""
    out = {}

    def walk(n):
        if isinstance(n, A.Var):
            out[n.name] = min(out.get(n.name, np.inf), n.radius)
        if isinstance(n, (A.Sup, A.Inf)):
            walk(n.var)
        for c in getattr(n, "children", ()):
            walk(c)

    walk(node)
    return out


def _check_assignment(mc, node, assignment):
    radii = variable_radii(node)
    env = {}
    for name in node.free_vars():
        if name not in assignment:
            raise UnboundVariable(f"variable {name!r} is not assigned")
        mat = as_matrix(assignment[name])
        norm = float(np.linalg.norm(mat, 2))
        if norm > radii.get(name, np.inf) + DOMAIN_SLACK:
            raise DomainViolation(f"{name} has norm {norm:.6g} > declared radius {radii[name]}")
        env[name] = mc.to_eig(mat)
    return env


def eval_term(model, mc, term, assignment=None, constants=None):
    """Evaluate a term on concrete operators.

    Raises
    ------
    UnboundVariable, DomainViolation
    """
    assignment = assignment or {}
    env = _check_assignment(mc, term, assignment)
    ev = Evaluator(mc, constants)
    return Operator(mc.from_eig(ev.term(term, env)))


def eval_closed(mc, cond, assignment=None, constants=None, inner=None):
    """Value of a condition whose free variables are all assigned."""
    env = _check_assignment(mc, cond, assignment or {})
    return float(Evaluator(mc, constants, inner).cond(cond, env))
