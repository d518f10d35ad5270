"""Sup/inf estimation over operator-norm balls.

A quantifier prefix ``sup_{x_1 in D_{m_1}} ... sup_{x_k in D_{m_k}}`` is
searched jointly.  Candidates are structured elements (0, 1, matrix units,
unitaries ``e^{iH}``, spectral truncations, model constants, all scaled to the
ball radius) and random complex Gaussian matrices; the best random
candidates are then refined by projected ascent with gradients estimated
from central differences along random directions.  Values found this way are
lower bounds for a sup (upper bounds for an inf), never exact claims.
"""
from __future__ import annotations

import itertools
import zlib
from dataclasses import dataclass, field

import numpy as np

from ..modular import spectral_truncate
from ..model import as_matrix
from . import ast as A
from .evaluate import Evaluator

STRATEGIES = ("multi_start_descent", "random_sampling", "structured_witness")
MAX_COMBOS = 256


@dataclass(frozen=True)
class BallSearch:
    """Search strategy for quantified conditions.

    Parameters
    ----------
    strategy : {"multi_start_descent", "random_sampling", "structured_witness"}
    samples : int
        Random candidates per quantifier block.
    starts : int
        Number of best random candidates refined by descent.
    iters : int
        Descent iterations per start.
    step : float
        Initial step, relative to the ball radius.
    directions : int
        Random directions per gradient estimate.
    inner_samples : int
        Random candidates for quantifiers nested inside a body.
    seed : int
    extra_witnesses : tuple of array_like
        Additional structured elements (standard coordinates, unscaled).
    """

    strategy: str = "multi_start_descent"
    samples: int = 32
    starts: int = 2
    iters: int = 25
    step: float = 0.25
    directions: int = 16
    inner_samples: int = 12
    seed: int = 42
    extra_witnesses: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")


@dataclass
class SearchResult:
    value: float
    witness: dict | None
    method: str
    kind: str


def _project(x, m):
    """Scale each matrix of a stack into the ball of radius ``m``."""
    norms = np.linalg.norm(x, 2, axis=(-2, -1))
    scale = np.minimum(1.0, m / np.maximum(norms, 1e-300))
    return x * scale[..., None, None]


def _to_radius(x, m):
    norms = np.linalg.norm(x, 2, axis=(-2, -1))
    out = np.zeros_like(x)
    nz = norms > 0
    out[nz] = x[nz] * (m / norms[nz])[..., None, None]
    return out


def structured_elements(mc, m, constants, rng, extra=()):
    """Structured witnesses in eigen-coordinates, scaled into ``D_m``."""
    d = mc.dim
    items = [np.zeros((d, d), dtype=complex), np.eye(d, dtype=complex)]
    for i in range(d):
        for j in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = 1.0
            items.append(mc.to_eig(e))          # standard matrix units
            if not mc.model.is_diagonal:
                items.append(e.copy())          # eigen-basis matrix units
    for _ in range(2):
        h = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
        items.append(mc.to_eig((v * np.exp(1j * w)) @ v.conj().T))
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    for a in (0.0, 1.0):
        items.append(mc.to_eig(spectral_truncate(mc, a, g).mat))
    for name in sorted(constants or {}):
        items.append(mc.to_eig(as_matrix(constants[name])))
    base = _to_radius(np.array(items), m)
    if len(extra):
        ext = _project(np.array([mc.to_eig(as_matrix(e)) * m for e in extra]), m)
        return base, ext
    return base, np.zeros((0, d, d), dtype=complex)


def random_elements(d, m, count, rng):
    x = rng.normal(size=(count, d, d)) + 1j * rng.normal(size=(count, d, d))
    x = _to_radius(x, m)
    half = count // 2
    x[half:] *= rng.uniform(0.0, 1.0, size=count - half)[:, None, None]
    return x


def _combos(sizes, rng):
    total = int(np.prod(sizes))
    if total <= MAX_COMBOS:
        return list(itertools.product(*[range(s) for s in sizes]))
    diag = [tuple(min(k, s - 1) for s in sizes) for k in range(max(sizes))]
    picks = rng.integers(0, np.array(sizes), size=(MAX_COMBOS - len(diag), len(sizes)))
    return diag + [tuple(int(v) for v in row) for row in picks]


class _Searcher:
    def __init__(self, mc, constants, search, label):
        self.mc = mc
        self.search = search
        self.constants = constants or {}
        root = np.random.SeedSequence([int(search.seed) & 0xFFFFFFFFFFFFFFFF, zlib.crc32(label.encode())])
        s_rand, s_struct, s_desc, s_inner = root.spawn(4)
        self.rng_rand = np.random.default_rng(s_rand)
        self.rng_struct = np.random.default_rng(s_struct)
        self.rng_desc = np.random.default_rng(s_desc)
        self.rng_inner = np.random.default_rng(s_inner)
        self._inner_cache = {}
        self.ev = Evaluator(mc, constants, inner=self._inner)

    def _inner(self, var):
        key = (var.name, var.radius)
        if key not in self._inner_cache:
            m = var.radius
            base, _ = structured_elements(self.mc, m, self.constants, self.rng_inner)
            keep = base[: min(len(base), 2 + self.mc.dim ** 2 + 4)]
            rand = random_elements(self.mc.dim, m, self.search.inner_samples, self.rng_inner)
            self._inner_cache[key] = np.concatenate([keep, rand])
        return self._inner_cache[key]

    def _env(self, names, arrays):
        return dict(zip(names, arrays))

    def _eval(self, body, names, arrays):
        vals = self.ev.cond(body, self._env(names, arrays))
        shape = arrays[0].shape[:-2]
        return np.broadcast_to(np.asarray(vals, dtype=float), shape)

    def run(self, cond):
        if isinstance(cond, A.Sup):
            variables, body = A.quantifier_prefix(cond, A.Sup)
            sign, kind = 1.0, "sup"
        elif isinstance(cond, A.Inf):
            variables, body = A.quantifier_prefix(cond, A.Inf)
            sign, kind = -1.0, "inf"
        else:
            val = float(self.ev.cond(cond, {}))
            return SearchResult(val, None, "direct", "closed")
        names = [v.name for v in variables]
        radii = [v.radius for v in variables]
        d = self.mc.dim
        s = self.search

        # structured candidates
        blocks, methods = [], []
        if s.strategy != "random_sampling":
            per_var = [structured_elements(self.mc, m, self.constants, self.rng_struct, s.extra_witnesses)
                       for m in radii]
            bases = [p[0] for p in per_var]
            idx = _combos([len(b) for b in bases], self.rng_struct)
            blocks.append([np.array([bases[v][c[v]] for c in idx]) for v in range(len(names))])
            methods.append("structured")
            extras = [p[1] for p in per_var]
            if len(extras[0]):
                # each extra element jointly, and alone against each structured element
                rows = []
                for k in range(len(extras[0])):
                    rows.append([extras[v][k] for v in range(len(names))])
                    if len(names) > 1:
                        for v in range(len(names)):
                            for c in idx:
                                row = [bases[u][c[u]] for u in range(len(names))]
                                row[v] = extras[v][k]
                                rows.append(row)
                blocks.append([np.array([r[v] for r in rows]) for v in range(len(names))])
                methods.append("structured")
        # random candidates
        rand = None
        if s.strategy != "structured_witness" and s.samples > 0:
            rand = [random_elements(d, m, s.samples, self.rng_rand) for m in radii]
            blocks.append(rand)
            methods.append("random")

        best_val, best_x, best_method = -np.inf, None, None
        for arrays, method in zip(blocks, methods):
            vals = sign * self._eval(body, names, arrays)
            k = int(np.argmax(vals))
            if vals[k] > best_val:
                best_val, best_x, best_method = float(vals[k]), [a[k] for a in arrays], method

        if s.strategy == "multi_start_descent" and rand is not None and s.iters > 0:
            target = body
            if kind == "sup" and isinstance(body, A.Max) and len(body.args) == 2 \
                    and isinstance(body.args[0], A.Num) and body.args[0].value == 0.0:
                target = body.args[1]
            gvals = sign * self._eval(target, names, rand)
            order = np.argsort(-gvals, kind="stable")[: s.starts]
            for k in order:
                x = [a[k].copy() for a in rand]
                x = self._descend(target, names, radii, x, sign)
                val = sign * float(self._eval(body, names, [xi[None] for xi in x])[0])
                if val > best_val:
                    best_val, best_x, best_method = val, x, "descent"

        value = sign * best_val
        witness = {n: self.mc.from_eig(x) for n, x in zip(names, best_x)}
        return SearchResult(float(value), witness, best_method, kind)

    def _descend(self, target, names, radii, x, sign):
        s = self.search
        d = self.mc.dim
        nv = len(x)
        mscale = float(np.mean(radii))
        eps = 1e-5 * max(mscale, 1e-3)
        step = s.step
        cur = sign * float(self._eval(target, names, [xi[None] for xi in x])[0])
        Q = s.directions
        for _ in range(s.iters):
            dirs = self.rng_desc.normal(size=(Q, nv, d, d)) + 1j * self.rng_desc.normal(size=(Q, nv, d, d))
            dirs /= np.sqrt(np.sum(np.abs(dirs) ** 2, axis=(1, 2, 3)))[:, None, None, None]
            plus = [_project(x[v][None] + eps * dirs[:, v], radii[v]) for v in range(nv)]
            minus = [_project(x[v][None] - eps * dirs[:, v], radii[v]) for v in range(nv)]
            both = [np.concatenate([plus[v], minus[v]]) for v in range(nv)]
            vals = sign * self._eval(target, names, both)
            slope = (vals[:Q] - vals[Q:]) / (2 * eps)
            grad = np.tensordot(slope, dirs, axes=(0, 0)) / Q
            gnorm = float(np.sqrt(np.sum(np.abs(grad) ** 2)))
            if not np.isfinite(gnorm) or gnorm == 0.0:
                break
            cand = [_project((x[v] + step * mscale * grad[v] / gnorm)[None], radii[v])[0] for v in range(nv)]
            val = sign * float(self._eval(target, names, [c[None] for c in cand])[0])
            if val > cur:
                x, cur = cand, val
                step *= 1.5
            else:
                step *= 0.5
                if step < 1e-8:
                    break
        return x


def estimate(mc, cond, search=None, constants=None, label=""):
    """Estimate a closed condition.

    Returns
    -------
    SearchResult
        ``value`` is the best sup (inf) found; ``witness`` maps variable
        names to standard-coordinate matrices.
    """
    search = search or BallSearch()
    return _Searcher(mc, constants, search, label).run(cond)


def eval_condition(model, mc, cond, search=None, constants=None, label=""):
    """``(value, witness)`` of a closed condition under a search strategy."""
    res = estimate(mc, cond, search, constants, label)
    return res.value, res.witness
