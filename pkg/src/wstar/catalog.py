"""Named model families used as positive and negative suite fixtures.

* ``tracial(n)``: normalized trace on ``M_n``.
* ``diagonal(p)``: diagonal density with the given weights.
* ``geometric_truncation(n0, levels)``: ``tr_{n0} (x) diag(c 2^{-j-1})`` with
  ``c = 1 / (1 - 2^{-levels})``, carrying matrix units ``w_j_k = 1 (x) e_jk``.
* ``periodic(lam, levels)``: weights proportional to ``lam^j``, so every
  log-ratio is an integer multiple of ``ln lam``.
* ``tensor(a, b)``: product state on the tensor product.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import BadParameters, InvalidInput
from .model import Operator, build_model

KINDS = ("tracial", "diagonal", "geometric_truncation", "periodic", "tensor")


@dataclass(frozen=True)
class ModelRecipe:
    kind: str
    params: dict = field(default_factory=dict)

    def __hash__(self):
        return hash(self.label())

    def label(self):
        k, p = self.kind, self.params
        if k == "tracial":
            return f"tracial({p['n']})"
        if k == "diagonal":
            return "diagonal(" + ",".join(f"{v:.6g}" for v in p["p"]) + ")"
        if k == "geometric_truncation":
            return f"geometric_truncation({p['n0_dim']},{p['levels']})"
        if k == "periodic":
            return f"periodic({p['lam']:.6g},{p['levels']})"
        return f"tensor({p['left'].label()},{p['right'].label()})"


def tracial(n):
    return ModelRecipe("tracial", {"n": int(n)})


def diagonal(p):
    return ModelRecipe("diagonal", {"p": tuple(float(v) for v in p)})


def geometric_truncation(n0_dim, levels):
    return ModelRecipe("geometric_truncation", {"n0_dim": int(n0_dim), "levels": int(levels)})


def periodic(lam, levels):
    return ModelRecipe("periodic", {"lam": float(lam), "levels": int(levels)})


def tensor(left, right):
    return ModelRecipe("tensor", {"left": left, "right": right})


def renormalization(levels):
    """Truncation constant ``c = 1 / (1 - 2^{-levels})``."""
    return 1.0 / (1.0 - 2.0 ** (-levels))


def geometric_weights(levels):
    return renormalization(levels) * 2.0 ** (-np.arange(1, levels + 1, dtype=float))


def _weights_and_units(recipe):
    """Diagonal weights of the recipe plus its matrix units (as ndarrays)."""
    k, p = recipe.kind, recipe.params
    if k == "tracial":
        n = p["n"]
        if n < 1:
            raise BadParameters("tracial(n) needs n >= 1")
        return np.full(n, 1.0 / n), {}
    if k == "diagonal":
        w = np.asarray(p["p"], dtype=float)
        if w.size < 1:
            raise BadParameters("diagonal needs at least one weight")
        return w, {}
    if k == "geometric_truncation":
        n0, levels = p["n0_dim"], p["levels"]
        if n0 < 1 or levels < 2:
            raise BadParameters("geometric_truncation needs n0_dim >= 1 and levels >= 2")
        w = np.kron(np.full(n0, 1.0 / n0), geometric_weights(levels))
        units = {}
        for j in range(levels):
            for l in range(levels):
                e = np.zeros((levels, levels))
                e[j, l] = 1.0
                units[f"w_{j}_{l}"] = np.kron(np.eye(n0), e)
        return w, units
    if k == "periodic":
        lam, levels = p["lam"], p["levels"]
        if not (0.0 < lam < 1.0) or levels < 2:
            raise BadParameters("periodic needs 0 < lam < 1 and levels >= 2")
        w = lam ** np.arange(levels, dtype=float)
        return w / w.sum(), {}
    if k == "tensor":
        wa, ua = _weights_and_units(p["left"])
        wb, ub = _weights_and_units(p["right"])
        clash = set(ua) & set(ub)
        if clash:
            raise BadParameters(f"both tensor factors define constants {sorted(clash)}")
        units = {name: np.kron(u, np.eye(wb.size)) for name, u in ua.items()}
        units.update({name: np.kron(np.eye(wa.size), u) for name, u in ub.items()})
        return np.kron(wa, wb), units
    raise BadParameters(f"unknown recipe kind {k!r}")


def build_recipe(recipe):
    """Instantiate a recipe.

    Returns
    -------
    model : WStarModel
    constants : dict of str to Operator
        Matrix units ``w_j_k`` when the recipe has them.

    Raises
    ------
    BadParameters
    """
    w, units = _weights_and_units(recipe)
    try:
        model = build_model(eigenvalues=w)
    except InvalidInput as exc:
        raise BadParameters(str(exc)) from exc
    except Exception as exc:  # NotUnitTrace, NotFaithful from user weights
        if hasattr(exc, "code"):
            raise BadParameters(f"{exc.code}: {exc}") from exc
        raise
    return model, {name: Operator(u) for name, u in units.items()}


def recipe_info(recipe):
    """Audit data: the truncation constant and the deviation of ``phi(w_jj)``
    from the untruncated ``2^{-j-1}``."""
    info = {"label": recipe.label()}
    if recipe.kind == "geometric_truncation":
        levels = recipe.params["levels"]
        c = renormalization(levels)
        info["c"] = c
        info["deltas"] = [(c - 1.0) * 2.0 ** (-j - 1) for j in range(levels)]
    return info


def recipe_to_json(recipe):
    out = {"kind": recipe.kind}
    for key, val in recipe.params.items():
        if isinstance(val, ModelRecipe):
            out[key] = recipe_to_json(val)
        elif isinstance(val, tuple):
            out[key] = list(val)
        else:
            out[key] = val
    return out


def recipe_from_json(obj: Any):
    if not isinstance(obj, dict) or obj.get("kind") not in KINDS:
        raise InvalidInput(f"recipe must be an object with kind in {KINDS}")
    kind = obj["kind"]
    try:
        if kind == "tracial":
            return tracial(obj["n"])
        if kind == "diagonal":
            return diagonal(obj["p"])
        if kind == "geometric_truncation":
            return geometric_truncation(obj["n0_dim"], obj["levels"])
        if kind == "periodic":
            return periodic(obj["lam"], obj["levels"])
        return tensor(recipe_from_json(obj["left"]), recipe_from_json(obj["right"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInput(f"malformed {kind} recipe: {exc}") from exc


@dataclass(frozen=True)
class NegativeFixture:
    recipe: ModelRecipe
    axiom_id: str
    options: dict
    expected: str = "FAIL"
    reason: str = ""


def negative_fixtures():
    """Curated (model, axiom) pairs whose suite value must exceed 0.01."""
    ln2, ln3 = np.log(2.0), np.log(3.0)
    out = []
    for r in (tracial(2), tracial(4), diagonal((2 / 3, 1 / 3)), periodic(0.5, 4), geometric_truncation(1, 3)):
        out.append(NegativeFixture(r, "23", {}, reason="finite-dimensional centralizers are type I"))
    out.append(NegativeFixture(periodic(0.5, 4), "21", {"gamma": ln3},
                               reason="the hat over ln 2 misses the lattice (ln 3)Z"))
    out.append(NegativeFixture(periodic(1 / 3, 4), "21", {"gamma": ln2},
                               reason="ln 3 lies in a gap of (ln 2)Z"))
    for levels in (2, 3):
        out.append(NegativeFixture(geometric_truncation(2, levels), "27", {},
                                   reason="the corner w00 M w00 is M_2, not scalar"))
    return out
