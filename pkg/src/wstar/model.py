"""Finite-dimensional W*-probability spaces.

A model is the full matrix algebra M_n(C) together with a faithful state
``phi(x) = Tr(rho x)`` given by a positive definite density matrix ``rho``.
The GNS vector is represented implicitly: ``x xi`` corresponds to
``x rho^{1/2}`` with the Hilbert-Schmidt inner product, so that
``<x xi, y xi> = phi(x^* y)`` (linear in the second argument).
"""
from __future__ import annotations

import numpy as np

from .errors import (
    BadDimension,
    DimensionMismatch,
    InvalidInput,
    NotFaithful,
    NotHermitian,
    NotUnitTrace,
)

FAITHFULNESS_FLOOR = 1e-10
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
RECONSTRUCTION_TOL = 1e-10
DOMAIN_SLACK = 1e-12


def _frozen(arr):
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


class Operator:
    """Immutable element of M_n(C) with a cached operator norm.

    Parameters
    ----------
    mat : array_like
        Square complex matrix.
    """

    __slots__ = ("_mat", "_opnorm")

    def __init__(self, mat):
        arr = np.asarray(mat, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
            raise BadDimension(f"operator must be a square matrix, got shape {arr.shape}")
        self._mat = _frozen(arr)
        self._opnorm = None

    @property
    def mat(self):
        return self._mat

    @property
    def dim(self):
        return self._mat.shape[0]

    @property
    def opnorm(self):
        """Largest singular value, computed once."""
        if self._opnorm is None:
            self._opnorm = float(np.linalg.norm(self._mat, 2))
        return self._opnorm

    def adjoint(self):
        return Operator(self._mat.conj().T)

    def __add__(self, other):
        return Operator(self._mat + as_matrix(other))

    def __sub__(self, other):
        return Operator(self._mat - as_matrix(other))

    def __neg__(self):
        return Operator(-self._mat)

    def __mul__(self, scalar):
        return Operator(complex(scalar) * self._mat)

    __rmul__ = __mul__

    def __matmul__(self, other):
        return Operator(self._mat @ as_matrix(other))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self._mat, dtype=dtype)

    def __repr__(self):
        return f"Operator(dim={self.dim}, opnorm={self.opnorm:.6g})"


def as_matrix(x):
    """Return the complex ndarray behind an :class:`Operator` or array-like."""
    if isinstance(x, Operator):
        return x.mat
    return np.asarray(x, dtype=complex)


class WStarModel:
    """Matrix algebra M_n(C) with a faithful state.

    Attributes
    ----------
    dim : int
        Matrix size n.
    rho : ndarray
        Density matrix (read-only).
    p : ndarray
        Eigenvalues of ``rho`` in non-increasing order.
    U : ndarray
        Unitary whose columns are the matching eigenvectors, so that
        ``rho = U diag(p) U^*``.
    """

    __slots__ = ("dim", "rho", "p", "U", "is_diagonal")

    def __init__(self, rho, p, U, is_diagonal):
        self.dim = int(rho.shape[0])
        self.rho = _frozen(rho)
        self.p = _frozen(p)
        self.U = _frozen(U)
        self.is_diagonal = bool(is_diagonal)

    def __repr__(self):
        return f"WStarModel(dim={self.dim}, p={np.round(self.p, 6).tolist()})"

    def check_operator(self, x):
        mat = as_matrix(x)
        if mat.shape != (self.dim, self.dim):
            raise DimensionMismatch(f"expected {self.dim}x{self.dim} operator, got {mat.shape}")
        return mat

    def identity(self):
        return Operator(np.eye(self.dim))


def _validate_eigenvalues(p, floor):
    if not np.all(np.isfinite(p)):
        raise InvalidInput("eigenvalues must be finite")
    if abs(p.sum() - 1.0) > TRACE_TOL:
        raise NotUnitTrace(f"trace is {p.sum()!r}, expected 1")
    if p.min() <= floor:
        raise NotFaithful(f"eigenvalue {p.min()!r} is below the faithfulness floor {floor}")


def build_model(eigenvalues=None, matrix=None, floor=FAITHFULNESS_FLOOR):
    """Validate a density specification and precompute its eigen-data.

    Exactly one of ``eigenvalues`` (diagonal density) or ``matrix`` must be
    given.

    Parameters
    ----------
    eigenvalues : sequence of float, optional
        Diagonal of a diagonal density matrix.
    matrix : array_like, optional
        Full Hermitian density matrix.
    floor : float
        Smallest admissible eigenvalue.

    Returns
    -------
    WStarModel

    Raises
    ------
    BadDimension, NotHermitian, NotUnitTrace, NotFaithful
    """
    if (eigenvalues is None) == (matrix is None):
        raise InvalidInput("give exactly one of eigenvalues or matrix")
    if eigenvalues is not None:
        diag = np.asarray(eigenvalues, dtype=float)
        if diag.ndim != 1 or diag.size < 1:
            raise BadDimension("eigenvalue list must be a non-empty vector")
        _validate_eigenvalues(diag, floor)
        order = np.argsort(-diag, kind="stable")
        U = np.eye(diag.size)[:, order].astype(complex)
        return WStarModel(np.diag(diag).astype(complex), diag[order], U, True)

    rho = np.asarray(matrix, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] < 1:
        raise BadDimension(f"density must be square, got shape {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise InvalidInput("density entries must be finite")
    if np.max(np.abs(rho - rho.conj().T)) > HERMITIAN_TOL:
        raise NotHermitian("density matrix is not Hermitian")
    rho = 0.5 * (rho + rho.conj().T)
    tr = np.trace(rho).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise NotUnitTrace(f"trace is {tr!r}, expected 1")
    w, V = np.linalg.eigh(rho)
    w, V = w[::-1], V[:, ::-1]
    _validate_eigenvalues(w / w.sum() * tr, floor)
    recon = (V * w) @ V.conj().T
    if np.linalg.norm(recon - rho, 2) > RECONSTRUCTION_TOL:
        raise InvalidInput("eigen-decomposition does not reconstruct the density")
    is_diag = bool(np.count_nonzero(rho - np.diag(np.diag(rho))) == 0)
    return WStarModel(rho, w, V, is_diag)


def state(model, x):
    """Evaluate ``phi(x) = Tr(rho x)``."""
    mat = model.check_operator(x)
    return complex(np.sum(model.rho.T * mat))


def gns_inner(model, x, y):
    """GNS inner product ``<x xi, y xi> = phi(x^* y)``, linear in ``y``."""
    a = model.check_operator(x)
    b = model.check_operator(y)
    return complex(np.trace(model.rho @ a.conj().T @ b))


def in_domain(x, m):
    """True iff the operator norm of ``x`` is at most ``m`` (plus 1e-12)."""
    norm = x.opnorm if isinstance(x, Operator) else float(np.linalg.norm(as_matrix(x), 2))
    return bool(norm <= m + DOMAIN_SLACK)


# --- JSON encoding -----------------------------------------------------------

def matrix_to_json(mat):
    mat = as_matrix(mat)
    return [[{"re": float(z.real), "im": float(z.imag)} for z in row] for row in mat]


def matrix_from_json(obj):
    try:
        rows = [[complex(float(e["re"]), float(e.get("im", 0.0))) for e in row] for row in obj]
    except (TypeError, KeyError, ValueError) as exc:
        raise InvalidInput(f"malformed matrix encoding: {exc}") from exc
    if not rows or any(len(r) != len(rows) for r in rows):
        raise BadDimension("matrix encoding must be a non-empty square array")
    return np.array(rows, dtype=complex)


def model_from_json(obj):
    """Build a model from its JSON description.

    Returns
    -------
    model : WStarModel
    constants : dict
        Named operators (matrix units) supplied by a recipe; empty otherwise.
    recipe : dict or None
    """
    if not isinstance(obj, dict):
        raise InvalidInput("model spec must be a JSON object")
    if "recipe" in obj:
        from .catalog import build_recipe, recipe_from_json

        recipe = recipe_from_json(obj["recipe"])
        model, constants = build_recipe(recipe)
        return model, constants, recipe
    rho = obj.get("rho")
    if not isinstance(rho, dict):
        raise InvalidInput("model spec needs a 'rho' object or a 'recipe'")
    if "eigenvalues" in rho:
        try:
            ev = [float(v) for v in rho["eigenvalues"]]
        except (TypeError, ValueError) as exc:
            raise InvalidInput(f"bad eigenvalue list: {exc}") from exc
        model = build_model(eigenvalues=ev)
    elif "matrix" in rho:
        model = build_model(matrix=matrix_from_json(rho["matrix"]))
    else:
        raise InvalidInput("'rho' needs 'eigenvalues' or 'matrix'")
    if "dim" in obj and int(obj["dim"]) != model.dim:
        raise BadDimension(f"declared dim {obj['dim']} does not match density size {model.dim}")
    return model, {}, None


def model_to_json(model):
    """Serialize a model; diagonal densities use the eigenvalue form."""
    if model.is_diagonal:
        rho = {"eigenvalues": [float(v) for v in np.diag(model.rho).real]}
    else:
        rho = {"matrix": matrix_to_json(model.rho)}
    return {"v": 1, "dim": model.dim, "rho": rho}
