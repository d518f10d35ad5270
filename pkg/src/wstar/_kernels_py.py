"""Pure numpy versions of the summation kernels.

Each kernel reduces along the contiguous last axis, which numpy performs by
pairwise summation, so results are reproducible run to run.
"""
import numpy as np


def trig_sum(r, t, w):
    """Return ``out[a] = sum_k w[k] exp(1j * t[k] * r[a])``."""
    r = np.ascontiguousarray(r, dtype=float)
    t = np.ascontiguousarray(t, dtype=float)
    w = np.ascontiguousarray(w, dtype=complex)
    phase = np.outer(r, t)
    return (w * (np.cos(phase) + 1j * np.sin(phase))).sum(axis=1)


def sech_sum(r, t, w):
    """Return ``out[a] = sum_k w[k] / cosh((r[a] - t[k]) / 2)``."""
    r = np.ascontiguousarray(r, dtype=float)
    t = np.ascontiguousarray(t, dtype=float)
    w = np.ascontiguousarray(w, dtype=float)
    with np.errstate(over="ignore"):  # cosh overflow means a zero term
        return (w / np.cosh(0.5 * (r[:, None] - t[None, :]))).sum(axis=1)


def resolvent_sum(lam, s, w):
    """Return ``out[a] = sum_k w[k] / (lam[a] + s[k])``."""
    lam = np.ascontiguousarray(lam, dtype=float)
    s = np.ascontiguousarray(s, dtype=float)
    w = np.ascontiguousarray(w, dtype=float)
    return (w / (lam[:, None] + s[None, :])).sum(axis=1)
