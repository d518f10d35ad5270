"""Time-domain kernels and their Fourier transforms.

The transform convention is ``fhat(y) = int f(t) exp(i t y) dt``, so that the
smearing ``sigma_f`` acts on the eigen-component with log-ratio ``r`` as the
multiplier ``fhat(r)``.
"""
import numpy as np


def fejer_hat(y, m, l=0.0):
    """Translated hat ``max(0, 1 - |y - l| / m)``; zero on the support edge."""
    y = np.asarray(y, dtype=float)
    return np.maximum(0.0, 1.0 - np.abs(y - l) / m)


def fejer_time(t, m):
    """Fejer kernel ``(1 - cos(m t)) / (pi m t^2)`` with value ``m / (2 pi)`` at 0."""
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    zero = t == 0.0
    out[zero] = m / (2.0 * np.pi)
    tt = t[~zero]
    # 1 - cos(u) = 2 sin(u/2)^2 avoids cancellation for small u
    out[~zero] = 2.0 * np.sin(0.5 * m * tt) ** 2 / (np.pi * m * tt ** 2)
    return out


def fejer_translate_time(t, m, l):
    """Time kernel whose transform is ``fejer_hat(., m, l)``."""
    t = np.asarray(t, dtype=float)
    return fejer_time(t, m) * np.exp(-1j * l * t)


def dlvp_hat(y, K):
    """De la Vallee Poussin transform ``max(0, min(K + 1 - |y|, 1))``."""
    y = np.asarray(y, dtype=float)
    return np.maximum(0.0, np.minimum(K + 1.0 - np.abs(y), 1.0))


def g_time(t, s):
    """``g_s(t) = 2 exp(-i s t) / (exp(pi t) + exp(-pi t))``."""
    t = np.asarray(t, dtype=float)
    return np.exp(-1j * s * t) / np.cosh(np.pi * t)


def g_hat(y, s):
    """Transform of ``g_s``: ``sech((y - s) / 2)``, i.e. ``2 e^{s/2} e^{y/2} / (e^y + e^s)``."""
    y = np.asarray(y, dtype=float)
    return 1.0 / np.cosh(0.5 * (y - s))
