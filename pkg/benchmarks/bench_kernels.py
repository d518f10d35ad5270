"""Compare the compiled summation kernels with the numpy fallback.

Usage::

    python benchmarks/bench_kernels.py [--repeat 5] [--json]

Each kernel is timed on the workload it sees in practice: a flattened
log-ratio matrix of a dimension-8 model against a Riemann grid (``n = 5``
gives 250 nodes, ``n = 10`` gives 2000) or a 10^4-node quadrature.
"""
from __future__ import annotations

import argparse
import json
import timeit

import numpy as np

from wstar import _kernels_py
from wstar.discretization import grid

try:
    from wstar import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def workloads(rng):
    r = rng.normal(scale=2.0, size=64)
    out = []
    for n in (5, 10):
        t = grid(n)
        w = rng.normal(size=t.size) + 1j * rng.normal(size=t.size)
        out.append(("trig_sum", f"d=8, n={n} ({t.size} nodes)", (r, t, w)))
        out.append(("sech_sum", f"d=8, n={n} ({t.size} nodes)", (r, t, w.real.copy())))
    s = np.exp(np.linspace(np.log(1e-8), np.log(1e8), 10_000))
    out.append(("resolvent_sum", "64 points, 10^4 nodes", (np.exp(r), s, s ** 0.75)))
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    rows = []
    for name, label, data in workloads(rng):
        py = getattr(_kernels_py, name)
        t_py = min(timeit.repeat(lambda: py(*data), number=3, repeat=args.repeat)) / 3
        row = {"kernel": name, "workload": label, "numpy_ms": 1e3 * t_py}
        if _ckernels is not None:
            cy = getattr(_ckernels, name)
            t_cy = min(timeit.repeat(lambda: cy(*data), number=3, repeat=args.repeat)) / 3
            diff = np.max(np.abs(np.asarray(cy(*data)) - np.asarray(py(*data))))
            scale = np.max(np.abs(py(*data)))
            row.update(cython_ms=1e3 * t_cy, speedup=t_py / t_cy, rel_diff=float(diff / scale))
        rows.append(row)
    if args.json:
        print(json.dumps(rows, indent=2))
        return
    print(f"{'kernel':<14} {'workload':<28} {'numpy ms':>10} {'cython ms':>10} {'speedup':>8} {'rel diff':>9}")
    for r in rows:
        cy = f"{r['cython_ms']:10.3f} {r['speedup']:8.1f} {r['rel_diff']:9.1e}" if "cython_ms" in r else "   (not built)"
        print(f"{r['kernel']:<14} {r['workload']:<28} {r['numpy_ms']:10.3f} {cy}")


if __name__ == "__main__":
    main()
