"""Time the numba and numpy kernel backends on the same inputs.

    python3 benchmarks/bench_kernels.py [--sizes 64 128 256] [--repeat 3]

Each kernel is run once per backend to warm up (numba compiles or loads its
cache), then timed as the best of ``--repeat`` runs.  Outputs are compared
bitwise so a speedup never hides a disagreement.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from mixedmorrey import kernels
from mixedmorrey._backend import HAVE_NUMBA, use_backend


def _best(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def cases(N: int, rng: np.random.Generator):
    a = rng.uniform(0, 1, size=(N, N))
    table = rng.standard_normal((2 * N - 1, 2 * N - 1))
    yield "line_maximal", lambda: kernels.line_maximal(a)
    yield "line_maximal[pruned]", lambda: kernels.line_maximal(a, pruned=True)
    yield "cube_maximal", lambda: kernels.cube_maximal(a)
    if N <= 64:
        yield "rectangle_maximal", lambda: kernels.rectangle_maximal(a)
    yield "offset_convolve", lambda: kernels.offset_convolve(a, table)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[32, 64, 128])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if not HAVE_NUMBA:
        print("numba is not importable; nothing to compare")
        return 1
    print(f"{'kernel':24s} {'N':>5s} {'numpy [s]':>11s} {'numba [s]':>11s} {'speedup':>8s}  equal")
    status = 0
    for N in args.sizes:
        rng = np.random.default_rng(N)
        for name, fn in cases(N, rng):
            res = {}
            for backend in ("numpy", "numba"):
                with use_backend(backend):
                    fn()
                    res[backend] = _best(fn, args.repeat)
            (tn, on), (tb, ob) = res["numpy"], res["numba"]
            same = bool(np.array_equal(on, ob))
            close = same or bool(np.allclose(on, ob, rtol=1e-12, atol=1e-12))
            status |= not close
            tag = "bitwise" if same else ("1e-12" if close else "DIFFER")
            print(f"{name:24s} {N:5d} {tn:11.4f} {tb:11.4f} {tn / max(tb, 1e-12):8.1f}  {tag}")
    return status


if __name__ == "__main__":
    raise SystemExit(main())
