"""Time the raster kernels: compiled extension against the pure-Python loops.

Run with ``python3 benchmarks/bench_kernels.py [--res 400x400] [--phases 6]``.
"""

import argparse
import random
import timeit
from array import array

from kptrop import _kernels_py

try:
    from kptrop import _kernels as _compiled
except ImportError:
    _compiled = None


def _inputs(n_phases, seed=1):
    rng = random.Random(seed)
    p = sorted(rng.uniform(-2, 2) for _ in range(n_phases))
    ax = array("d", p)
    ay = array("d", (v * v for v in p))
    const = array("d", (rng.uniform(-5, 5) for _ in p))
    sign = array("d", (1.0 for _ in p))
    return ax, ay, const, sign


def _bench(module, name, nx, ny, n_phases, repeat):
    ax, ay, const, sign = _inputs(n_phases)
    if name == "argmax_grid":
        idx = array("i", bytes(4 * nx * ny))
        gap = array("d", bytes(8 * nx * ny))
        call = lambda: module.argmax_grid(ax, ay, const, -10.0, 20.0 / nx, -10.0, 20.0 / ny, nx, ny, idx, gap)
    else:
        out = array("d", bytes(8 * nx * ny))
        call = lambda: module.exact_u_grid(ax, ay, const, sign, -10.0, 20.0 / nx, -10.0, 20.0 / ny,
                                           nx, ny, 1.0, out)
    return min(timeit.repeat(call, number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--res", default="400x400")
    ap.add_argument("--phases", type=int, default=6)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    nx, ny = (int(v) for v in args.res.split("x"))
    print(f"grid {nx}x{ny}, {args.phases} phases, best of {args.repeat}")
    for name in ("argmax_grid", "exact_u_grid"):
        py = _bench(_kernels_py, name, nx, ny, args.phases, args.repeat)
        line = f"{name:14s} python {py * 1e3:9.2f} ms"
        if _compiled is not None:
            cy = _bench(_compiled, name, nx, ny, args.phases, args.repeat)
            line += f"   compiled {cy * 1e3:8.2f} ms   speedup {py / cy:6.1f}x"
        else:
            line += "   compiled extension not built"
        print(line)


if __name__ == "__main__":
    main()
