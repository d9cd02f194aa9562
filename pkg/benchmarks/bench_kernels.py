"""Time the float kernels under both backends, plus one census enumeration.

The backend is fixed at import time, so each one runs in its own subprocess:

    python3 benchmarks/bench_kernels.py            # both backends
    python3 benchmarks/bench_kernels.py --inner    # current backend only
"""
from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def _best(fn, repeat: int) -> float:
    fn()  # warm-up (numba compiles here)
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def inner(size: int, repeat: int) -> dict:
    from quatpack import kernels
    from quatpack.cli import resolve_cover
    from quatpack.packing import enumerate_apollonian

    rng = np.random.default_rng(0)
    centers = rng.random((size, 2)) * 10
    radii = rng.random(size) * 0.05
    basis = np.array([[10.0, 0.0], [0.0, 10.0]])
    coords = np.array([[i, j] for i in (-1, 0, 1) for j in (-1, 0, 1)], dtype=float)
    points = rng.random((size * 10, 2)) * 10

    res = {
        "backend": kernels.backend(),
        "near_pairs": _best(lambda: kernels.candidate_pairs(centers, radii, basis, coords), repeat),
        "power_sum": _best(lambda: kernels.power_sum(radii, 3), repeat),
        "covered_mask": _best(lambda: kernels.covered_mask(points, centers, radii), repeat),
    }
    cov = resolve_cover("m=5")
    t = time.perf_counter()
    apo = enumerate_apollonian(cov, 2000)
    res["census_m5_bend2000"] = time.perf_counter() - t
    res["census_size"] = len(apo)
    return res


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=2000, help="number of random balls")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--inner", action="store_true", help="run in this process only")
    args = ap.parse_args()

    if args.inner:
        print(json.dumps(inner(args.size, args.repeat)))
        return

    rows = []
    for flag in ("0", "1"):
        env = dict(os.environ, QUATPACK_NO_NUMBA=flag)
        out = subprocess.run([sys.executable, __file__, "--inner", "--size", str(args.size),
                              "--repeat", str(args.repeat)],
                             env=env, capture_output=True, text=True, check=True)
        rows.append(json.loads(out.stdout.strip().splitlines()[-1]))
    keys = ["near_pairs", "power_sum", "covered_mask", "census_m5_bend2000"]
    print(f"{'kernel':<22}" + "".join(f"{r['backend']:>12}" for r in rows))
    for k in keys:
        print(f"{k:<22}" + "".join(f"{r[k] * 1e3:>10.2f}ms" for r in rows))
    print(f"census size {rows[0]['census_size']} spheres, size={args.size}, best of {args.repeat}")


if __name__ == "__main__":
    main()
