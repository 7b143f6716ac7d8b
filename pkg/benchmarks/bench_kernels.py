"""Compare the compiled and pure-Python kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Also times one end-to-end Hyers limit and a polynomial triple product with
each backend selected through ``HYERSLAB_PURE_PYTHON`` in a subprocess.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from hyerslab import kernels


def cases(rng):
    def poly(n, spread):
        d = np.unique(rng.integers(0, spread, n) * 2 + 1).astype(np.int64)
        c = rng.normal(size=d.size) + 1j * rng.normal(size=d.size)
        return d, c

    da, ca = poly(200, 400)
    db, cb = poly(200, 400)
    sa, sca = poly(200, 10**9)
    sb, scb = poly(200, 10**9)
    keys = rng.integers(-10**6, 10**6, 8).astype(np.int64)
    return {
        "poly_mul dense 200x200": lambda m: m.poly_mul(da, ca, db, cb, 10**6),
        "poly_mul sparse 200x200": lambda m: m.poly_mul(sa, sca, sb, scb, 10**6),
        "direction_hash 8 keys": lambda m: m.direction_hash(12345, keys),
        "unit_uniforms 18": lambda m: m.unit_uniforms(987654321, 18),
    }


END_TO_END = """
import time
from hyerslab import AlgebraContext, JensenParams, PerturbationSpec, PowerType, hyers_limit, make_probe, kernels
from hyerslab.perturb import LinearCore
from hyerslab.sampling import sample_points, sample_tuples
ctx = AlgebraContext.matrix(3)
core = LinearCore.random(ctx, 1)
f = make_probe(core, PerturbationSpec(delta=0.1, p=0.5, seed=4), ctx)
xs = sample_points(ctx, 100, 1)
t0 = time.perf_counter()
hyers_limit(f, JensenParams(2, 1, 1), ctx, PowerType(0.3, 0.5), xs, 1e-6)
t1 = time.perf_counter()
poly = AlgebraContext.poly()
trip = sample_tuples(poly, 2000, 3, 2)
t2 = time.perf_counter()
for a, b, c in trip:
    poly.triple(a, b, c)
t3 = time.perf_counter()
print(kernels.BACKEND, t1 - t0, t3 - t2)
"""


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = kernels.backends()
    if "cython" not in backends:
        print("compiled extension not built; only the Python backend is available")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<28}" + "".join(f"{name:>14}" for name in backends) + f"{'speedup':>10}")
    for label, fn in cases(rng).items():
        times = {}
        for name, mod in backends.items():
            n = 3 if name == "python" and "poly_mul" in label else 200
            times[name] = min(timeit.repeat(lambda: fn(mod), number=n, repeat=args.repeat)) / n
        speed = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{label:<28}" + "".join(f"{t * 1e6:>12.1f}us" for t in times.values()) + f"{speed:>9.1f}x")
    print()
    print(f"{'end to end':<28}{'hyers_limit x100':>18}{'poly triple x2000':>20}")
    for pure in ("0", "1"):
        env = dict(os.environ, HYERSLAB_PURE_PYTHON=pure)
        out = subprocess.run([sys.executable, "-c", END_TO_END], env=env, capture_output=True, text=True, check=True)
        name, t_lim, t_poly = out.stdout.split()
        print(f"{name:<28}{float(t_lim):>17.3f}s{float(t_poly):>19.3f}s")


if __name__ == "__main__":
    main()
