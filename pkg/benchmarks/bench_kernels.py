"""JIT vs numpy fallback for the float grid kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--queries 200000]

Each kernel is called once untimed (so numba compilation or cache loading is
excluded), the two paths are checked to agree, then timed.
"""

import argparse
import time

import numpy as np

from solitonlab import kernels as K
from solitonlab._jit import JIT_ENABLED


# output compared between the two paths: d/dx, value, phi
PRIMARY = {"fd6": 0, "hermite_eval": 0, "legendre_points": 1}


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--queries", type=int, default=200_000)
    ap.add_argument("--grid", type=int, default=4097)
    args = ap.parse_args()
    if not JIT_ENABLED:
        print("numba disabled (SOLITONLAB_DISABLE_JIT or missing numba); nothing to compare")
        return

    rng = np.random.default_rng(0)
    x = np.linspace(-30, 30, args.grid)
    u = 2 * np.log(np.cosh(x / 2)) + np.log(2)
    du = np.tanh(x / 2)
    d2 = 0.5 / np.cosh(x / 2) ** 2
    q = rng.uniform(-30, 30, args.queries)
    ys = rng.uniform(-0.999, 0.999, args.queries)
    xf = np.linspace(-30, 30, args.queries)
    hf = xf[1] - xf[0]
    uf = 2 * np.log(np.cosh(xf / 2))

    cases = {
        "fd6": lambda jit: K.fd6(uf, hf, use_jit=jit),
        "hermite_eval": lambda jit: K.hermite_eval(x, u, du, d2, q, use_jit=jit),
        "legendre_points": lambda jit: K.legendre_points(x, u, du, d2, ys, use_jit=jit),
    }
    print(f"{'kernel':<16} {'numpy s':>10} {'jit s':>10} {'speedup':>8}")
    for name, fn in cases.items():
        # sanity check on a well-conditioned output (full agreement is in the tests)
        k = PRIMARY[name]
        a, b = fn(True)[k], fn(False)[k]
        assert np.max(np.abs(a - b)) <= 1e-8, name
        t_np = best_of(lambda: fn(False), args.repeat)
        t_jit = best_of(lambda: fn(True), args.repeat)
        print(f"{name:<16} {t_np:10.4f} {t_jit:10.4f} {t_np / t_jit:8.1f}x")


if __name__ == "__main__":
    main()
