"""Timing comparison of the numba and numpy kernel backends.

Run:  python benchmarks/bench_backends.py  [--repeat N]

Covers the hot paths: theta log-derivative evaluation over large arrays,
Bethe residual/Jacobian assembly at continuation scale (M = 150), a full
Newton solve, and a batch of multi-start attempts at three-spin scale.
"""

import argparse
import time

import numpy as np

from xyzgaudin import elliptic
from xyzgaudin import kernels_numba as knb
from xyzgaudin import kernels_numpy as knp


def timer(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    ctx = elliptic.make_context(0.5)
    twoK, Kp, q = ctx.two_K, ctx.Kprime, ctx.q
    rng = np.random.default_rng(0)

    u = (rng.uniform(0.05, twoK - 0.05, 20000)
         + 1j * rng.uniform(-Kp / 2, Kp / 2, 20000))

    N = 300
    a, b = 0.2, 0.6
    z = np.concatenate([[0.0], a + (np.arange(2, N + 1) - 2) / (N - 2) * (b - a)])
    s = np.full(N, 0.5)
    M = N // 2
    roots = (2.09 + rng.normal(0, 1e-3, M)
             + 1j * np.linspace(-0.95, 0.95, M) * Kp / 2)
    roots[0] = 0.011 + 0j

    z3 = np.array([0.0, 0.2, 0.4])
    s3 = np.array([0.5, 1.0, 1.5])
    starts3 = (rng.uniform(0.05, twoK - 0.05, (2048, 3))
               + 1j * rng.uniform(-Kp / 2, Kp / 2, (2048, 3)))

    cases = [
        ("phi_sum, 20k points",
         lambda K: K.phi_sum(u, twoK, Kp, q)),
        ("residual, M=150",
         lambda K: K.residual(roots, z, s, 0, twoK, Kp, q)),
        ("jacobian, M=150",
         lambda K: K.jacobian(roots, z, s, twoK, Kp, q)),
        ("newton solve, M=150",
         lambda K: K.newton(roots, z, s, 0, twoK, Kp, q, 1e-11, 50, 1e-8)),
        ("2048 multi-start attempts, M=3",
         lambda K: K.newton_batch(starts3, z3, s3, 0, twoK, Kp, q,
                                  1e-11, 30, 1e-8, 8)),
    ]

    # warm up the JIT so compilation is not timed
    for _, fn in cases:
        fn(knb)

    print(f"{'case':38s} {'numpy':>10s} {'numba':>10s} {'speedup':>8s}")
    for name, fn in cases:
        t_np = timer(lambda: fn(knp), args.repeat)
        t_nb = timer(lambda: fn(knb), args.repeat)
        print(f"{name:38s} {t_np * 1e3:9.2f}ms {t_nb * 1e3:9.2f}ms "
              f"{t_np / t_nb:7.1f}x")


if __name__ == "__main__":
    main()
