"""Time the numba kernels against their numpy fallbacks.

Run ``python benchmarks/bench_kernels.py``. Each kernel is called once to
compile (numba) before timing; both paths must agree before a time is
reported.
"""
import argparse
import math
import time

import numpy as np

from lattc import kernels
from lattc.lattice import named_lattice


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def bench_enumeration(name, radius, repeat):
    lat = named_lattice(name)
    q = kernels.pohst_factor(lat.gram)
    r2 = radius * radius
    kernels._enumerate_ball_numba(q, r2)  # compile
    t_nb, a = best_of(lambda: kernels._enumerate_ball_numba(q, r2), repeat)
    t_np, b = best_of(lambda: kernels._enumerate_ball_numpy(q, r2), repeat)
    key = lambda c: sorted(map(tuple, c.tolist()))  # noqa: E731
    assert key(a) == key(b), "enumeration backends disagree"
    return f"enumerate {name} R={radius}", len(a), t_nb, t_np


def bench_sequence(N, x, n_max, repeat):
    pts = np.sort(np.random.default_rng(0).uniform(0, N, N))
    kappa = -math.log1p(-x)
    kernels._seq_exp_over_r_numba(pts, N, kappa, n_max, 1e-12)
    t_nb, a = best_of(lambda: kernels._seq_exp_over_r_numba(pts, N, kappa, n_max, 1e-12), repeat)
    t_np, b = best_of(lambda: kernels._seq_exp_over_r_numpy(pts, N, kappa, n_max, 1e-12), repeat)
    assert abs(a[0] - b[0]) <= 1e-12 * abs(a[0]), "sequence backends disagree"
    return f"seq exp/r N={N} n_max={n_max}", N * N * (2 * n_max + 1), t_nb, t_np


def bench_gamma(N, x, n_max, repeat):
    pts = np.sort(np.random.default_rng(1).uniform(0, N, N))
    logx = math.log(x)
    kernels._seq_power_over_gamma_numba(pts, N, logx, n_max)
    t_nb, a = best_of(lambda: kernels._seq_power_over_gamma_numba(pts, N, logx, n_max), repeat)
    t_np, b = best_of(lambda: kernels._seq_power_over_gamma_numpy(pts, N, logx, n_max), repeat)
    assert abs(a - b) <= 1e-12 * abs(a), "gamma-sum backends disagree"
    return f"seq x^r/G N={N} n_max={n_max}", N * N * (2 * n_max + 1), t_nb, t_np


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="small sizes only")
    args = ap.parse_args()
    s = 0.5 if args.quick else 1.0
    cases = [
        lambda: bench_enumeration("zd:2", 60 * s, args.repeat),
        lambda: bench_enumeration("triangular", 60 * s, args.repeat),
        lambda: bench_enumeration("zd:3", 14 * s, args.repeat),
        lambda: bench_enumeration("e8", 2.6 if args.quick else 3.0, args.repeat),
        lambda: bench_sequence(16, 0.3, int(200 * s), args.repeat),
        lambda: bench_gamma(16, 2.0, int(20 * s), args.repeat),
    ]
    print(f"{'case':36s} {'size':>10s} {'numba s':>10s} {'numpy s':>10s} {'speedup':>8s}")
    for case in cases:
        label, size, t_nb, t_np = case()
        print(f"{label:36s} {size:10d} {t_nb:10.4f} {t_np:10.4f} {t_np / t_nb:8.1f}")


if __name__ == "__main__":
    main()
