"""Compare the numba and numpy backends on the hot kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each row reports the best wall time over ``--repeat`` runs after one warm-up
call (which also triggers numba compilation), plus the max relative deviation
between the two backends.
"""
import argparse
import time

import numpy as np

from qescape.many_body import OrbitalSet, survival_N_overlap
from qescape.propagator import k_robin
from qescape.special import wofz
from qescape.state import GaussianPacket, evolve_points


def best_of(fn, repeat):
    fn()
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases():
    rng = np.random.default_rng(0)
    z = rng.uniform(-30, 30, 200_000) + 1j * rng.uniform(-5, 30, 200_000)
    x = np.linspace(0, 2, 400)[:, None]
    xp = np.linspace(0, 2, 400)[None, :]
    packet = GaussianPacket(0.6, 0.1)
    xs = np.linspace(0, 1, 200)
    pair = OrbitalSet([(0.3, 0.05), (0.7, 0.05)], "fermion")
    return [
        ("wofz, 2e5 points", lambda b: wofz(z, backend=b)),
        ("k_robin eta=2, 400x400", lambda b: k_robin(2.0, x, xp, 0.3, backend=b)),
        ("k_robin eta=-2, 400x400", lambda b: k_robin(-2.0, x, xp, 5.0, backend=b)),
        ("evolve 200 pts, t=0.02", lambda b: evolve_points(packet, 2.0, 0.02, xs, backend=b)[0]),
        ("P2 fermions eta=2, t=1", lambda b: np.array(survival_N_overlap(pair, 2.0, 1.0, backend=b))),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    print(f"{'case':28} {'numba [s]':>10} {'numpy [s]':>10} {'speedup':>8} {'max rel diff':>12}")
    for name, fn in cases():
        t_nb, a = best_of(lambda: fn("numba"), args.repeat)
        t_np, b = best_of(lambda: fn("numpy"), args.repeat)
        a, b = np.asarray(a), np.asarray(b)
        diff = float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))
        print(f"{name:28} {t_nb:10.4f} {t_np:10.4f} {t_np / t_nb:8.1f} {diff:12.1e}")


if __name__ == "__main__":
    main()
