"""Time the numba kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat N]

Sizes mirror the default workloads: one 1000 m window at the default BS
density, a full horizon of MTs, and one DP stage on the 1e-4 storage grid.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from gridcell import kernels


def cases(rng: np.random.Generator):
    side = 1000.0
    bs = rng.uniform(0, side, (500, 2))
    mts = rng.uniform(0, side, (1500, 2))
    serving, _ = kernels.np_torus_nearest(mts, bs, side)
    sub = mts[:200]
    fading = rng.exponential(1.0, (200, 500))
    band = rng.integers(1, 11, 500)
    n = 2001
    j_next = np.sort(rng.uniform(0, 1e-5, n))[::-1].copy()
    raws = np.linspace(0, 0.2, n) - 0.12
    return {
        "torus_nearest (1500 x 500)": ("torus_nearest", (mts, bs, side)),
        "sinr (200 x 500)": ("sinr", (sub, bs, band, serving[:200], fading, 20.0, 4.0, 1e-9, side)),
        "greedy_pairs (500 BSs, L=100)": ("greedy_pairs", (bs, side, 100.0)),
        "dp_stage (2001 grid)": ("dp_stage", (j_next, 0.2 / (n - 1), 0.2, raws, 3e-5)),
    }


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if kernels.nb_dp_stage is None:
        raise SystemExit("numba is not installed; nothing to compare")
    rng = np.random.default_rng(0)
    print(f"{'kernel':32s} {'numpy [ms]':>11s} {'numba [ms]':>11s} {'speed-up':>9s}")
    for label, (name, call_args) in cases(rng).items():
        fn_np = getattr(kernels, f"np_{name}")
        fn_nb = getattr(kernels, f"nb_{name}")
        fn_nb(*call_args)  # compile outside the timed region
        t_np = min(timeit.repeat(lambda: fn_np(*call_args), number=1, repeat=args.repeat)) * 1e3
        t_nb = min(timeit.repeat(lambda: fn_nb(*call_args), number=1, repeat=args.repeat)) * 1e3
        print(f"{label:32s} {t_np:11.2f} {t_nb:11.2f} {t_np / t_nb:8.1f}x")


if __name__ == "__main__":
    main()
