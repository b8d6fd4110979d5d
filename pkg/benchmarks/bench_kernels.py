"""Time each hot kernel under numba and pure numpy on realistic inputs.

    python benchmarks/bench_kernels.py [--repeat N]

Numba timings exclude the first (compiling) call. Outputs of the two
flavours are checked for equality before timing.
"""

import argparse
import math
import time

import numpy as np

from gridlock import kernels
from gridlock._accel import HAS_NUMBA
from gridlock.metrics.teds import _TD, _flatten
from gridlock.metrics.tree import structure_to_tree
from gridlock.synth import SynthParams, gen_table


def best_of(fn, args, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t)
    return min(times)


def cases():
    item = gen_table(SynthParams(seed=7, skew_deg=2.0))
    gray = item.raster.pixels
    bits = kernels.mean_threshold_np(gray, 31, 10)
    ys, xs = np.nonzero(bits)
    xs_c = xs.astype(np.float64) - gray.shape[1] / 2.0
    tans = np.tan(np.radians(np.arange(-45.0, 45.5, 1.0)))
    h, w = gray.shape
    t = math.radians(3.0)
    c, s = math.cos(t), math.sin(t)
    nw = int(math.ceil(w * abs(c) + h * abs(s)))
    nh = int(math.ceil(w * abs(s) + h * abs(c)))

    big = gen_table(SynthParams(seed=11, max_rows=12, max_cols=8)).truth
    fa = _flatten(structure_to_tree(big, True))
    fb = _flatten(structure_to_tree(gen_table(SynthParams(seed=12)).truth, True))
    relabel_args = (fa[2], fa[3], fa[4], fa[5], fa[6], fb[2], fb[3], fb[4], fb[5], fb[6], _TD)
    rel = kernels.relabel_costs_np(*relabel_args)
    return [
        ("mean_threshold", (gray, 31, 10)),
        ("erode", (bits, 1, 51)),
        ("dilate", (bits, 1, 51)),
        ("component_stats", (bits,)),
        ("shear_variances", (ys.astype(np.float64), xs_c, tans, h + w + 2, w / 2.0 + 1)),
        ("rotate_bilinear", (gray, nh, nw, c, s)),
        ("relabel_costs", relabel_args),
        ("zhang_shasha", (fa[0], fa[1], fb[0], fb[1], rel)),
    ]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not HAS_NUMBA:
        print("numba unavailable (or GRIDLOCK_NUMBA=0); timing numpy only")
    print(f"{'kernel':<18}{'numpy ms':>10}{'numba ms':>10}{'speedup':>9}")
    for name, a in cases():
        f_np = getattr(kernels, name + "_np")
        t_np = best_of(f_np, a, args.repeat) * 1e3
        if HAS_NUMBA:
            f_nb = getattr(kernels, name + "_nb")
            r_nb, r_np = f_nb(*a), f_np(*a)
            if not np.array_equal(np.asarray(r_nb), np.asarray(r_np)):
                ok = np.allclose(np.asarray(r_nb), np.asarray(r_np), rtol=1e-9, atol=1e-9)
                if not ok:
                    raise SystemExit(f"{name}: numba and numpy disagree")
            t_nb = best_of(f_nb, a, args.repeat) * 1e3
            print(f"{name:<18}{t_np:>10.2f}{t_nb:>10.2f}{t_np / t_nb:>8.1f}x")
        else:
            print(f"{name:<18}{t_np:>10.2f}{'-':>10}{'-':>9}")


if __name__ == "__main__":
    main()
