"""Benchmark the hot image kernels: numba JIT vs the pure-numpy fallback.

Run: python3 benchmarks/bench_kernels.py [n]
With OAM_TOMO_DISABLE_NUMBA=1 both columns run the numpy path.
"""

import sys
import time

import numpy as np

from oam_tomo import _kernels
from oam_tomo.fields import default_grid, mode_basis
from oam_tomo.states import PoincareState, amplitudes

N = int(sys.argv[1]) if len(sys.argv) > 1 else 256
REPEATS = 50


def timeit(fn, *args, repeats=REPEATS, warmup=3):
    for _ in range(warmup):
        fn(*args)
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        times.append((time.perf_counter() - start) * 1000)
    return np.mean(times), np.std(times)


grid = default_grid(n=N)
lg_p, lg_m = mode_basis(grid)
c = amplitudes(PoincareState.from_degrees(70.0, 130.0))
img = _kernels.render_intensity_numpy(lg_p, lg_m, c[0], c[1])
cx = cy = N / 2.0

print(f"backend: {_kernels.backend()}   grid: {N}x{N}   repeats: {REPEATS}")
print(f"{'kernel':<18} {'dispatch (ms)':>14} {'numpy (ms)':>12} {'speedup':>8}")

cases = [
    ("render_intensity", _kernels.render_intensity, _kernels.render_intensity_numpy,
     (lg_p, lg_m, c[0], c[1])),
    ("line_sums", _kernels.line_sums, _kernels.line_sums_numpy, (img, cx, cy, 180)),
    ("side_centroids", _kernels.side_centroids, _kernels.side_centroids_numpy,
     (img, cx, cy, 0.8, 0.5)),
]

for name, fast, slow, args in cases:
    t_fast, s_fast = timeit(fast, *args)
    t_slow, s_slow = timeit(slow, *args)
    print(
        f"{name:<18} {t_fast:>9.3f}+-{s_fast:<4.2f} {t_slow:>7.3f}+-{s_slow:<4.2f} "
        f"{t_slow / t_fast:>7.1f}x"
    )

# the dominant end-to-end cost is one full converter scan: 360 orientation
# readouts of one image
scan_args = (img, cx, cy, 90)
t_scan, _ = timeit(_kernels.line_sums, *scan_args, repeats=10)
print(f"\nfull 360-step scan estimate: {360 * t_scan:.0f} ms at n_eta=90")
