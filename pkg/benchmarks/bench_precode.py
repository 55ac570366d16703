#!/usr/bin/env python3
"""Times the compiled precoding kernel against the pure-Python fallback.

The feedback recursion is the only part of the chain that cannot be
vectorized, so it dominates Monte-Carlo runtime; everything else in a frame
is FFTs and elementwise numpy. Run after building the extension:

    python benchmarks/bench_precode.py
"""

import time

import numpy as np

from oddm_thp import _precode_py
from oddm_thp.channel import draw_channel, eva_profile
from oddm_thp.core import GridConfig, SeedPlan
from oddm_thp.thp import shifted_tap_gains

try:
    from oddm_thp import _precode_c
except ImportError:
    _precode_c = None


def bench(kernel, x, h_shift, delays, cp_len, k_mod, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        kernel(x, h_shift, delays, cp_len, k_mod)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    plan = SeedPlan(0)
    cases = [
        ("desk 64x16", GridConfig(m_delay=64, n_doppler=16, cp_len=8), 20),
        ("paper 512x64", GridConfig(m_delay=512, n_doppler=64, cp_len=20), 3),
    ]
    print(f"{'grid':>14} {'taps':>5} {'python':>12} {'compiled':>12} {'speedup':>8}")
    for name, grid, repeats in cases:
        rng = plan.stream(0, name)
        ch = draw_channel(eva_profile(), grid, rng)
        x = rng.standard_normal(grid.nm) + 1j * rng.standard_normal(grid.nm)
        h_shift = shifted_tap_gains(ch, grid)
        delays = np.asarray([t.delay_idx for t in ch.taps], dtype=np.int64)

        t_py = bench(_precode_py.precode_kernel, x, h_shift, delays,
                     grid.cp_len, 4.0, repeats)
        if _precode_c is None:
            print(f"{name:>14} {ch.n_paths:>5} {t_py*1e3:>10.2f}ms {'n/a':>12} {'n/a':>8}")
            continue
        t_c = bench(_precode_c.precode_kernel, x, h_shift, delays,
                    grid.cp_len, 4.0, max(repeats * 20, 50))

        # over unstable channels the recursion is chaotic, so the two kernels
        # cannot be compared sample-by-sample; each must satisfy the exact
        # cancellation identity for its own wrap record instead
        for kern in (_precode_py.precode_kernel, _precode_c.precode_kernel):
            x_thp, p, q, _ = kern(x, h_shift, delays, grid.cp_len, 4.0)
            y = np.zeros(grid.nm, dtype=complex)
            for row, l in zip(h_shift, delays):
                y += row * x_thp[grid.cp_len - l: grid.cp_len - l + grid.nm]
            resid = y - h_shift[0] * x + h_shift[0] * (p * 4.0 + 1j * q * 4.0)
            assert np.abs(resid).max() < 1e-9, "kernel violates the identity"

        print(f"{name:>14} {ch.n_paths:>5} {t_py*1e3:>10.2f}ms {t_c*1e3:>10.3f}ms "
              f"{t_py/t_c:>7.0f}x")


if __name__ == "__main__":
    main()
