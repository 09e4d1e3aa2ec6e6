"""
Per-iteration cost versus surface size
======================================

One iteration costs O(D K^3 + M D K).  With D and K fixed the time should
grow linearly in M.
"""

import time

import numpy as np

import holobeam as hb

sizes = [(16, 16), (16, 32), (32, 32), (32, 64)]
times = []
for rows, cols in sizes:
    cfg = hb.SystemConfig(num_users=2, num_feeds=4, rhs_rows=rows, rhs_cols=cols,
                          noise_vars=(1.0, 1.0))
    geom, phi, channels = hb.setup(cfg, seed=0)
    settings = hb.OptimizerSettings(tol=1e-300, max_iters=5)
    samples = []
    for _ in range(3):
        start = time.perf_counter()
        _, trace = hb.run(cfg, channels, phi, settings)
        samples.append((time.perf_counter() - start) / trace.iterations_run)
    times.append(np.median(samples))
    print(f"M={rows * cols:5d}: {times[-1] * 1e3:6.2f} ms per iteration")

M = np.array([r * c for r, c in sizes], float)
slope, intercept = np.polyfit(M, times, 1)
print(f"fit: {intercept * 1e3:.2f} ms + {slope * 1e6:.2f} us per element")
