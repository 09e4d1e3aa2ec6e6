"""
Sum rate versus SNR for two surface sizes
=========================================

Compares the proposed design with random holographic weights (whose
digital precoder is still optimised) for M = 25 and M = 64 elements.  Both
methods see the same channel draws.
"""

import dataclasses

import matplotlib.pyplot as plt
import numpy as np

import holobeam as hb
from holobeam.experiment import derive_seed, snr_to_noise_var
from holobeam.oracles import random_w_baseline

snrs = [-10, 0, 10, 20]
trials = 10
results = {}

for rows in (5, 8):
    base = hb.SystemConfig(rhs_rows=rows, rhs_cols=rows)
    geom, phi, _ = hb.setup(base)
    for snr in snrs:
        cfg = dataclasses.replace(base, noise_vars=(snr_to_noise_var(snr),) * 3)
        prop, rand = [], []
        for t in range(trials):
            ch = hb.generate_channels(cfg, geom, seed=derive_seed(1, t))
            _, trace = hb.run(cfg, ch, phi, hb.OptimizerSettings(seed=t))
            prop.append(trace.final_sum_rate)
            rand.append(random_w_baseline(cfg, ch, phi, seed=t)[1])
        results[rows * rows, snr] = np.mean(prop), np.mean(rand)
        print(f"M={rows * rows:3d} SNR={snr:4d} dB  proposed {np.mean(prop):6.2f}  "
              f"random W {np.mean(rand):6.2f}")

###############################################################################
# Larger surfaces help, and the optimised holographic weights beat random
# ones at every SNR.

fig, ax = plt.subplots(figsize=(5, 3.5))
for M, style in [(25, "-"), (64, "--")]:
    ax.plot(snrs, [results[M, s][0] for s in snrs], "o" + style, label=f"proposed, M={M}")
    ax.plot(snrs, [results[M, s][1] for s in snrs], "s" + style, label=f"random W, M={M}")
ax.set_xlabel("SNR [dB]")
ax.set_ylabel("sum rate [bit/s/Hz]")
ax.legend()
fig.tight_layout()
plt.show()
