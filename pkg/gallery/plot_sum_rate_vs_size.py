"""
Sum rate versus surface size
============================

The experiment runner does the bookkeeping: seeds, paired channel draws and
aggregation.  Here we build the experiment in code instead of a JSON file.
"""

import dataclasses

import matplotlib.pyplot as plt

import holobeam as hb
from holobeam.experiment import ExperimentSpec, run_experiment

spec = ExperimentSpec(
    base=hb.SystemConfig(),
    sweep="rhs_size",
    grid=((4, 4), (5, 5), (6, 6), (8, 8), (10, 10)),
    snr_db=10.0,
    num_trials=8,
    master_seed=7,
    optimizer=hb.OptimizerSettings(max_iters=60),
)
result = run_experiment(spec)

###############################################################################
# ``aggregates`` gives the mean and standard error per grid point and method.

rows = result.aggregates()
fig, ax = plt.subplots(figsize=(5, 3.5))
for method in ("proposed", "random_w"):
    pts = sorted((r["grid_value"], r["mean_sum_rate"], r["stderr_sum_rate"])
                 for r in rows if r["method"] == method)
    M, mean, se = zip(*pts)
    ax.errorbar(M, mean, yerr=se, marker="o", capsize=2, label=method)
    print(method, [f"{m:.2f}" for m in mean])
ax.set_xlabel("number of elements M")
ax.set_ylabel("sum rate [bit/s/Hz]")
ax.legend()
fig.tight_layout()
plt.show()
