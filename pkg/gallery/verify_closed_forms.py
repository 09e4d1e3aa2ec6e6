"""
Checking the closed forms against brute force
=============================================

Every closed-form step has an independent check in ``holobeam.oracles``.
This script runs each one on a random instance.
"""

import dataclasses

import numpy as np

import holobeam as hb
from holobeam.oracles import ObjectiveContext, fd_gradient_oracle, grid_oracle_w, mc_mse_oracle
from holobeam.updates import solve_digital

cfg = hb.SystemConfig(num_users=2, num_feeds=4, rhs_rows=4, rhs_cols=4, noise_vars=(0.5, 0.5))
geom, phi, channels = hb.setup(cfg, seed=3)
state = hb.initialize(cfg, channels, phi, hb.OptimizerSettings(init_mode="uniform-random"))
ctx = ObjectiveContext(channels.channels, phi.phi, state.digital, state.combiners,
                       state.mse_weights, state.holo_weights, np.asarray(cfg.noise_vars))

###############################################################################
# Holographic weights: the projected vertex of the per-element parabola
# against a grid search over [0, 1] with step 1e-4.

worst = 0.0
for m in range(cfg.num_elements):
    a, b = hb.extract_quadratic(channels, phi, ctx.digital, ctx.combiners,
                                ctx.mse_weights, ctx.holo_weights, m)
    closed = hb.update_holo_element(a, b, ctx.holo_weights[m])
    worst = max(worst, abs(closed - grid_oracle_w(ctx, m, 1e-4)))
print(f"w_m closed form vs grid: max difference {worst:.1e}")

###############################################################################
# Combiner: the MSE formula against simulated symbols, and the gradient at
# the MMSE combiner.

g = hb.compute_gains(channels, ctx.holo_weights, phi, ctx.digital)
analytic = hb.mse_per_user(g, ctx.combiners, cfg.noise_vars)
for d in range(cfg.num_users):
    mean, se = mc_mse_oracle(g[d], ctx.combiners[d], cfg.noise_vars[d], 100_000, user=d)
    print(f"user {d}: MSE {analytic[d]:.4f}, simulated {mean:.4f} +/- {se:.4f}")
print("combiner gradient norm:", np.linalg.norm(fd_gradient_oracle(ctx, "combiner")))

###############################################################################
# Precoder: the unscaled solution of the normal equations is a stationary
# point of the weighted sum-MSE.

V = solve_digital(channels, phi, ctx.holo_weights, ctx.combiners, ctx.mse_weights)
grad = fd_gradient_oracle(dataclasses.replace(ctx, digital=V), "precoder")
print("precoder gradient norm:", np.linalg.norm(grad))
