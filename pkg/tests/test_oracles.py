import dataclasses

import numpy as np
import pytest

import holobeam as hb
from holobeam.oracles import (
    ObjectiveContext,
    compare,
    fd_gradient_oracle,
    grid_oracle_w,
    mc_mse_oracle,
    random_w_baseline,
)

from conftest import random_instance


def _scalar_context(f):
    one = np.ones((1, 1), complex)
    return ObjectiveContext(one, one, one, np.array([f]), np.array([1.0]), np.array([0.3]),
                            np.array([1.0]))


def test_grid_oracle_interior_optimum():
    assert grid_oracle_w(_scalar_context(2.0), 0, 1e-4) == pytest.approx(0.5, abs=1e-4)


def test_grid_oracle_boundary_optimum():
    assert grid_oracle_w(_scalar_context(-1.0), 0, 1e-4) == 0.0


def test_grid_oracle_rejects_bad_step():
    with pytest.raises(ValueError):
        grid_oracle_w(_scalar_context(1.0), 0, 0.5)


@pytest.mark.parametrize("seed", range(20))
def test_grid_oracle_agrees_with_closed_form(seed):
    ctx = random_instance(seed, D=2, K=4, M=16)
    m = seed % 16
    a, b = hb.extract_quadratic(ctx.channels, ctx.phi, ctx.digital, ctx.combiners,
                                ctx.mse_weights, ctx.holo_weights, m)
    closed = hb.update_holo_element(a, b, ctx.holo_weights[m])
    assert abs(grid_oracle_w(ctx, m, 1e-4) - closed) <= 1e-4 + 1e-9


def test_mc_oracle_trivial_cases():
    mean, se = mc_mse_oracle(np.array([0.7 + 0.1j, 0.2j]), 0.0, 0.5, 100_000, user=0, seed=1)
    assert abs(mean - 1) <= 3 * se
    mean, se = mc_mse_oracle(np.zeros(2), 1.0, 0.5, 100_000, user=1, seed=2)
    assert abs(mean - 1.5) <= 3 * se
    with pytest.raises(ValueError):
        mc_mse_oracle(np.zeros(2), 1.0, 0.5, 100, user=0)


def test_fd_combiner_gradient_vanishes_at_mmse():
    ctx = random_instance(3, D=3)
    grad = fd_gradient_oracle(ctx, "combiner", 1e-6)
    assert grad.shape == (3, 2)
    assert np.all(np.linalg.norm(grad, axis=1) <= 1e-6 * (1 + abs(ctx.objective())))


def test_fd_gradient_nonzero_away_from_optimum():
    ctx = random_instance(3, D=3, mmse=False)
    assert np.linalg.norm(fd_gradient_oracle(ctx, "combiner", 1e-6)) > 1e-3


def test_fd_w_derivative_at_vertex():
    ctx = random_instance(5, D=2, K=4, M=16)
    for m in range(16):
        a, b = hb.extract_quadratic(ctx.channels, ctx.phi, ctx.digital, ctx.combiners,
                                    ctx.mse_weights, ctx.holo_weights, m)
        w = ctx.holo_weights.copy()
        w[m] = b / a
        deriv = fd_gradient_oracle(dataclasses.replace(ctx, holo_weights=w), ("w", m), 1e-6)
        assert abs(deriv) <= 1e-6 * (1 + a)


def test_fd_rejects_unknown_selector():
    with pytest.raises(ValueError):
        fd_gradient_oracle(random_instance(0), "phase", 1e-6)


def test_random_baseline_reproducible_and_feasible():
    cfg = hb.SystemConfig(noise_vars=(0.1,) * 3)
    _, phi, ch = hb.setup(cfg, seed=4)
    s1, r1 = random_w_baseline(cfg, ch, phi, seed=8)
    s2, r2 = random_w_baseline(cfg, ch, phi, seed=8)
    assert r1 == r2 and r1 > 0
    assert np.array_equal(s1.holo_weights, s2.holo_weights)
    assert abs(hb.transmit_power(s1.holo_weights, phi, s1.digital) - 1) <= 1e-9


def test_random_baseline_zero_channels():
    cfg = hb.SystemConfig()
    _, phi, ch = hb.setup(cfg, seed=0)
    _, rate = random_w_baseline(cfg, hb.ChannelSet(np.zeros_like(ch.channels), 0), phi, seed=1)
    assert rate == 0.0


def test_compare_reports_worst_location():
    rep = compare(np.array([[0, 1], [2, 3.5]]), np.array([[0, 1], [2, 3]]))
    assert rep.max_abs_discrepancy == 0.5
    assert rep.location == "(1, 1)"
    assert rep.samples_checked == 4
    assert rep.to_dict()["samples_checked"] == 4
