import numpy as np
import pytest

import holobeam as hb
from holobeam.oracles import ObjectiveContext


def cn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_instance(seed, D=2, K=4, M=16, *, mmse=True, w=None):
    """Random channels, unit-modulus phases and beamformers as an ObjectiveContext."""
    rng = np.random.default_rng(seed)
    H = cn(rng, D, M)
    phi = np.exp(-1j * rng.uniform(0, 2 * np.pi, (M, K)))
    V = cn(rng, K, D)
    w = rng.uniform(0, 1, M) if w is None else np.asarray(w, float)
    noise = rng.uniform(0.2, 2.0, D)
    if mmse:
        f = hb.mmse_combiner(hb.compute_gains(H, w, phi, V), noise)
    else:
        f = cn(rng, D)
    m = rng.uniform(0.5, 3.0, D)
    return ObjectiveContext(H, phi, V, f, m, w, noise)


@pytest.fixture
def instance():
    return random_instance


@pytest.fixture(scope="session")
def paper_setup():
    cfg = hb.SystemConfig()
    geom = hb.build_geometry(cfg)
    phi = hb.build_phase_matrix(geom, cfg.k_surface_mag)
    return cfg, geom, phi


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in lines:
        terminalreporter.write_line(line)
