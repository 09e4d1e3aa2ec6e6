"""MMSE-based hybrid holographic beamforming for sum-rate maximisation."""
from .geometry import (
    ChannelSet,
    ConfigError,
    PhaseMatrix,
    RhsGeometry,
    SystemConfig,
    build_geometry,
    build_phase_matrix,
    generate_channels,
    steering_vector,
)
from .mse import (
    BeamformingState,
    compute_gains,
    effective_matrix,
    mmse_combiner,
    mse_per_user,
    mse_weights,
    sum_rate,
    transmit_power,
    weighted_sum_mse,
)
from .optimizer import InitMode, OptimizerSettings, RunTrace, initialize, run
from .updates import (
    QuadraticCoeffs,
    SingularSystemError,
    extract_quadratic,
    update_digital,
    update_holo_all,
    update_holo_element,
)

__version__ = "0.1.0"


def setup(config: SystemConfig | None = None, seed: int | None = None):
    """Geometry, phase matrix and one channel draw for ``config``."""
    config = config or SystemConfig()
    geom = build_geometry(config)
    phi = build_phase_matrix(geom, config.k_surface_mag)
    return geom, phi, generate_channels(config, geom, seed=seed)
