"""Surface geometry, reference-wave phases and pathwise mmWave channels.

The holographic surface is a planar grid of ``rows x cols`` radiating
elements in the z = 0 plane, centred at the origin, with broadside along
+z.  The ``K`` waveguide feeds sit one element spacing below the grid's
lower edge, spread uniformly along x.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0
MAX_ELEMENTS = 10_000_000

__all__ = [
    "ConfigError",
    "SystemConfig",
    "RhsGeometry",
    "PhaseMatrix",
    "ChannelSet",
    "build_geometry",
    "build_phase_matrix",
    "steering_vector",
    "pathwise_channel",
    "generate_channels",
]


class ConfigError(ValueError):
    """Invalid scenario parameter. ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def _default_spacing() -> float:
    return 0.01 / 4  # lambda/4 at 30 GHz, lambda rounded to 1 cm


@dataclass(frozen=True)
class SystemConfig:
    """All scalar parameters of one downlink scenario.

    Defaults reproduce the simulation setup: 3 users, 6 feeds, a 5x5
    surface at 30 GHz with quarter-wavelength spacing, 5 propagation paths,
    unit transmit power and 0 dB SNR.
    """

    num_users: int = 3
    num_feeds: int = 6
    rhs_rows: int = 5
    rhs_cols: int = 5
    carrier_freq_hz: float = 30e9
    element_spacing_m: float = field(default_factory=_default_spacing)
    k_free_mag: float = 200 * math.pi
    k_surface_mag: float = 200 * math.sqrt(3) * math.pi
    noise_vars: tuple[float, ...] | None = None
    power_budget: float = 1.0
    num_paths: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.noise_vars is None:
            object.__setattr__(self, "noise_vars", (1.0,) * int(self.num_users))
        else:
            object.__setattr__(
                self, "noise_vars", tuple(float(x) for x in self.noise_vars)
            )
        self.validate()

    @property
    def num_elements(self) -> int:
        return self.rhs_rows * self.rhs_cols

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_freq_hz

    def validate(self):
        for name in ("num_users", "num_feeds", "rhs_rows", "rhs_cols", "num_paths"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise ConfigError(name, f"expected an integer, got {value!r}")
            if value < 1:
                raise ConfigError(name, f"must be a positive integer, got {value}")
        if self.rhs_rows * self.rhs_cols > MAX_ELEMENTS:
            raise ConfigError(
                "rhs_rows", f"rhs_rows*rhs_cols exceeds {MAX_ELEMENTS} elements"
            )
        if self.num_feeds < self.num_users:
            raise ConfigError(
                "num_feeds",
                f"need num_feeds >= num_users, got K={self.num_feeds} < D={self.num_users}",
            )
        for name in (
            "carrier_freq_hz",
            "element_spacing_m",
            "k_free_mag",
            "k_surface_mag",
            "power_budget",
        ):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ConfigError(name, f"must be a finite positive number, got {value}")
        if self.k_surface_mag < self.k_free_mag:
            raise ConfigError(
                "k_surface_mag",
                "surface wave number must not be below the free-space one",
            )
        if len(self.noise_vars) != self.num_users:
            raise ConfigError(
                "noise_vars",
                f"expected {self.num_users} entries, got {len(self.noise_vars)}",
            )
        if not all(math.isfinite(s) and s > 0 for s in self.noise_vars):
            raise ConfigError("noise_vars", "all noise variances must be positive")
        if not (0 <= int(self.seed) < 2**64):
            raise ConfigError("seed", "must fit in an unsigned 64-bit integer")


@dataclass(frozen=True)
class RhsGeometry:
    element_positions: np.ndarray  # (M, 3) metres
    feed_positions: np.ndarray  # (K, 3) metres

    @property
    def num_elements(self) -> int:
        return self.element_positions.shape[0]

    @property
    def num_feeds(self) -> int:
        return self.feed_positions.shape[0]

    def feed_distances(self) -> np.ndarray:
        """(M, K) Euclidean distances from every feed to every element."""
        diff = self.element_positions[:, None, :] - self.feed_positions[None, :, :]
        return np.linalg.norm(diff, axis=-1)


@dataclass(frozen=True)
class PhaseMatrix:
    phi: np.ndarray  # (M, K) complex, unit modulus


@dataclass(frozen=True)
class ChannelSet:
    channels: np.ndarray  # (D, M) complex; row d is h_d
    seed_used: int

    @property
    def num_users(self) -> int:
        return self.channels.shape[0]


def build_geometry(config: SystemConfig) -> RhsGeometry:
    """Lay out the element grid and the feed row for ``config``."""
    config.validate()
    rows, cols, dx = config.rhs_rows, config.rhs_cols, config.element_spacing_m
    xs = (np.arange(cols) - (cols - 1) / 2) * dx
    ys = (np.arange(rows) - (rows - 1) / 2) * dx
    gx, gy = np.meshgrid(xs, ys)  # row-major: element index = r*cols + c
    elements = np.column_stack([gx.ravel(), gy.ravel(), np.zeros(rows * cols)])

    k = config.num_feeds
    if k == 1:
        feed_x = np.zeros(1)
    else:
        feed_x = np.linspace(xs[0], xs[-1], k) if cols > 1 else (
            (np.arange(k) - (k - 1) / 2) * dx
        )
    feed_y = np.full(k, ys[0] - dx)
    feeds = np.column_stack([feed_x, feed_y, np.zeros(k)])
    return RhsGeometry(element_positions=elements, feed_positions=feeds)


def build_phase_matrix(geom: RhsGeometry, k_surface_mag: float) -> PhaseMatrix:
    """Reference-wave phases ``exp(-j |k_s| r)`` from every feed to every element."""
    r = geom.feed_distances()
    if np.any(r <= 0):
        raise ValueError("a feed coincides with a radiating element")
    return PhaseMatrix(phi=np.exp(-1j * k_surface_mag * r))


def _direction(azimuth, elevation):
    """Unit propagation vectors; (0, 0) is broadside (+z)."""
    azimuth = np.asarray(azimuth, dtype=float)
    elevation = np.asarray(elevation, dtype=float)
    return np.stack(
        [
            np.cos(elevation) * np.sin(azimuth),
            np.sin(elevation),
            np.cos(elevation) * np.cos(azimuth),
        ],
        axis=-1,
    )


def steering_vector(positions: np.ndarray, azimuth, elevation, k_free_mag: float):
    """UPA response ``exp(+j k_f p_m . u(az, el))``.

    Scalar angles give an (M,) vector; angle arrays of shape S give
    an array of shape S + (M,).
    """
    u = _direction(azimuth, elevation)
    return np.exp(1j * k_free_mag * (u @ positions.T))


def pathwise_channel(positions, path_gains, azimuth, elevation, k_free_mag):
    """Sum of ``I`` plane waves, normalised by ``sqrt(1/I)``.

    ``path_gains``, ``azimuth`` and ``elevation`` have shape (D, I); the
    result is (D, M).
    """
    path_gains = np.atleast_2d(path_gains)
    num_paths = path_gains.shape[-1]
    if num_paths == 0:
        raise ValueError("at least one propagation path is required")
    a = steering_vector(positions, np.atleast_2d(azimuth), np.atleast_2d(elevation), k_free_mag)
    return np.einsum("di,dim->dm", path_gains, a) / np.sqrt(num_paths)


def generate_channels(
    config: SystemConfig, geom: RhsGeometry, seed: int | None = None
) -> ChannelSet:
    """Draw one channel realisation per user.

    Path parameters are drawn before anything that depends on the surface
    size, so the same seed yields the same physical paths for different M.
    """
    if config.num_paths < 1:
        raise ValueError("num_paths must be >= 1")
    if geom.num_elements != config.num_elements:
        raise ValueError(
            f"geometry has {geom.num_elements} elements, config expects {config.num_elements}"
        )
    seed = int(config.seed if seed is None else seed)
    rng = np.random.default_rng(seed)
    shape = (config.num_users, config.num_paths)
    gains = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
    azimuth = rng.uniform(-np.pi / 2, np.pi / 2, shape)
    elevation = rng.uniform(-np.pi / 2, np.pi / 2, shape)
    h = pathwise_channel(geom.element_positions, gains, azimuth, elevation, config.k_free_mag)
    return ChannelSet(channels=h, seed_used=seed)
