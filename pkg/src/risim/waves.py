"""Wave environment and scenario geometry shared by every model.

Conventions: time dependency exp(+j*omega*t), angles stored in radians,
the surface lies in the xy-plane centered at the origin, and incident /
reflected waves propagate in the yz-plane (azimuths fixed at pi/2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Exact vacuum constants (SI).
SPEED_OF_LIGHT = 299_792_458.0
MU_0 = 1.25663706212e-6
EPSILON_0 = 8.8541878128e-12
ETA_0 = math.sqrt(MU_0 / EPSILON_0)  # ~376.730 ohm

# Rounded textbook values, used by the benchmark desk setup so that the
# published reference numbers are reproduced digit for digit.
SPEED_OF_LIGHT_ROUNDED = 3.0e8
ETA_0_ROUNDED = 377.0


@dataclass(frozen=True)
class WaveEnvironment:
    """Monochromatic plane-wave environment.

    Attributes
    ----------
    frequency : carrier frequency f in Hz
    wavelength : lambda = c/f in m
    wavenumber : k = 2*pi/lambda in rad/m
    eta0 : free-space impedance in ohm
    e_inc : incident field amplitude |E^i_x0| in V/m
    p_inc : incident power density P0 in W/m^2
    """

    frequency: float
    wavelength: float
    wavenumber: float
    eta0: float
    e_inc: float
    p_inc: float

    def __post_init__(self):
        for name in ("frequency", "wavelength", "wavenumber", "eta0", "e_inc", "p_inc"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be strictly positive")

    @classmethod
    def from_frequency(cls, frequency, p_inc=1.0, eta0=ETA_0, c=SPEED_OF_LIGHT):
        """Build the environment from f and incident power density.

        ``c`` defaults to the exact vacuum value; pass a rounded value
        (e.g. 3e8) to reproduce published tables that were computed with
        textbook constants.
        """
        wavelength = c / frequency
        return cls(
            frequency=frequency,
            wavelength=wavelength,
            wavenumber=2.0 * math.pi / wavelength,
            eta0=eta0,
            e_inc=math.sqrt(2.0 * p_inc * eta0),
            p_inc=p_inc,
        )

    @property
    def omega(self):
        return 2.0 * math.pi * self.frequency


@dataclass(frozen=True)
class ScenarioGeometry:
    """Aperture, sampling grid and link angles of one scenario.

    The surface spans [-L_x, L_x] x [-L_y, L_y]; impedance samples sit at
    the midpoints y_n = -L_y - dy/2 + n*dy, n = 1..N, so N*dy == 2*L_y
    holds exactly by construction.
    """

    theta_i: float
    theta_r: float
    half_length_x: float
    half_length_y: float
    cell_size: float
    n_cells: int
    r_rx: float
    r_obs: float
    phi_i: float = field(default=math.pi / 2)
    phi_r: float = field(default=math.pi / 2)

    def __post_init__(self):
        if not (0.0 <= self.theta_i < math.pi / 2 and 0.0 <= self.theta_r < math.pi / 2):
            raise ValueError("elevation angles must lie in [0, pi/2)")
        if self.n_cells < 1:
            raise ValueError("need at least one cell")
        if abs(self.n_cells * self.cell_size - 2.0 * self.half_length_y) > 1e-9 * 2.0 * self.half_length_y:
            raise ValueError("N * delta_y must equal 2*L_y")
        if self.n_cells != round(2.0 * self.half_length_y / self.cell_size):
            raise ValueError("N must be round(2*L_y / delta_y)")

    @classmethod
    def from_cell_size(cls, theta_i, theta_r, half_length_x, half_length_y, cell_size,
                       r_rx=100.0, r_obs=None):
        """Snap the aperture to a whole number of cells of size ``cell_size``.

        The stored half-length is N*cell_size/2 with N = round(2*L_y/cell_size),
        which keeps the midpoint grid symmetric and the sampling step exact.
        """
        n_cells = max(1, round(2.0 * half_length_y / cell_size))
        return cls(
            theta_i=theta_i,
            theta_r=theta_r,
            half_length_x=half_length_x,
            half_length_y=0.5 * n_cells * cell_size,
            cell_size=cell_size,
            n_cells=n_cells,
            r_rx=r_rx,
            r_obs=r_obs if r_obs is not None else r_rx,
        )

    @classmethod
    def from_cell_count(cls, theta_i, theta_r, half_length_x, half_length_y, n_cells,
                        r_rx=100.0, r_obs=None):
        return cls(
            theta_i=theta_i,
            theta_r=theta_r,
            half_length_x=half_length_x,
            half_length_y=half_length_y,
            cell_size=2.0 * half_length_y / n_cells,
            n_cells=n_cells,
            r_rx=r_rx,
            r_obs=r_obs if r_obs is not None else r_rx,
        )

    @property
    def y_samples(self):
        """Midpoint abscissae of the N cells, symmetric about y = 0."""
        n = np.arange(1, self.n_cells + 1, dtype=float)
        return -self.half_length_y - 0.5 * self.cell_size + n * self.cell_size


def wavevector(env: WaveEnvironment, theta, direction="incident"):
    """Wavevector of a plane wave in the yz-plane at elevation ``theta``.

    ``incident`` waves travel toward the surface (negative z component),
    ``reflected`` waves away from it. The magnitude is always k.
    """
    k = env.wavenumber
    if direction == "incident":
        return np.array([0.0, k * math.sin(theta), -k * math.cos(theta)])
    if direction == "reflected":
        return np.array([0.0, k * math.sin(theta), k * math.cos(theta)])
    raise ValueError(f"unknown direction {direction!r}")


def fraunhofer_distance(geom: ScenarioGeometry, env: WaveEnvironment):
    """Far-field threshold 8*(L_x^2 + L_y^2)/lambda of the aperture."""
    return 8.0 * (geom.half_length_x ** 2 + geom.half_length_y ** 2) / env.wavelength


def reference_environment():
    """Benchmark 28 GHz desk-scale environment (textbook rounded constants)."""
    return WaveEnvironment.from_frequency(
        28e9, p_inc=1.0, eta0=ETA_0_ROUNDED, c=SPEED_OF_LIGHT_ROUNDED
    )


def reference_geometry(theta_r_deg=30.0, theta_i_deg=0.0, env=None):
    """Benchmark geometry: 1 m x 0.5 m aperture sampled at lambda/32, Rx at 100 m."""
    if env is None:
        env = reference_environment()
    return ScenarioGeometry.from_cell_size(
        theta_i=math.radians(theta_i_deg),
        theta_r=math.radians(theta_r_deg),
        half_length_x=0.5,
        half_length_y=0.25,
        cell_size=env.wavelength / 32.0,
        r_rx=100.0,
    )
