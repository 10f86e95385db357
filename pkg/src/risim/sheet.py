"""Impenetrable impedance-sheet model of the surface.

The surface is described either by its complex surface impedance Z(y) or by
the surface reflection coefficient Gamma_S(y) that relates reflected to
incident tangential fields at z = 0+. The two are linked by a Moebius
transform that depends on the incidence/reflection pair, and both carry the
same information; most analysis code below works on midpoint samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import OpenBoundaryError, PeriodMismatchError, ResonantDenominatorError
from .waves import ScenarioGeometry, WaveEnvironment

# |Z| substituted where the impedance transform blows up (magnetic wall).
OPEN_BOUNDARY_OHMS = 1e9
_DENOM_TOL = 1e-12


@dataclass(frozen=True)
class SurfaceProfile:
    """Sampled complex surface impedance over the aperture."""

    y: np.ndarray
    z: np.ndarray
    theta_i: float
    theta_r: float

    def __post_init__(self):
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float))
        object.__setattr__(self, "z", np.asarray(self.z, dtype=complex))
        if self.y.shape != self.z.shape:
            raise ValueError("y and z must have identical shapes")
        if not np.all(np.isfinite(self.z.view(float))):
            raise ValueError("impedance samples must be finite")

    def __len__(self):
        return self.y.size

    def z_minus(self, eta0):
        """Z cos(theta_i) - eta0, the numerator branch of Gamma_S."""
        return self.z * math.cos(self.theta_i) - eta0

    def z_plus(self, eta0):
        """Z cos(theta_r) + eta0, the denominator branch of Gamma_S."""
        return self.z * math.cos(self.theta_r) + eta0


@dataclass(frozen=True)
class ReflectionProfile:
    """Sampled surface reflection coefficient Gamma_S over the aperture.

    Gamma_S factors into a correction term Gamma(y) = R(y) e^{j phi(y)} and
    the linear steering phase Phi_S(y) = -k (sin theta_r - sin theta_i) y,
    i.e. Gamma_S = Gamma * exp(j Phi_S).
    """

    y: np.ndarray
    gamma_s: np.ndarray
    theta_i: float
    theta_r: float
    wavenumber: float

    def __post_init__(self):
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float))
        object.__setattr__(self, "gamma_s", np.asarray(self.gamma_s, dtype=complex))
        if self.y.shape != self.gamma_s.shape:
            raise ValueError("y and gamma_s must have identical shapes")

    def __len__(self):
        return self.y.size

    @property
    def geometric_phase(self):
        """Phi_S(y_n), the generalized-reflection steering phase at z = 0+."""
        return -self.wavenumber * (math.sin(self.theta_r) - math.sin(self.theta_i)) * self.y

    @property
    def correction(self):
        """Gamma(y_n) = Gamma_S(y_n) * exp(-j Phi_S(y_n))."""
        return self.gamma_s * np.exp(-1j * self.geometric_phase)

    @property
    def amplitude(self):
        return np.abs(self.correction)

    @property
    def total_phase(self):
        """Psi(y_n) = phi(y_n) + Phi_S(y_n) = angle of Gamma_S."""
        return np.angle(self.gamma_s)

    @property
    def period(self):
        """Steering period P = lambda / |sin theta_i - sin theta_r|."""
        wavelength = 2.0 * math.pi / self.wavenumber
        ds = abs(math.sin(self.theta_i) - math.sin(self.theta_r))
        if ds == 0.0:
            return math.inf
        return wavelength / ds


def impedance_from_gamma(gamma_s, theta_i, theta_r, eta0):
    """Surface impedance from the surface reflection coefficient.

    Z = eta0 * (1 + Gamma_S) / (cos theta_i - Gamma_S cos theta_r)
    """
    gamma_s = np.asarray(gamma_s, dtype=complex)
    den = math.cos(theta_i) - gamma_s * math.cos(theta_r)
    if np.any(np.abs(den) <= _DENOM_TOL):
        raise OpenBoundaryError("cos(theta_i) - Gamma_S cos(theta_r) vanished "
                                "(magnetic-wall limit)")
    out = eta0 * (1.0 + gamma_s) / den
    return out if out.ndim else complex(out)


def gamma_from_impedance(z, theta_i, theta_r, eta0):
    """Surface reflection coefficient from the surface impedance.

    Gamma_S = (Z cos theta_i - eta0) / (Z cos theta_r + eta0)
    """
    z = np.asarray(z, dtype=complex)
    den = z * math.cos(theta_r) + eta0
    if np.any(np.abs(den) <= _DENOM_TOL * eta0):
        raise ResonantDenominatorError("Z cos(theta_r) + eta0 vanished")
    out = (z * math.cos(theta_i) - eta0) / den
    return out if out.ndim else complex(out)


def load_reflection_coefficient(z, theta_i, eta0):
    """Local-specular reflection coefficient (Z cos ti - eta0)/(Z cos ti + eta0).

    |Gamma_load| = 1 exactly when Re(Z) = 0; it equals Gamma_S only for
    specular reflection.
    """
    z = np.asarray(z, dtype=complex)
    den = z * math.cos(theta_i) + eta0
    if np.any(np.abs(den) <= _DENOM_TOL * eta0):
        raise ResonantDenominatorError("Z cos(theta_i) + eta0 vanished")
    out = (z * math.cos(theta_i) - eta0) / den
    return out if out.ndim else complex(out)


def passivity_threshold(z, theta_i, theta_r, eta0):
    """Signed margin whose sign decides whether |Gamma_S| <= 1.

    Returns Re(Z)/|Z|^2 - (cos theta_i - cos theta_r)/(2 eta0); the value is
    >= 0 exactly when |Gamma_S| <= 1. Z = 0 (a perfect electric conductor,
    |Gamma_S| = 1) is reported as +inf margin.
    """
    z = np.asarray(z, dtype=complex)
    bias = (math.cos(theta_i) - math.cos(theta_r)) / (2.0 * eta0)
    mag2 = np.abs(z) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        margin = np.where(mag2 > 0.0, z.real / np.where(mag2 > 0.0, mag2, 1.0) - bias, np.inf)
    return margin if margin.ndim else float(margin)


def go_profile(geom: ScenarioGeometry, env: WaveEnvironment):
    """Generalized geometrical-optics (linear phase-gradient) design.

    Gamma_GO(y) = exp(-j k (sin theta_r - sin theta_i) y); the matching
    impedance follows from the Gamma -> Z transform. Samples where that
    transform degenerates (specular design, Gamma -> 1) are clipped to the
    open-boundary sentinel |Z| = 1e9 ohm instead of raising.
    """
    y = geom.y_samples
    k = env.wavenumber
    gamma = np.exp(-1j * k * (math.sin(geom.theta_r) - math.sin(geom.theta_i)) * y)
    den = math.cos(geom.theta_i) - gamma * math.cos(geom.theta_r)
    num = env.eta0 * (1.0 + gamma)

    small = np.abs(den) < 1e-9
    safe_den = np.where(small, 1.0, den)
    z = num / safe_den
    if np.any(small):
        direction = num * np.conj(den)
        mag = np.abs(direction)
        unit = np.where(mag > 0.0, direction / np.where(mag > 0.0, mag, 1.0), 1j)
        z = np.where(small, OPEN_BOUNDARY_OHMS * unit, z)

    reflection = ReflectionProfile(y=y, gamma_s=gamma, theta_i=geom.theta_i,
                                   theta_r=geom.theta_r, wavenumber=k)
    profile = SurfaceProfile(y=y, z=z, theta_i=geom.theta_i, theta_r=geom.theta_r)
    return reflection, profile


def reflection_from_profile(profile: SurfaceProfile, env: WaveEnvironment):
    """Sample-wise Gamma_S of an impedance profile."""
    gamma = gamma_from_impedance(profile.z, profile.theta_i, profile.theta_r, env.eta0)
    return ReflectionProfile(y=profile.y, gamma_s=np.asarray(gamma, dtype=complex),
                             theta_i=profile.theta_i, theta_r=profile.theta_r,
                             wavenumber=env.wavenumber)


def helmholtz_residual(profile: SurfaceProfile, geom: ScenarioGeometry,
                       env: WaveEnvironment, sine_convention="reflection"):
    """Slow-variation (wave-equation) residual of an impedance profile.

    With f_n = (Z_n^- / Z_n^+) e^{j k (sin tr - sin ti) y_n} and forward
    differences f'_n = (f_{n+1} - f_n)/dy, f''_n = (f'_{n+1} - f'_n)/dy,

        H_n = |f''_n - 2 j k sin(theta) f'_n| / (k^2 |Z_n^-/Z_n^+|)

    for n = 1..N-2. ``sine_convention`` selects the angle in the first-order
    term: "reflection" (default, consistent with the continuous form of the
    constraint) or "incidence" (the discretized variant found alongside the
    sampled formulas; the two differ whenever theta_i != theta_r).
    """
    if len(profile) < 3:
        raise ValueError("need at least three samples")
    eta0 = env.eta0
    k = env.wavenumber
    z_plus = profile.z_plus(eta0)
    if np.any(np.abs(z_plus) < _DENOM_TOL):
        raise ResonantDenominatorError("Z cos(theta_r) + eta0 vanished in residual")
    ratio = profile.z_minus(eta0) / z_plus
    phase = np.exp(1j * k * (math.sin(profile.theta_r) - math.sin(profile.theta_i)) * profile.y)
    f = ratio * phase

    dy = geom.cell_size
    fp = (f[1:] - f[:-1]) / dy
    fpp = (fp[1:] - fp[:-1]) / dy

    if sine_convention == "reflection":
        s = math.sin(profile.theta_r)
    elif sine_convention == "incidence":
        s = math.sin(profile.theta_i)
    else:
        raise ValueError(f"unknown sine_convention {sine_convention!r}")

    numerator = np.abs(fpp - 2j * k * s * fp[:-1])
    return numerator / (k ** 2 * np.abs(ratio[:-2]))


@dataclass(frozen=True)
class FloquetSpectrum:
    """Plane-wave (diffracted-mode) decomposition of a periodic surface."""

    period: float
    orders: np.ndarray          # harmonic indices n
    coefficients: np.ndarray    # Fourier coefficients mu_n of Gamma_S
    tangential_wavenumbers: np.ndarray
    propagating: np.ndarray     # bool per order
    reradiation_angles: np.ndarray  # rad, NaN for evanescent orders

    @property
    def propagating_orders(self):
        return self.orders[self.propagating]

    @property
    def propagating_angles(self):
        return self.reradiation_angles[self.propagating]


def floquet_spectrum(reflection: ReflectionProfile, theta_i_actual,
                     env: WaveEnvironment, n_max=None, period=None):
    """Fourier-analyze one period of Gamma_S into reradiated plane waves.

    The samples must span exactly one steering period P (taken from the
    design pair unless ``period`` overrides it, e.g. for hypothetical
    sub-wavelength configurations). The coefficients are the projections
    mu_n = (1/P) int Gamma_S(y) e^{+j 2 pi n y / P} dy, evaluated with the
    periodic trapezoidal (equal-weight) rule on the midpoint samples. A
    mode of order n has tangential wavenumber
    k_{y,n} = k (sin theta_i_actual + n lambda / P) and propagates when
    k >= |k_{y,n}|, leaving the surface at arctan(k_yn / sqrt(k^2 - k_yn^2)).
    """
    if period is None:
        period = reflection.period
    if not math.isfinite(period):
        raise PeriodMismatchError("specular design pair has no finite period")
    y = reflection.y
    n_samples = y.size
    if n_samples < 2:
        raise PeriodMismatchError("need at least two samples per period")
    dy = (y[-1] - y[0]) / (n_samples - 1)
    span = n_samples * dy
    if abs(span - period) > 0.5 * dy:
        raise PeriodMismatchError(
            f"samples span {span:.6g} m but the period is {period:.6g} m")

    if n_max is None:
        n_max = math.ceil(period / env.wavelength) + 4
    if n_max < math.ceil(period / env.wavelength) + 2:
        raise ValueError("n_max too small to cover the propagating orders")

    orders = np.arange(-n_max, n_max + 1)
    basis = np.exp(2j * math.pi * np.outer(orders, y) / period)
    coefficients = basis @ reflection.gamma_s / n_samples

    k = env.wavenumber
    k_yn = k * (math.sin(theta_i_actual) + orders * env.wavelength / period)
    propagating = k >= np.abs(k_yn)
    kz = np.sqrt(np.maximum(k ** 2 - k_yn ** 2, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        angles = np.where(propagating, np.arctan2(k_yn, kz), np.nan)

    return FloquetSpectrum(period=period, orders=orders, coefficients=coefficients,
                           tangential_wavenumbers=k_yn, propagating=propagating,
                           reradiation_angles=angles)


def admissible_steering_angles(cells_per_wavelength, n_range):
    """Steering angles arcsin(N/n) realizable by an N-cell-per-wavelength grid.

    Only n > N yields a valid angle; other entries are skipped.
    """
    if cells_per_wavelength < 2:
        raise ValueError("need at least two cells per wavelength")
    angles = []
    for n in n_range:
        if n > cells_per_wavelength:
            angles.append(math.asin(cells_per_wavelength / n))
    return angles


def save_profile(path, profile: SurfaceProfile):
    """Write a profile as tabular text: y_m, Re(Z)_ohm, Im(Z)_ohm."""
    header = (f"theta_i_rad={profile.theta_i!r} theta_r_rad={profile.theta_r!r}\n"
              "y_m,re_z_ohm,im_z_ohm")
    data = np.column_stack([profile.y, profile.z.real, profile.z.imag])
    np.savetxt(path, data, delimiter=",", header=header, fmt="%.17g")


def load_profile(path):
    """Read a profile written by :func:`save_profile` (lossless round trip)."""
    with open(path) as fh:
        first = fh.readline()
    meta = {}
    for token in first.lstrip("# ").split():
        key, _, value = token.partition("=")
        meta[key] = float(value)
    data = np.loadtxt(path, delimiter=",", skiprows=2, ndmin=2)
    return SurfaceProfile(y=data[:, 0], z=data[:, 1] + 1j * data[:, 2],
                          theta_i=meta["theta_i_rad"], theta_r=meta["theta_r_rad"])
