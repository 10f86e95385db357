"""Power bookkeeping: surface Poynting flow, far-field flux, patterns, SINR.

Sign convention: the local surface flow P_S(y) is the z-component of the
time-averaged Poynting vector of the total tangential fields at z = 0+, so
P_S < 0 means the boundary absorbs (locally passive) and P_S > 0 means it
emits more than it receives (locally active). dB values are 10*log10 of the
flux in W/m^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ResonantDenominatorError
from .sheet import ReflectionProfile, SurfaceProfile, gamma_from_impedance, reflection_from_profile
from .waves import ScenarioGeometry, WaveEnvironment

_REACTIVE_RTOL = 1e-9


def local_flow_gamma(gamma_s, theta_i, theta_r, env: WaveEnvironment):
    """Normalized and absolute local power flow from Gamma_S.

    S = |Gamma_S|^2 cos tr - cos ti + Re(Gamma_S) (cos tr - cos ti)
    P = |E^i|^2 S / (2 eta0)
    """
    gamma_s = np.asarray(gamma_s, dtype=complex)
    ci, cr = math.cos(theta_i), math.cos(theta_r)
    s = np.abs(gamma_s) ** 2 * cr - ci + gamma_s.real * (cr - ci)
    p = env.e_inc ** 2 * s / (2.0 * env.eta0)
    if s.ndim:
        return s, p
    return float(s), float(p)


def local_flow_impedance(z, theta_i, theta_r, env: WaveEnvironment):
    """Local power flow from the surface impedance (equivalent form).

    P = -(|E^i|^2 / 2) |(cos ti + cos tr)/(Z cos tr + eta0)|^2 Re(Z),
    so the flow is <= 0 exactly when Re(Z) >= 0.
    """
    z = np.asarray(z, dtype=complex)
    den = z * math.cos(theta_r) + env.eta0
    if np.any(np.abs(den) <= 1e-12 * env.eta0):
        raise ResonantDenominatorError("Z cos(theta_r) + eta0 vanished")
    factor = np.abs((math.cos(theta_i) + math.cos(theta_r)) / den) ** 2
    p = -0.5 * env.e_inc ** 2 * factor * z.real
    return p if p.ndim else float(p)


def unit_efficiency_amplitude(total_phase, theta_i, theta_r):
    """Reflection amplitude that zeroes the local flow at a given total phase.

    R = cos(Psi)(F - 1)/2 + sqrt(cos^2(Psi)(F - 1)^2 + 4F)/2, F = cos ti/cos tr.
    Plugging R e^{j Psi} back into the local flow gives S = 0.
    """
    total_phase = np.asarray(total_phase, dtype=float)
    f = math.cos(theta_i) / math.cos(theta_r)
    c = np.cos(total_phase)
    r = 0.5 * c * (f - 1.0) + 0.5 * np.sqrt(c ** 2 * (f - 1.0) ** 2 + 4.0 * f)
    return r if r.ndim else float(r)


def unit_reflection_real_part(z, theta_i, theta_r, eta0):
    """The only Re(Z) compatible with |Gamma_S| = 1 at this |Z|.

    Re(Z) = |Z|^2 (cos ti - cos tr) / (2 eta0); positive for ti < tr
    (locally passive) and negative for ti > tr (locally active).
    """
    z = np.asarray(z, dtype=complex)
    out = np.abs(z) ** 2 * (math.cos(theta_i) - math.cos(theta_r)) / (2.0 * eta0)
    return out if out.ndim else float(out)


def anomalous_reflector_impedance(r0, steering_phase, theta_i, theta_r, eta0):
    """Closed-form impedance of a constant-amplitude anomalous reflector.

    Z = (eta0/cos tr) (1 + R0 W)/(C0 - R0 W) with W = e^{j Phi_S} and
    C0 = cos ti / cos tr.
    """
    steering_phase = np.asarray(steering_phase, dtype=float)
    c0 = math.cos(theta_i) / math.cos(theta_r)
    w = np.exp(1j * steering_phase)
    den = c0 - r0 * w
    if np.any(np.abs(den) <= 1e-12):
        raise ResonantDenominatorError("C0 - R0 e^{j Phi_S} vanished")
    z = (eta0 / math.cos(theta_r)) * (1.0 + r0 * w) / den
    return z if z.ndim else complex(z)


def anomalous_reflector_resistance(r0, steering_phase, theta_i, theta_r, eta0):
    """Re(Z) of the anomalous reflector in explicit rational form.

    Re(Z) = (eta0/cos tr) * N_Z / D_Z with
    N_Z = C0 - R0^2 + (C0 - 1) R0 cos(Phi_S) and
    D_Z = C0^2 + R0^2 - 2 C0 R0 cos(Phi_S).
    """
    steering_phase = np.asarray(steering_phase, dtype=float)
    c0 = math.cos(theta_i) / math.cos(theta_r)
    cphi = np.cos(steering_phase)
    num = c0 - r0 ** 2 + (c0 - 1.0) * r0 * cphi
    den = c0 ** 2 + r0 ** 2 - 2.0 * c0 * r0 * cphi
    out = (eta0 / math.cos(theta_r)) * num / den
    return out if out.ndim else float(out)


def _as_gamma_samples(profile, env):
    if isinstance(profile, ReflectionProfile):
        return profile.gamma_s, profile.theta_i, profile.theta_r
    if isinstance(profile, SurfaceProfile):
        gamma = gamma_from_impedance(profile.z, profile.theta_i, profile.theta_r, env.eta0)
        return np.asarray(gamma, dtype=complex), profile.theta_i, profile.theta_r
    raise TypeError("expected a SurfaceProfile or ReflectionProfile")


def global_flow(profile, geom: ScenarioGeometry, env: WaveEnvironment):
    """Aperture-integrated net power flow O_S in watt.

    O_S = (|E^i|^2 L_x / eta0) * (-2 L_y cos ti
          + dy * sum_n [ |Gamma_n|^2 cos tr + Re(Gamma_n)(cos tr - cos ti) ])

    Zero means the surface reradiates exactly the power it intercepts
    (globally unit power efficiency).
    """
    gamma, theta_i, theta_r = _as_gamma_samples(profile, env)
    if gamma.size != geom.n_cells:
        raise ValueError("profile length does not match the geometry")
    ci, cr = math.cos(theta_i), math.cos(theta_r)
    cell_sum = np.sum(np.abs(gamma) ** 2 * cr + gamma.real * (cr - ci))
    prefactor = env.e_inc ** 2 * geom.half_length_x / env.eta0
    return float(prefactor * (-2.0 * geom.half_length_y * ci + geom.cell_size * cell_sum))


def incident_power(geom: ScenarioGeometry, env: WaveEnvironment):
    """Power intercepted by the aperture from the incident plane wave."""
    area = 4.0 * geom.half_length_x * geom.half_length_y
    return env.p_inc * area * math.cos(geom.theta_i)


def aperture_sum(profile, geom: ScenarioGeometry, env: WaveEnvironment, theta_o):
    """Weighted aperture sum A~ = dy * sum_n Gamma_n e^{-jk(sin ti - sin to) y_n}."""
    gamma, theta_i, _ = _as_gamma_samples(profile, env)
    theta_o = np.asarray(theta_o, dtype=float)
    k = env.wavenumber
    # outer product: leading axes follow theta_o, the summed axis follows y_n
    exponent = -1j * k * (math.sin(theta_i) - np.sin(theta_o))[..., None] * geom.y_samples
    return geom.cell_size * np.sum(gamma * np.exp(exponent), axis=-1)


def far_field_flux(profile, geom: ScenarioGeometry, env: WaveEnvironment, theta_o):
    """Reradiated power flux (W/m^2) at observation elevation(s) theta_o.

    P_obs = (k^2/eta0) |E^i|^2 L_x^2 / (8 pi^2 R_obs^2) * |A~|^2
            * (cos^2 tr + cos^2 to + 2 cos tr cos to)

    valid in the Fraunhofer region, with the observation azimuth fixed in
    the plane of incidence. At theta_o = theta_r the obliquity factor is
    4 cos^2 tr.
    """
    _, _, theta_r = _as_gamma_samples(profile, env)
    theta_o = np.asarray(theta_o, dtype=float)
    a_tilde = aperture_sum(profile, geom, env, theta_o)
    cr = math.cos(theta_r)
    obliquity = cr ** 2 + np.cos(theta_o) ** 2 + 2.0 * cr * np.cos(theta_o)
    prefactor = (env.wavenumber ** 2 / env.eta0) * (
        env.e_inc ** 2 * geom.half_length_x ** 2 / (8.0 * math.pi ** 2 * geom.r_obs ** 2))
    flux = prefactor * np.abs(a_tilde) ** 2 * obliquity
    return flux if flux.ndim else float(flux)


def receiver_flux(profile, geom: ScenarioGeometry, env: WaveEnvironment):
    """Flux at the receiver direction theta_o = theta_r."""
    return float(far_field_flux(profile, geom, env, geom.theta_r))


@dataclass(frozen=True)
class PowerFluxPattern:
    """Reradiated flux sampled over observation angles (phi_o = pi/2)."""

    theta: np.ndarray    # rad, strictly increasing
    flux: np.ndarray     # W/m^2
    r_obs: float
    theta_r: float

    def __post_init__(self):
        if np.any(np.diff(self.theta) <= 0.0):
            raise ValueError("observation grid must be strictly increasing")
        if np.any(self.flux < 0.0):
            raise ValueError("flux values must be nonnegative")

    @property
    def peak_angle(self):
        return float(self.theta[int(np.argmax(self.flux))])

    @property
    def peak_flux(self):
        return float(np.max(self.flux))

    def flux_at(self, theta):
        """Pattern value at the grid point nearest to ``theta``."""
        return float(self.flux[int(np.argmin(np.abs(self.theta - theta)))])

    def summary(self, receiver_flux_value=None):
        rx = receiver_flux_value if receiver_flux_value is not None else self.flux_at(self.theta_r)
        return {
            "peak_angle_deg": math.degrees(self.peak_angle),
            "peak_flux_w_m2": self.peak_flux,
            "peak_flux_db": to_db(self.peak_flux),
            "receiver_flux_w_m2": rx,
            "receiver_flux_db": to_db(rx),
            "specular_flux_w_m2": self.flux_at(0.0),
            "specular_flux_db": to_db(self.flux_at(0.0)),
            "peak_over_receiver_db": to_db(self.peak_flux) - to_db(rx),
            "receiver_over_specular_db": to_db(rx) - to_db(self.flux_at(0.0)),
        }


def radiation_pattern(profile, geom: ScenarioGeometry, env: WaveEnvironment,
                      theta_grid=None):
    """Sweep the far-field flux over a grid of observation elevations."""
    if theta_grid is None:
        theta_grid = np.radians(np.linspace(-90.0, 90.0, 3601))
    theta_grid = np.asarray(theta_grid, dtype=float)
    flux = far_field_flux(profile, geom, env, theta_grid)
    _, _, theta_r = _as_gamma_samples(profile, env)
    return PowerFluxPattern(theta=theta_grid, flux=np.asarray(flux, dtype=float),
                            r_obs=geom.r_obs, theta_r=theta_r)


def sinr(signal_flux, interfering_fluxes, noise_power):
    """Signal to interference-plus-noise ratio (linear)."""
    if not noise_power > 0.0:
        raise ValueError("noise power must be strictly positive")
    return signal_flux / (noise_power + sum(interfering_fluxes))


def to_db(value):
    """10*log10 with -inf for zero."""
    value = np.asarray(value, dtype=float)
    with np.errstate(divide="ignore"):
        out = 10.0 * np.log10(value)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class SurfacePowerReport:
    """Per-sample and aggregate surface power flow of a profile."""

    local_flow: np.ndarray        # W/m^2 per sample
    normalized_flow: np.ndarray   # dimensionless S(y_n)
    global_flow: float            # W
    classification: list          # 'active' | 'passive' | 'lossless-boundary'


def surface_power_report(profile: SurfaceProfile, geom: ScenarioGeometry,
                         env: WaveEnvironment):
    reflection = reflection_from_profile(profile, env)
    s, p = local_flow_gamma(reflection.gamma_s, profile.theta_i, profile.theta_r, env)
    labels = []
    for z in profile.z:
        if abs(z.real) <= _REACTIVE_RTOL * abs(z):
            labels.append("lossless-boundary")
        elif z.real > 0.0:
            labels.append("passive")
        else:
            labels.append("active")
    return SurfacePowerReport(local_flow=np.asarray(p), normalized_flow=np.asarray(s),
                              global_flow=global_flow(profile, geom, env),
                              classification=labels)


def save_pattern(path, pattern: PowerFluxPattern):
    """Write a pattern as tabular text: theta_deg, flux_w_m2, flux_db."""
    flux_db = np.where(pattern.flux > 0.0, 10.0 * np.log10(np.maximum(pattern.flux, 1e-300)), -math.inf)
    data = np.column_stack([np.degrees(pattern.theta), pattern.flux, flux_db])
    np.savetxt(path, data, delimiter=",", header="theta_deg,flux_w_m2,flux_db", fmt="%.17g")
