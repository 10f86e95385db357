"""Constrained synthesis of the sampled surface impedance.

Two problem families are solved:

* global design: minimize |O_S(Z)| (aperture-integrated net power flow),
  optionally subject to the slow-variation residual H_n <= eps and to
  angular flux masks P_obs(theta) <= delta;
* reactive approximation: minimize |P_rx(Z) - P_rx(Z_ref)| over purely
  reactive profiles (Re Z = 0 enforced by parametrizing over Im Z only),
  under the same optional constraints.

The solver is an augmented-Lagrangian outer loop (squared-hinge penalties
with multiplier updates) around an L-BFGS inner descent with backtracking
line search. All gradients are analytic; impedances are scaled by eta0
inside the solver. Everything is deterministic: identical problems produce
bit-identical reports.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import power, sheet
from .sheet import ReflectionProfile, SurfaceProfile
from .waves import ScenarioGeometry, WaveEnvironment

_TINY = 1e-300


@dataclass(frozen=True)
class MaskSector:
    """Angular sector [lower, upper] (rad) sampled every ``step`` rad in
    which the reradiated flux must stay below ``ceiling`` W/m^2."""

    lower: float
    upper: float
    step: float
    ceiling: float

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError("mask sector needs lower < upper")
        if self.step <= 0.0 or self.ceiling <= 0.0:
            raise ValueError("mask step and ceiling must be positive")

    @property
    def angles(self):
        count = int(round((self.upper - self.lower) / self.step)) + 1
        return self.lower + self.step * np.arange(count)


@dataclass(frozen=True)
class SolverSettings:
    max_outer: int = 2000
    inner_iterations: int = 400
    memory: int = 12
    penalty_start: float = 10.0
    penalty_growth: float = 10.0
    penalty_cap: float = 1e10
    gradient_tol: float = 1e-10
    inner_ftol: float = 1e-15
    merit_stall_tol: float = 1e-10
    merit_stall_patience: int = 5
    constraint_margin: float = 0.005   # solve to (1 - margin) * bound
    sine_convention: str = "reflection"


@dataclass(frozen=True)
class DesignProblem:
    """Objective, constraint set and initialization of one synthesis run."""

    objective: str                         # 'global_flow' | 'flux_match'
    reference_profile: SurfaceProfile | None = None
    helmholtz_bound: float | None = 5e-2   # None means inactive
    reactive: bool = False
    masks: tuple = ()
    initial_profile: SurfaceProfile | None = None
    settings: SolverSettings = field(default_factory=SolverSettings)

    def __post_init__(self):
        if self.objective not in ("global_flow", "flux_match"):
            raise ValueError(f"unknown objective {self.objective!r}")
        if self.objective == "flux_match" and self.reference_profile is None:
            raise ValueError("flux_match requires a reference profile")
        if self.helmholtz_bound is not None and not self.helmholtz_bound > 0.0:
            raise ValueError("helmholtz bound must be positive when active")
        object.__setattr__(self, "masks", tuple(self.masks))


@dataclass(frozen=True)
class SolveReport:
    profile: SurfaceProfile
    objective_value: float
    objective_trace: np.ndarray
    max_helmholtz: float
    max_mask_flux: float | None
    mask_violation: float
    reactivity_violation: float
    iterations: int
    outer_iterations: int
    wall_time_s: float
    converged: bool


@dataclass(frozen=True)
class ConstraintReport:
    helmholtz: np.ndarray
    mask_fluxes: tuple
    reactivity_violation: float


# ---------------------------------------------------------------------------
# analytic derivatives
#
# All real scalars q(Z) below are differentiated through the Wirtinger
# derivative w = dq/dZ; the Cartesian gradient follows as
# dq/dReZ = 2 Re(w), dq/dImZ = -2 Im(w).
# ---------------------------------------------------------------------------


def _gamma_and_jacobian(z, theta_i, theta_r, eta0):
    ci, cr = math.cos(theta_i), math.cos(theta_r)
    den = z * cr + eta0
    gamma = (z * ci - eta0) / den
    jac = eta0 * (ci + cr) / den ** 2
    return gamma, jac


def global_flow_value_and_gradient(z, geom: ScenarioGeometry, env: WaveEnvironment):
    """O_S(Z) with its gradient with respect to (Re Z_n, Im Z_n)."""
    z = np.asarray(z, dtype=complex)
    ci, cr = math.cos(geom.theta_i), math.cos(geom.theta_r)
    gamma, jac = _gamma_and_jacobian(z, geom.theta_i, geom.theta_r, env.eta0)
    a = env.e_inc ** 2 * geom.half_length_x / env.eta0
    cell = np.abs(gamma) ** 2 * cr + gamma.real * (cr - ci)
    value = a * (-2.0 * geom.half_length_y * ci + geom.cell_size * np.sum(cell))
    w = a * geom.cell_size * (np.conj(gamma) * cr + 0.5 * (cr - ci)) * jac
    return float(value), 2.0 * w.real, -2.0 * w.imag


def flux_value_and_gradient(z, geom: ScenarioGeometry, env: WaveEnvironment, theta_o):
    """P_obs(Z; theta_o) with its gradient with respect to (Re Z_n, Im Z_n)."""
    z = np.asarray(z, dtype=complex)
    gamma, jac = _gamma_and_jacobian(z, geom.theta_i, geom.theta_r, env.eta0)
    k = env.wavenumber
    cr = math.cos(geom.theta_r)
    e = np.exp(-1j * k * (math.sin(geom.theta_i) - math.sin(theta_o)) * geom.y_samples)
    a_tilde = geom.cell_size * np.sum(gamma * e)
    b = (k ** 2 / env.eta0) * (env.e_inc ** 2 * geom.half_length_x ** 2
                               / (8.0 * math.pi ** 2 * geom.r_obs ** 2))
    b *= cr ** 2 + math.cos(theta_o) ** 2 + 2.0 * cr * math.cos(theta_o)
    value = b * abs(a_tilde) ** 2
    w = b * geom.cell_size * np.conj(a_tilde) * e * jac
    return float(value), 2.0 * w.real, -2.0 * w.imag


def helmholtz_values_and_jacobian(z, geom: ScenarioGeometry, env: WaveEnvironment,
                                  sine_convention="reflection"):
    """All residuals H_m plus the dense Jacobian d H_m / d(Re Z_n, Im Z_n).

    Used for verification; the solver itself accumulates the same
    derivatives through the banded structure without building the matrix.
    """
    z = np.asarray(z, dtype=complex)
    n = z.size
    helm = _HelmholtzKernel(geom, env, sine_convention)
    values, u, f, jac_phase = helm.evaluate(z)
    d_re = np.zeros((n - 2, n))
    d_im = np.zeros((n - 2, n))
    k2 = env.wavenumber ** 2
    for m in range(n - 2):
        abs_u = max(abs(u[m]), _TINY)
        abs_f = max(abs(f[m]), _TINY)
        for offset, coeff in enumerate(helm.stencil):
            wirt_f = np.conj(u[m]) * coeff / (2.0 * abs_u * k2 * abs_f)
            if offset == 0:
                wirt_f -= abs_u * np.conj(f[m]) / (2.0 * k2 * abs_f ** 3)
            wirt_z = wirt_f * jac_phase[m + offset]
            d_re[m, m + offset] = 2.0 * wirt_z.real
            d_im[m, m + offset] = -2.0 * wirt_z.imag
    return values, d_re, d_im


class _HelmholtzKernel:
    """Shared pieces of the slow-variation residual and its derivatives."""

    def __init__(self, geom, env, sine_convention):
        self.geom = geom
        self.env = env
        if sine_convention == "reflection":
            s = math.sin(geom.theta_r)
        elif sine_convention == "incidence":
            s = math.sin(geom.theta_i)
        else:
            raise ValueError(f"unknown sine_convention {sine_convention!r}")
        k = env.wavenumber
        dy = geom.cell_size
        self.phase = np.exp(1j * k * (math.sin(geom.theta_r) - math.sin(geom.theta_i))
                            * geom.y_samples)
        # u_m = sum_offset stencil[offset] * f_{m+offset}
        self.stencil = (1.0 / dy ** 2 + 2j * k * s / dy,
                        -2.0 / dy ** 2 - 2j * k * s / dy,
                        1.0 / dy ** 2)
        self.k2 = k ** 2

    def evaluate(self, z):
        gamma, jac = _gamma_and_jacobian(z, self.geom.theta_i, self.geom.theta_r,
                                         self.env.eta0)
        f = gamma * self.phase
        a0, a1, a2 = self.stencil
        u = a0 * f[:-2] + a1 * f[1:-1] + a2 * f[2:]
        values = np.abs(u) / (self.k2 * np.maximum(np.abs(f[:-2]), _TINY))
        return values, u, f, jac * self.phase

    def accumulate_wirtinger(self, weights, u, f, jac_phase):
        """sum_m weights_m * dH_m/dZ as a Wirtinger vector over Z."""
        abs_u = np.maximum(np.abs(u), _TINY)
        abs_f = np.maximum(np.abs(f[:-2]), _TINY)
        beta = weights * np.conj(u) / (2.0 * abs_u * self.k2 * abs_f)
        wirt_f = np.zeros(f.size, dtype=complex)
        a0, a1, a2 = self.stencil
        wirt_f[:-2] += beta * a0
        wirt_f[1:-1] += beta * a1
        wirt_f[2:] += beta * a2
        wirt_f[:-2] -= weights * abs_u * np.conj(f[:-2]) / (2.0 * self.k2 * abs_f ** 3)
        return wirt_f * jac_phase


# ---------------------------------------------------------------------------
# merit function
# ---------------------------------------------------------------------------


class _MeritProblem:
    """Scaled objective + squared-hinge augmented penalties and gradients.

    Solver variables are x = [Re Z; Im Z]/eta0 for the full problem or
    x = Im Z / eta0 for the reactive one. Constraints are normalized to
    g = H/eps - 1 and g = P/ceiling - 1 before penalization.
    """

    def __init__(self, env, geom, problem: DesignProblem):
        self.env = env
        self.geom = geom
        self.problem = problem
        self.eta0 = env.eta0
        self.n = geom.n_cells
        margin = problem.settings.constraint_margin

        self.helmholtz = None
        self.eps_int = None
        if problem.helmholtz_bound is not None:
            self.helmholtz = _HelmholtzKernel(geom, env, problem.settings.sine_convention)
            self.eps_int = problem.helmholtz_bound * (1.0 - margin)

        self.mask_angles = np.concatenate([m.angles for m in problem.masks]) \
            if problem.masks else np.zeros(0)
        self.mask_ceiling = np.concatenate([np.full(m.angles.size, m.ceiling)
                                            for m in problem.masks]) \
            if problem.masks else np.zeros(0)
        self.mask_ceiling_int = self.mask_ceiling * (1.0 - margin)

        k = env.wavenumber
        si = math.sin(geom.theta_i)
        self.mask_basis = np.exp(-1j * k * (si - np.sin(self.mask_angles))[:, None]
                                 * geom.y_samples) if self.mask_angles.size else None
        cr = math.cos(geom.theta_r)
        self.mask_obliquity = (cr ** 2 + np.cos(self.mask_angles) ** 2
                               + 2.0 * cr * np.cos(self.mask_angles))
        self.rx_basis = np.exp(-1j * k * (si - math.sin(geom.theta_r)) * geom.y_samples)
        self.rx_obliquity = 4.0 * cr ** 2
        self.flux_prefactor = (k ** 2 / env.eta0) * (
            env.e_inc ** 2 * geom.half_length_x ** 2
            / (8.0 * math.pi ** 2 * geom.r_obs ** 2))

        self.flow_prefactor = env.e_inc ** 2 * geom.half_length_x / env.eta0
        self.flow_norm = max(self.flow_prefactor * 2.0 * geom.half_length_y
                             * math.cos(geom.theta_i), _TINY)
        if problem.objective == "flux_match":
            ref = problem.reference_profile
            self.flux_target = power.receiver_flux(ref, geom, env)
        else:
            self.flux_target = None

    # -- variable packing ---------------------------------------------------

    def pack(self, z):
        if self.problem.reactive:
            return np.asarray(z, dtype=complex).imag / self.eta0
        z = np.asarray(z, dtype=complex)
        return np.concatenate([z.real, z.imag]) / self.eta0

    def unpack(self, x):
        if self.problem.reactive:
            return 1j * self.eta0 * x
        return self.eta0 * (x[: self.n] + 1j * x[self.n:])

    def _gradient_from_wirtinger(self, wirt):
        if self.problem.reactive:
            return -2.0 * self.eta0 * wirt.imag
        return self.eta0 * np.concatenate([2.0 * wirt.real, -2.0 * wirt.imag])

    # -- raw quantities -----------------------------------------------------

    def _flow(self, gamma):
        ci = math.cos(self.geom.theta_i)
        cr = math.cos(self.geom.theta_r)
        cell = np.abs(gamma) ** 2 * cr + gamma.real * (cr - ci)
        value = self.flow_prefactor * (-2.0 * self.geom.half_length_y * ci
                                       + self.geom.cell_size * np.sum(cell))
        wirt_gamma = (self.flow_prefactor * self.geom.cell_size
                      * (np.conj(gamma) * cr + 0.5 * (cr - ci)))
        return value, wirt_gamma

    def _rx_flux(self, gamma):
        a_tilde = self.geom.cell_size * np.sum(gamma * self.rx_basis)
        b = self.flux_prefactor * self.rx_obliquity
        value = b * abs(a_tilde) ** 2
        wirt_gamma = b * self.geom.cell_size * np.conj(a_tilde) * self.rx_basis
        return value, wirt_gamma

    def _mask_fluxes(self, gamma):
        a_tilde = self.geom.cell_size * (self.mask_basis @ gamma)
        values = self.flux_prefactor * self.mask_obliquity * np.abs(a_tilde) ** 2
        return values, a_tilde

    # -- merit --------------------------------------------------------------

    def merit(self, x, lam_h, lam_m, rho, lam_eq=0.0):
        """Augmented Lagrangian value and gradient at solver variables x."""
        z = self.unpack(x)
        gamma, jac = _gamma_and_jacobian(z, self.geom.theta_i, self.geom.theta_r,
                                         self.eta0)
        wirt_z = np.zeros(self.n, dtype=complex)

        if self.problem.objective == "global_flow":
            # the objective is a genuine absolute value: the kink at zero is
            # what pins the iterate at its first touch of the zero set
            # instead of letting it wander along the manifold afterwards
            flow, wirt_gamma = self._flow(gamma)
            value = abs(flow) / self.flow_norm
            sign = math.copysign(1.0, flow) if flow != 0.0 else 0.0
            wirt_z += (sign / self.flow_norm) * wirt_gamma * jac
        else:
            # the flux match is handled as an equality constraint inside the
            # same augmented Lagrangian (multiplier + smooth quadratic);
            # the modulus objective itself is nonsmooth at the optimum and
            # navigates binding-constraint walls poorly
            flux, wirt_gamma = self._rx_flux(gamma)
            mismatch = (flux - self.flux_target) / self.flux_target
            value = lam_eq * mismatch + 0.5 * rho * mismatch ** 2
            wirt_z += ((lam_eq + rho * mismatch) / self.flux_target) * wirt_gamma * jac

        if self.helmholtz is not None:
            residuals, u, f, jac_phase = self.helmholtz.evaluate(z)
            g = residuals / self.eps_int - 1.0
            active = np.maximum(0.0, lam_h + rho * g)
            value += np.sum(active ** 2 - lam_h ** 2) / (2.0 * rho)
            weights = active / self.eps_int
            if np.any(weights > 0.0):
                wirt_z += self.helmholtz.accumulate_wirtinger(weights, u, f, jac_phase)

        if self.mask_angles.size:
            fluxes, a_tilde = self._mask_fluxes(gamma)
            g = fluxes / self.mask_ceiling_int - 1.0
            active = np.maximum(0.0, lam_m + rho * g)
            value += np.sum(active ** 2 - lam_m ** 2) / (2.0 * rho)
            weights = active / self.mask_ceiling_int
            coeff = (weights * self.flux_prefactor * self.mask_obliquity
                     * np.conj(a_tilde)) * self.geom.cell_size
            wirt_z += (coeff @ self.mask_basis) * jac

        return value, self._gradient_from_wirtinger(wirt_z)

    def diagnostics(self, x):
        """Objective value, constraint values and match mismatch at x."""
        z = self.unpack(x)
        gamma, _ = _gamma_and_jacobian(z, self.geom.theta_i, self.geom.theta_r,
                                       self.eta0)
        mismatch = 0.0
        if self.problem.objective == "global_flow":
            objective = abs(self._flow(gamma)[0])
        else:
            objective = abs(self._rx_flux(gamma)[0] - self.flux_target)
            mismatch = (self._rx_flux(gamma)[0] - self.flux_target) / self.flux_target
        g_h = np.zeros(0)
        if self.helmholtz is not None:
            residuals, _, _, _ = self.helmholtz.evaluate(z)
            g_h = residuals / self.eps_int - 1.0
        g_m = np.zeros(0)
        if self.mask_angles.size:
            fluxes, _ = self._mask_fluxes(gamma)
            g_m = fluxes / self.mask_ceiling_int - 1.0
        return objective, g_h, g_m, mismatch


# ---------------------------------------------------------------------------
# inner descent: L-BFGS with backtracking Armijo line search
# ---------------------------------------------------------------------------


def _lbfgs(value_grad, x0, max_iterations, gradient_tol, ftol, memory):
    x = x0.copy()
    f, g = value_grad(x)
    s_list, y_list, rho_list = [], [], []
    trace = [f]
    iterations = 0
    stall = 0

    while iterations < max_iterations:
        gmax = np.max(np.abs(g)) if g.size else 0.0
        if gmax <= gradient_tol:
            break

        # two-loop recursion
        q = g.copy()
        alphas = []
        for s, yv, rho in zip(reversed(s_list), reversed(y_list), reversed(rho_list)):
            a = rho * (s @ q)
            alphas.append(a)
            q -= a * yv
        if y_list:
            y_last = y_list[-1]
            q *= (s_list[-1] @ y_last) / max(y_last @ y_last, _TINY)
        else:
            q *= 1.0 / max(gmax, 1.0)
        for (s, yv, rho), a in zip(zip(s_list, y_list, rho_list), reversed(alphas)):
            b = rho * (yv @ q)
            q += (a - b) * s
        direction = -q

        derivative = direction @ g
        if derivative >= 0.0:
            s_list, y_list, rho_list = [], [], []
            direction = -g / max(gmax, 1.0)
            derivative = direction @ g

        step = 1.0
        accepted = False
        while step > 1e-20:
            x_new = x + step * direction
            f_new, g_new = value_grad(x_new)
            if f_new <= f + 1e-4 * step * derivative:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break

        s = x_new - x
        yv = g_new - g
        sy = s @ yv
        if sy > 1e-12 * math.sqrt(max(s @ s, _TINY)) * math.sqrt(max(yv @ yv, _TINY)):
            s_list.append(s)
            y_list.append(yv)
            rho_list.append(1.0 / sy)
            if len(s_list) > memory:
                s_list.pop(0)
                y_list.pop(0)
                rho_list.pop(0)

        drop = f - f_new
        x, f, g = x_new, f_new, g_new
        trace.append(f)
        iterations += 1
        if drop <= ftol * max(1.0, abs(f)):
            stall += 1
            if stall >= 5:
                break
        else:
            stall = 0

    return x, f, g, trace, iterations


# ---------------------------------------------------------------------------
# drivers
# ---------------------------------------------------------------------------


def _initial_profile(problem: DesignProblem, geom, env):
    if problem.initial_profile is not None:
        return problem.initial_profile
    if problem.reactive:
        if problem.reference_profile is None:
            raise ValueError("reactive solves need an initial or reference profile")
        ref = problem.reference_profile
        return SurfaceProfile(y=ref.y, z=1j * ref.z.imag, theta_i=ref.theta_i,
                              theta_r=ref.theta_r)
    _, profile = sheet.go_profile(geom, env)
    return profile


def _solve(problem: DesignProblem, geom: ScenarioGeometry, env: WaveEnvironment):
    settings = problem.settings
    merit_problem = _MeritProblem(env, geom, problem)
    start_profile = _initial_profile(problem, geom, env)
    if len(start_profile) != geom.n_cells:
        raise ValueError("initial profile does not match the geometry")
    x = merit_problem.pack(start_profile.z)

    lam_h = np.zeros(max(geom.n_cells - 2, 0)) if problem.helmholtz_bound is not None \
        else np.zeros(0)
    lam_m = np.zeros(merit_problem.mask_angles.size)
    lam_eq = 0.0
    matching = problem.objective == "flux_match"
    rho = settings.penalty_start

    t0 = time.perf_counter()
    trace = []
    total_inner = 0
    previous_merit = math.inf
    previous_residual = math.inf
    best_mismatch = math.inf
    stall = 0
    match_stall = 0
    outer_done = 0
    stationary = False

    for outer in range(settings.max_outer):
        outer_done = outer + 1

        def merit(xv, _lh=lam_h, _lm=lam_m, _rho=rho, _leq=lam_eq):
            return merit_problem.merit(xv, _lh, _lm, _rho, _leq)

        x, merit_value, grad, inner_trace, inner_iters = _lbfgs(
            merit, x, settings.inner_iterations, settings.gradient_tol,
            settings.inner_ftol, settings.memory)
        total_inner += inner_iters
        trace.extend(inner_trace)

        objective, g_h, g_m, mismatch = merit_problem.diagnostics(x)
        violation = max(np.max(g_h, initial=0.0), np.max(g_m, initial=0.0))
        residual = max(violation, abs(mismatch) if matching else 0.0)
        stationary = (np.max(np.abs(grad)) <= settings.gradient_tol
                      or inner_iters < settings.inner_iterations)

        if g_h.size:
            lam_h = np.maximum(0.0, lam_h + rho * g_h)
        if g_m.size:
            lam_m = np.maximum(0.0, lam_m + rho * g_m)
        if matching:
            lam_eq += rho * mismatch

        feasible = violation <= 0.0
        matched = (not matching) or abs(mismatch) <= 1e-10
        drop = previous_merit - merit_value
        if abs(drop) <= settings.merit_stall_tol * max(1.0, abs(previous_merit)):
            stall += 1
        else:
            stall = 0
        previous_merit = merit_value
        if matching:
            # track progress of the match residual; a stagnating residual at
            # a feasible stationары point means the target sits at (or past)
            # the reachable frontier
            if abs(mismatch) < 0.97 * best_mismatch:
                match_stall = 0
            else:
                match_stall += 1
            best_mismatch = min(best_mismatch, abs(mismatch))

        if feasible and stationary and matched and (
                stall >= settings.merit_stall_patience
                or (not g_h.size and not g_m.size)):
            break
        if feasible and stationary and matching and not matched \
                and match_stall >= settings.merit_stall_patience:
            break
        if residual > 0.25 * previous_residual:
            rho = min(rho * settings.penalty_growth, settings.penalty_cap)
        elif feasible and (g_h.size or g_m.size):
            # binding-but-feasible constraints: multiplier estimates converge
            # at a rate set by rho, so keep stiffening while progress lasts
            binding = max(np.max(g_h, initial=-math.inf),
                          np.max(g_m, initial=-math.inf)) > -0.05
            if binding:
                rho = min(rho * math.sqrt(settings.penalty_growth),
                          settings.penalty_cap)
        if residual > 0.0:
            previous_residual = min(previous_residual, residual)
        if stall >= settings.merit_stall_patience:
            break

    wall = time.perf_counter() - t0
    z = merit_problem.unpack(x)
    profile = SurfaceProfile(y=geom.y_samples, z=z, theta_i=geom.theta_i,
                             theta_r=geom.theta_r)

    # post-hoc verification recomputes every constraint from scratch
    constraints = evaluate_constraints(profile, problem, geom, env)
    max_h = float(np.max(constraints.helmholtz)) if constraints.helmholtz.size else 0.0
    if constraints.mask_fluxes:
        max_mask = max(float(np.max(f)) for f in constraints.mask_fluxes)
        mask_violation = max(0.0, max(float(np.max(f)) - m.ceiling
                                      for f, m in zip(constraints.mask_fluxes,
                                                      problem.masks)))
    else:
        max_mask = None
        mask_violation = 0.0

    objective, _, _ = merit_problem.diagnostics(x)
    helmholtz_ok = (problem.helmholtz_bound is None
                    or max_h <= problem.helmholtz_bound)
    masks_ok = all(
        float(np.max(fluxes)) <= m.ceiling * (1.0 + 1e-2)
        for fluxes, m in zip(constraints.mask_fluxes, problem.masks)
    )
    converged = bool(stationary and helmholtz_ok and masks_ok)

    return SolveReport(
        profile=profile,
        objective_value=float(objective),
        objective_trace=np.asarray(trace),
        max_helmholtz=max_h,
        max_mask_flux=max_mask,
        mask_violation=float(mask_violation),
        reactivity_violation=float(constraints.reactivity_violation),
        iterations=total_inner,
        outer_iterations=outer_done,
        wall_time_s=wall,
        converged=converged,
    )


def solve_global(problem: DesignProblem, geom: ScenarioGeometry, env: WaveEnvironment):
    """Minimize |O_S| from the phase-gradient initialization."""
    if problem.objective != "global_flow" or problem.reactive:
        raise ValueError("solve_global expects a non-reactive global_flow problem")
    return _solve(problem, geom, env)


def solve_reactive(problem: DesignProblem, geom: ScenarioGeometry, env: WaveEnvironment):
    """Match the receiver flux of the reference with a purely reactive profile."""
    if problem.objective != "flux_match" or not problem.reactive:
        raise ValueError("solve_reactive expects a reactive flux_match problem")
    return _solve(problem, geom, env)


def evaluate_constraints(profile: SurfaceProfile, problem: DesignProblem,
                         geom: ScenarioGeometry, env: WaveEnvironment):
    """Recompute every constraint of ``problem`` at ``profile`` from scratch."""
    if problem.helmholtz_bound is not None:
        residuals = sheet.helmholtz_residual(
            profile, geom, env, sine_convention=problem.settings.sine_convention)
    else:
        residuals = np.zeros(0)
    reflection = sheet.reflection_from_profile(profile, env)
    mask_fluxes = tuple(
        np.asarray(power.far_field_flux(reflection, geom, env, sector.angles))
        for sector in problem.masks
    )
    reactivity = float(np.max(np.abs(profile.z.real))) if problem.reactive else 0.0
    return ConstraintReport(helmholtz=np.asarray(residuals),
                            mask_fluxes=mask_fluxes,
                            reactivity_violation=reactivity)
