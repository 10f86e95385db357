"""Mutually coupled thin-dipole channel model.

The end-to-end channel maps generator voltages at the transmit ports to
voltages at the receive loads, through the full mutual-impedance network of
transmitter (t), surface (s) and receiver (r) dipoles. Impedances are
computed with the induced-EMF method under the standard sinusoidal
current assumption, for parallel z-oriented thin wire dipoles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import SingularNetworkError, UnsupportedGeometryError
from .waves import WaveEnvironment

_COND_LIMIT = 1e12
_Z_AXIS = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class Dipole:
    """Thin wire dipole: center position, total length, wire radius.

    Only z-oriented dipoles are supported; any other orientation is an
    error rather than an approximation.
    """

    position: np.ndarray
    length: float
    radius: float
    orientation: np.ndarray = field(default_factory=lambda: _Z_AXIS.copy())

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        object.__setattr__(self, "orientation", np.asarray(self.orientation, dtype=float))
        if self.length <= 0.0 or self.radius <= 0.0:
            raise ValueError("length and radius must be positive")
        if self.radius >= self.length / 50.0:
            raise ValueError("wire radius must be below length/50 (thin-wire model)")
        unit = self.orientation / np.linalg.norm(self.orientation)
        if abs(abs(unit @ _Z_AXIS) - 1.0) > 1e-12:
            raise UnsupportedGeometryError("only z-oriented dipoles are supported")


def mutual_impedance(a: Dipole, b: Dipole, env: WaveEnvironment,
                     quad_limit=200):
    """Induced-EMF (mutual or self) impedance between parallel dipoles.

    The impedance referred to the input (port) currents is

        Z_ba = j eta0 / (4 pi sin(k h_a) sin(k h_b))
               * int_{-h_b}^{+h_b} K(z) sin(k (h_b - |z|)) dz

    with the exact near field kernel of a sinusoidal current on dipole a,

        K(z) = e^{-jkR1}/R1 + e^{-jkR2}/R2 - 2 cos(k h_a) e^{-jkR0}/R0,

    R0/R1/R2 measured from the center/ends of dipole a to the integration
    point on the axis of dipole b. Self impedance is the same integral with
    the lateral separation set to the wire radius.
    """
    ua = a.orientation / np.linalg.norm(a.orientation)
    ub = b.orientation / np.linalg.norm(b.orientation)
    if abs(abs(ua @ ub) - 1.0) > 1e-12:
        raise UnsupportedGeometryError("dipoles must be parallel")

    ha, hb = a.length / 2.0, b.length / 2.0
    k = env.wavenumber
    sep = b.position - a.position
    d = math.hypot(sep[0], sep[1])
    z_off = sep[2]
    if d == 0.0 and abs(z_off) < (ha + hb):
        # overlapping axes: self term (same dipole) evaluated at the wire surface
        d = a.radius

    cos_kha = math.cos(k * ha)

    def kernel(z):
        r0 = math.sqrt(d * d + (z + z_off) ** 2)
        r1 = math.sqrt(d * d + (z + z_off - ha) ** 2)
        r2 = math.sqrt(d * d + (z + z_off + ha) ** 2)
        k_val = (np.exp(-1j * k * r1) / r1 + np.exp(-1j * k * r2) / r2
                 - 2.0 * cos_kha * np.exp(-1j * k * r0) / r0)
        return k_val * math.sin(k * (hb - abs(z)))

    re, _ = quad(lambda z: kernel(z).real, -hb, hb, points=[0.0],
                 limit=quad_limit, epsabs=1e-12, epsrel=1e-12)
    im, _ = quad(lambda z: kernel(z).imag, -hb, hb, points=[0.0],
                 limit=quad_limit, epsabs=1e-12, epsrel=1e-12)

    norm = math.sin(k * ha) * math.sin(k * hb)
    if abs(norm) < 1e-12:
        raise UnsupportedGeometryError("dipole length is a multiple of lambda/2 "
                                       "(zero port current in the sinusoidal model)")
    return 1j * env.eta0 / (4.0 * math.pi * norm) * (re + 1j * im)


@dataclass
class ImpedanceNetwork:
    """The nine coupling blocks plus generator, load and tunable diagonals.

    Block ``z[x][y]`` couples group y (source) to group x (observation),
    for x, y in {t, s, r}; z_t / z_r / z_tun are the diagonal generator,
    load and tuning impedance matrices.
    """

    z_tt: np.ndarray
    z_ts: np.ndarray
    z_tr: np.ndarray
    z_st: np.ndarray
    z_ss: np.ndarray
    z_sr: np.ndarray
    z_rt: np.ndarray
    z_rs: np.ndarray
    z_rr: np.ndarray
    z_t: np.ndarray
    z_r: np.ndarray
    z_tun: np.ndarray

    _BLOCKS = ("z_tt", "z_ts", "z_tr", "z_st", "z_ss", "z_sr", "z_rt", "z_rs", "z_rr")

    def __post_init__(self):
        for name in self._BLOCKS + ("z_t", "z_r", "z_tun"):
            setattr(self, name, np.atleast_2d(np.asarray(getattr(self, name), dtype=complex)))
        m0, p, l0 = self.n_tx, self.n_surface, self.n_rx
        expected = {
            "z_tt": (m0, m0), "z_ts": (m0, p), "z_tr": (m0, l0),
            "z_st": (p, m0), "z_ss": (p, p), "z_sr": (p, l0),
            "z_rt": (l0, m0), "z_rs": (l0, p), "z_rr": (l0, l0),
            "z_t": (m0, m0), "z_r": (l0, l0), "z_tun": (p, p),
        }
        for name, shape in expected.items():
            if getattr(self, name).shape != shape:
                raise ValueError(f"{name} must have shape {shape}")
        for name in ("z_t", "z_r", "z_tun"):
            mat = getattr(self, name)
            if np.any(mat - np.diag(np.diagonal(mat))):
                raise ValueError(f"{name} must be diagonal")

    @property
    def n_tx(self):
        return self.z_tt.shape[0]

    @property
    def n_surface(self):
        return self.z_ss.shape[0]

    @property
    def n_rx(self):
        return self.z_rr.shape[0]

    def with_tuning(self, z_tun):
        z_tun = np.atleast_2d(np.asarray(z_tun, dtype=complex))
        return ImpedanceNetwork(self.z_tt, self.z_ts, self.z_tr, self.z_st, self.z_ss,
                                self.z_sr, self.z_rt, self.z_rs, self.z_rr,
                                self.z_t, self.z_r, z_tun)


def build_impedance_network(tx_dipoles, surface_dipoles, rx_dipoles,
                            env: WaveEnvironment, z_generator=50.0, z_load=50.0,
                            z_tuning=50.0):
    """Assemble all coupling blocks from dipole layouts.

    The full impedance matrix is symmetric by reciprocity, so only the lower
    triangle is computed. Generator/load/tuning values are plumbing defaults
    (50 ohm), not physics.
    """
    dipoles = list(tx_dipoles) + list(surface_dipoles) + list(rx_dipoles)
    n = len(dipoles)
    full = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(i + 1):
            z = mutual_impedance(dipoles[j], dipoles[i], env)
            full[i, j] = z
            full[j, i] = z

    m0, p = len(tx_dipoles), len(surface_dipoles)
    t = slice(0, m0)
    s = slice(m0, m0 + p)
    r = slice(m0 + p, n)
    l0 = n - m0 - p

    def diag(value, size):
        return np.eye(size, dtype=complex) * value

    return ImpedanceNetwork(
        z_tt=full[t, t], z_ts=full[t, s], z_tr=full[t, r],
        z_st=full[s, t], z_ss=full[s, s], z_sr=full[s, r],
        z_rt=full[r, t], z_rs=full[r, s], z_rr=full[r, r],
        z_t=diag(z_generator, m0), z_r=diag(z_load, l0), z_tun=diag(z_tuning, p),
    )


def _checked_solve(mat, rhs, label):
    cond = np.linalg.cond(mat)
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        raise SingularNetworkError(f"{label} is numerically singular", cond)
    return np.linalg.solve(mat, rhs)


def psi_matrices(net: ImpedanceNetwork):
    """Surface-eliminated coupling blocks.

    Psi_xy = Z_xy - Z_xs (Z_ss + Z_tun)^{-1} Z_sy for (x, y) in
    {t, r} x {t, r}; returned in the order (tt, tr, rt, rr).
    """
    core = net.z_ss + net.z_tun
    sy_t = _checked_solve(core, net.z_st, "Z_ss + Z_tun")
    sy_r = _checked_solve(core, net.z_sr, "Z_ss + Z_tun")
    psi_tt = net.z_tt - net.z_ts @ sy_t
    psi_tr = net.z_tr - net.z_ts @ sy_r
    psi_rt = net.z_rt - net.z_rs @ sy_t
    psi_rr = net.z_rr - net.z_rs @ sy_r
    return psi_tt, psi_tr, psi_rt, psi_rr


def end_to_end_channel(net: ImpedanceNetwork):
    """Exact voltage-to-voltage channel matrix H (v_rx = H v_tx)."""
    psi_tt, psi_tr, psi_rt, psi_rr = psi_matrices(net)
    l0 = net.n_rx
    z_r_inv = _checked_solve(net.z_r, np.eye(l0, dtype=complex), "Z_r")
    drive = _checked_solve(psi_tt + net.z_t, np.eye(net.n_tx, dtype=complex),
                           "Psi_tt + Z_t")
    lhs = (np.eye(l0, dtype=complex) + psi_rr @ z_r_inv
           - psi_rt @ drive @ psi_tr @ z_r_inv)
    return _checked_solve(lhs, psi_rt @ drive, "receive-side system")


@dataclass(frozen=True)
class FarFieldChannel:
    """Far-field channel split into its direct and surface-reradiated parts."""

    direct: np.ndarray
    reradiated: np.ndarray

    @property
    def total(self):
        return self.direct + self.reradiated


def far_field_channel(net: ImpedanceNetwork):
    """Far-field approximation of the channel with separable addends.

    H ~ (I + Z_rr Z_r^{-1})^{-1} [ Z_rt - Z_rs (Z_ss + Z_tun)^{-1} Z_st ]
        (Z_tt + Z_t)^{-1}

    The first addend is the direct Tx-Rx link, the second the surface
    contribution (which vanishes as the tuning impedances grow).
    """
    l0 = net.n_rx
    z_r_inv = _checked_solve(net.z_r, np.eye(l0, dtype=complex), "Z_r")
    front = _checked_solve(np.eye(l0, dtype=complex) + net.z_rr @ z_r_inv,
                           np.eye(l0, dtype=complex), "I + Z_rr Z_r^-1")
    back = _checked_solve(net.z_tt + net.z_t, np.eye(net.n_tx, dtype=complex),
                          "Z_tt + Z_t")
    core = net.z_ss + net.z_tun
    reradiated = -front @ net.z_rs @ _checked_solve(core, net.z_st, "Z_ss + Z_tun") @ back
    direct = front @ net.z_rt @ back
    return FarFieldChannel(direct=direct, reradiated=reradiated)


def optimize_tunable_loads(net: ImpedanceNetwork, candidates, sweeps=10):
    """Coordinate ascent of |H| over a discrete tuning-impedance set.

    Single-antenna links only (H scalar). Candidates are tried in ascending
    index order; ties keep the incumbent; singular networks score -inf.
    Returns the best diagonal and the achieved |H|.
    """
    if net.n_tx != 1 or net.n_rx != 1:
        raise ValueError("load optimization is defined for single-antenna links")
    candidates = [complex(c) for c in candidates]
    if not candidates:
        raise ValueError("candidate set must not be empty")

    # start from a feasible assignment: keep the network's loads only if they
    # already belong to the candidate set
    z_tun = np.diagonal(net.z_tun).copy()
    for p in range(z_tun.size):
        if z_tun[p] not in candidates:
            z_tun[p] = candidates[0]

    def score(diag):
        try:
            h = end_to_end_channel(net.with_tuning(np.diag(diag)))
        except SingularNetworkError:
            return -math.inf
        return abs(complex(h[0, 0]))

    best_score = score(z_tun)
    for _ in range(sweeps):
        changed = False
        for p in range(net.n_surface):
            start = incumbent = z_tun[p]
            for cand in candidates:
                if cand == incumbent:
                    continue
                z_tun[p] = cand
                trial = score(z_tun)
                if trial > best_score:
                    best_score = trial
                    incumbent = cand
                else:
                    z_tun[p] = incumbent
            if z_tun[p] != start:
                changed = True
        if not changed:
            break
    return np.diag(z_tun), best_score


def save_network(path, net: ImpedanceNetwork):
    """Write all matrices as structured text with ``re,im`` entries."""
    with open(path, "w") as fh:
        fh.write("# impedance network: block rows cols, then row-major re,im entries\n")
        for name in net._BLOCKS + ("z_t", "z_r", "z_tun"):
            mat = getattr(net, name)
            fh.write(f"block {name} {mat.shape[0]} {mat.shape[1]}\n")
            for row in mat:
                fh.write(" ".join(f"{v.real:.17g},{v.imag:.17g}" for v in row) + "\n")


def load_network(path):
    """Read a network written by :func:`save_network`."""
    blocks = {}
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    i = 0
    while i < len(lines):
        tag, name, rows, cols = lines[i].split()
        if tag != "block":
            raise ValueError(f"expected a block header, got {lines[i]!r}")
        rows, cols = int(rows), int(cols)
        data = np.zeros((rows, cols), dtype=complex)
        for r in range(rows):
            entries = lines[i + 1 + r].split()
            for c, entry in enumerate(entries):
                re, im = entry.split(",")
                data[r, c] = float(re) + 1j * float(im)
        blocks[name] = data
        i += 1 + rows
    return ImpedanceNetwork(**blocks)
