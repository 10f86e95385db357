"""Locally periodic discrete model: per-cell reflection coefficients.

Each unit cell applies one coefficient drawn from a finite alphabet, and the
received power is the coherent double sum over all cells with a per-cell
gain factor built from the Tx/Rx geometry. The alphabet is treated as
angle-independent (normal-incidence characterization).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateGeometryError
from .waves import WaveEnvironment


def coefficient(amplitude, phase_deg, unit="linear"):
    """Complex reflection (or transmission) coefficient from table entries.

    dB amplitudes are field quantities, converted as 10**(dB/20).
    """
    if unit == "dB":
        amplitude = 10.0 ** (amplitude / 20.0)
    elif unit != "linear":
        raise ValueError(f"unknown amplitude unit {unit!r}")
    if amplitude < 0.0:
        raise ValueError("amplitude must be nonnegative")
    return amplitude * cmath.exp(1j * math.radians(phase_deg))


@dataclass(frozen=True)
class RisAlphabet:
    """Finite set of per-cell reflection coefficients (optionally paired
    with transmission coefficients, which the received-power model ignores)."""

    reflection: tuple
    transmission: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "reflection", tuple(complex(g) for g in self.reflection))
        if len(self.reflection) < 1:
            raise ValueError("alphabet must contain at least one state")
        if self.transmission is not None:
            object.__setattr__(self, "transmission",
                               tuple(complex(t) for t in self.transmission))
            if len(self.transmission) != len(self.reflection):
                raise ValueError("transmission list must match the reflection list")

    def __len__(self):
        return len(self.reflection)


# Measured prototype alphabets (normal incidence).
ALPHABET_BINARY_27GHZ = RisAlphabet((coefficient(0.9, 165.0), coefficient(0.7, 0.0)))
ALPHABET_BINARY_33GHZ = RisAlphabet((coefficient(0.8, 150.0), coefficient(0.8, 0.0)))
ALPHABET_REFLECT_REFRACT_3_6GHZ = RisAlphabet(
    (coefficient(0.46, 20.0), coefficient(0.55, 215.0)),
    transmission=(coefficient(0.58, 300.0), coefficient(0.81, 123.0)),
)
ALPHABET_FOUR_STATE_2_3GHZ = RisAlphabet((
    coefficient(-1.2, -205.5, "dB"),
    coefficient(-1.2, -383.2, "dB"),
    coefficient(-0.8, -290.2, "dB"),
    coefficient(-0.7, -110.3, "dB"),
))
ALPHABET_VARACTOR_5_GHZ_BAND = RisAlphabet(tuple(
    coefficient(a, p, "dB") for a, p in [
        (-1.517, 32.798), (-1.807, 40.854), (-3.156, 46.807), (-5.59, 53.543),
        (-9.576, 70.32), (-20.563, -167.158), (-6.615, -73.171), (-3.029, -49.627),
        (-1.959, -35.908), (-0.874, -23.263), (-0.749, -16.087), (-0.469, -12.663),
        (-0.528, -9.925), (-0.439, -6.906),
    ]
))


def load_alphabet(path):
    """Read an alphabet from text: one ``amplitude,unit,phase_deg`` per line.

    ``unit`` is ``linear`` or ``dB``; blank lines and ``#`` comments are
    skipped.
    """
    states = []
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            amp, unit, phase = line.split(",")
            states.append(coefficient(float(amp), float(phase), unit.strip()))
    return RisAlphabet(tuple(states))


def save_alphabet(path, alphabet: RisAlphabet):
    with open(path, "w") as fh:
        fh.write("# amplitude,unit,phase_deg\n")
        for g in alphabet.reflection:
            fh.write(f"{abs(g):.17g},linear,{math.degrees(cmath.phase(g)):.17g}\n")


@dataclass
class DiscreteRisConfiguration:
    """M x N grid of unit cells with a state index per cell."""

    rows: int
    cols: int
    cell_dx: float
    cell_dy: float
    states: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("grid must have at least one cell")
        if self.states is None:
            self.states = np.zeros((self.rows, self.cols), dtype=int)
        self.states = np.asarray(self.states, dtype=int)
        if self.states.shape != (self.rows, self.cols):
            raise ValueError("state matrix shape must be (rows, cols)")

    def validate_against(self, alphabet: RisAlphabet):
        if np.any(self.states < 0) or np.any(self.states >= len(alphabet)):
            raise ValueError("state index outside the alphabet")

    def cell_centers(self):
        """(rows, cols, 3) array of cell-center coordinates, grid centered
        at the origin in the z = 0 plane."""
        m = np.arange(1, self.rows + 1, dtype=float)
        n = np.arange(1, self.cols + 1, dtype=float)
        x = (m - 0.5 * (self.rows + 1)) * self.cell_dx
        y = (n - 0.5 * (self.cols + 1)) * self.cell_dy
        centers = np.zeros((self.rows, self.cols, 3))
        centers[..., 0] = x[:, None]
        centers[..., 1] = y[None, :]
        return centers


@dataclass(frozen=True)
class DiscreteLinkGeometry:
    """Transmitter/receiver positions (z > 0) and boresight gains."""

    r_tx: np.ndarray
    r_rx: np.ndarray
    gain_tx: float = 2.0
    gain_rx: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "r_tx", np.asarray(self.r_tx, dtype=float))
        object.__setattr__(self, "r_rx", np.asarray(self.r_rx, dtype=float))
        if self.r_tx[2] <= 0.0 or self.r_rx[2] <= 0.0:
            raise ValueError("Tx and Rx must lie in the reflection half-space (z > 0)")


def _link_distances(link: DiscreteLinkGeometry, ris: DiscreteRisConfiguration):
    centers = ris.cell_centers()
    r_tx = np.linalg.norm(link.r_tx - centers, axis=-1)
    r_rx = np.linalg.norm(link.r_rx - centers, axis=-1)
    d_cell = np.linalg.norm(centers, axis=-1)
    d0_tx = float(np.linalg.norm(link.r_tx))
    d0_rx = float(np.linalg.norm(link.r_rx))
    if np.any(r_tx <= 0.0) or np.any(r_rx <= 0.0) or d0_tx <= 0.0 or d0_rx <= 0.0:
        raise DegenerateGeometryError("zero distance in the discrete link")
    return r_tx, r_rx, d_cell, d0_tx, d0_rx


def cell_gain_factor(link: DiscreteLinkGeometry, ris: DiscreteRisConfiguration,
                     m: int, n: int):
    """Geometry/gain factor F_{m,n} of one cell (1-based indices).

    F = [((d0T^2 + rT^2 - d^2)/(2 d0T rT))]^(G_T/2 - 1)
        * (zT/rT) (zR/rR)
        * [((d0R^2 + rR^2 - d^2)/(2 d0R rR))]^(G_R/2 - 1)

    where d is the cell-to-origin distance and d0T, d0R the Tx/Rx distances
    to the surface center.
    """
    if not (1 <= m <= ris.rows and 1 <= n <= ris.cols):
        raise IndexError("cell index out of range")
    f = _gain_factors(link, ris)
    return float(f[m - 1, n - 1])


def _gain_factors(link, ris):
    r_tx, r_rx, d_cell, d0_tx, d0_rx = _link_distances(link, ris)
    cos_tx = (d0_tx ** 2 + r_tx ** 2 - d_cell ** 2) / (2.0 * d0_tx * r_tx)
    cos_rx = (d0_rx ** 2 + r_rx ** 2 - d_cell ** 2) / (2.0 * d0_rx * r_rx)
    obliquity = (link.r_tx[2] / r_tx) * (link.r_rx[2] / r_rx)
    return (cos_tx ** (link.gain_tx / 2.0 - 1.0)
            * obliquity
            * cos_rx ** (link.gain_rx / 2.0 - 1.0))


def _unit_terms(link, ris, env):
    """Per-cell complex contributions with Gamma = 1 factored out."""
    r_tx, r_rx, _, _, _ = _link_distances(link, ris)
    f = _gain_factors(link, ris)
    phase = np.exp(-1j * (2.0 * math.pi / env.wavelength) * (r_tx + r_rx))
    return np.sqrt(f) * phase / (r_tx * r_rx)


def _cell_terms(link, ris, alphabet, env):
    """Per-cell complex contributions to the coherent sum."""
    ris.validate_against(alphabet)
    gammas = np.asarray(alphabet.reflection)[ris.states]
    return _unit_terms(link, ris, env) * gammas


def received_power(link: DiscreteLinkGeometry, ris: DiscreteRisConfiguration,
                   alphabet: RisAlphabet, env: WaveEnvironment):
    """Received-to-transmitted power ratio of the configured surface."""
    prefactor = (link.gain_tx * link.gain_rx
                 * (ris.cell_dx * ris.cell_dy) ** 2 / (16.0 * math.pi ** 2))
    return float(prefactor * np.abs(np.sum(_cell_terms(link, ris, alphabet, env))) ** 2)


def optimize_alphabet(link: DiscreteLinkGeometry, ris: DiscreteRisConfiguration,
                      alphabet: RisAlphabet, env: WaveEnvironment, sweeps=10):
    """Greedy per-cell coordinate ascent over the alphabet.

    Cells are swept in row-major order; each cell is set to the state that
    maximizes the received power with all other cells held fixed, keeping
    the incumbent on ties. Stops after a full sweep without changes or when
    ``sweeps`` is exhausted. The objective never decreases.
    """
    if sweeps < 1:
        raise ValueError("need at least one sweep")
    ris.validate_against(alphabet)

    best = DiscreteRisConfiguration(ris.rows, ris.cols, ris.cell_dx, ris.cell_dy,
                                    states=ris.states.copy())
    unit_terms = _unit_terms(link, best, env)
    gammas = np.asarray(alphabet.reflection)
    total = np.sum(unit_terms * gammas[best.states])
    prefactor = (link.gain_tx * link.gain_rx
                 * (best.cell_dx * best.cell_dy) ** 2 / (16.0 * math.pi ** 2))

    for _ in range(sweeps):
        changed = False
        for m in range(best.rows):
            for n in range(best.cols):
                current = best.states[m, n]
                base = total - unit_terms[m, n] * gammas[current]
                candidates = np.abs(base + unit_terms[m, n] * gammas) ** 2
                winner = int(np.argmax(candidates))
                if candidates[winner] > candidates[current]:
                    best.states[m, n] = winner
                    total = base + unit_terms[m, n] * gammas[winner]
                    changed = True
        if not changed:
            break

    power = float(prefactor * np.abs(total) ** 2)
    return best, power
