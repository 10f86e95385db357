"""Reconfigurable-surface communication models and impedance synthesis.

Three model families live side by side:

* :mod:`risim.discrete` - locally periodic discrete model over a finite
  reflection-coefficient alphabet;
* :mod:`risim.coupled` - mutually coupled thin-dipole channel matrix;
* :mod:`risim.sheet` / :mod:`risim.power` / :mod:`risim.optimizer` -
  inhomogeneous impedance-sheet model, its power bookkeeping, and the
  constrained synthesis of the surface impedance.
"""

from . import coupled, discrete, errors, optimizer, power, sheet, waves
from .waves import (ScenarioGeometry, WaveEnvironment, fraunhofer_distance,
                    reference_environment, reference_geometry, wavevector)

__all__ = [
    "coupled", "discrete", "errors", "optimizer", "power", "sheet", "waves",
    "ScenarioGeometry", "WaveEnvironment", "fraunhofer_distance",
    "reference_environment", "reference_geometry", "wavevector",
]

__version__ = "0.1.0"
