"""Desk-scale simulation of an atomic microwave/optical photon interface.

Three computational pieces share a small numeric core:

* :mod:`atominterface.scatter` -- transfer-matrix spectra of a driven
  three-level atomic lattice along a waveguide.
* :mod:`atominterface.storage` -- EIT storage and retrieval figures of merit.
* :mod:`atominterface.transfer` -- adiabatic dark-state transfer between two
  coupled resonators, with the adiabaticity/loss trade-off and its optimizer.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    ConvergenceError,
    NumericalError,
    SingularityError,
    TrackingLossError,
)

__all__ = [
    "__version__",
    "ConfigError",
    "ConvergenceError",
    "NumericalError",
    "SingularityError",
    "TrackingLossError",
]
