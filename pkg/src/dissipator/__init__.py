"""Simulation and analysis toolkit for parametric cavity reset through a lossy dissipator mode.

Submodules
----------
quantum
    Hilbert spaces, operators and density matrices.
model
    Device parameters, Hamiltonians, drives and flux calibration.
dynamics
    Lindblad integration and steady states.
analytics
    Closed-form rates, occupations and dephasing.
experiments
    Ringdown maps, reset, refrigeration and flux spectroscopy sweeps.
calibration
    Least-squares extraction of rates, linewidths and couplings.
"""

__version__ = "0.1.0"

from .model import DeviceParams, DriveSpec  # noqa: E402
from .quantum import DensityMatrix, HilbertSpace, ModeSpec, Operator  # noqa: E402

__all__ = ["DeviceParams", "DriveSpec", "DensityMatrix", "HilbertSpace", "ModeSpec", "Operator", "__version__"]
