"""
Flux spectroscopy of the coupled modes
======================================

Tune the dissipator through its range and follow the normal modes of the
cavity, filter and dissipator.  Branches are tracked by eigenvector
overlap, so each keeps its identity through the avoided crossings.
"""

# %%
import numpy as np

from dissipator.experiments import crossing_gap, flux_spectroscopy
from dissipator.model import DeviceParams
from dissipator.units import to_ghz, to_mhz

p = DeviceParams()
res = flux_spectroscopy(p, np.linspace(0, 0.5, 11))
print("branches start as:", res.labels)
print(np.c_[res.phi, to_ghz(res.branches)])

# %%
for mode in ("c", "f"):
    gap, phi = crossing_gap(p, mode)
    print(f"{mode}: minimum splitting {to_mhz(gap):.1f} MHz at phi = {phi:.4f}")
