"""
Refrigerating a warm cavity
===========================

Echo decoherence of the qubit as the exchange is turned up, with and
without extra coherent photons injected into the cavity.
"""

# %%
import numpy as np

from dissipator.experiments import refrigeration_experiment
from dissipator.model import DeviceParams
from dissipator.units import mhz, to_mhz

g_p = mhz(np.linspace(0, 20, 11))
n_inj = [0.0, 0.14, 0.35, 1.10]
res = refrigeration_experiment(DeviceParams(), g_p, n_inj)

# %%
print("g_p/2pi [MHz] | Gamma_2E [/us] for n_inj =", n_inj)
for g, row in zip(g_p, res.gamma_2e):
    print(f"{to_mhz(g):6.1f}        ", "  ".join(f"{x:.4f}" for x in row))

# %%
# The thermal part of the cavity population falls as the exchange grows.
print("thermal photons:", res.n_thermal[:, 0])
