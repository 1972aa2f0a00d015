"""
Cavity reset after readout
==========================

After a readout pulse leaves ~40 photons behind, the qubit dephases until
they leak out.  Opening the exchange channel shortens that wait.
"""

# %%
import numpy as np

from dissipator.experiments import reset_experiment
from dissipator.model import DeviceParams
from dissipator.units import mhz

p = DeviceParams()
tau = np.linspace(0, 3, 3001)
driven = reset_experiment(p, mhz(10), 39.8, tau)
passive = reset_experiment(p, None, 39.8, tau)

# %%
for name, r in (("driven", driven), ("passive", passive)):
    print(f"{name:8s} gamma_cav = {r.gamma_cav:6.2f} /us  recovery = {r.recovery_time * 1e3:7.1f} ns")
print(f"speed-up: {passive.recovery_time / driven.recovery_time:.1f}x")

# %%
# The dephasing curve itself, sampled every 100 ns.
print(np.c_[tau[::100], driven.gamma_2[::100], passive.gamma_2[::100]])
