"""
Ringdown spectroscopy
=====================

Sweep the modulation frequency across the detuning and the exchange rate
from zero up, fit each simulated ringdown, and look for the ridge.
"""

# %%
import numpy as np

from dissipator.experiments import Axis, SweepGrid, ringdown_spectroscopy
from dissipator.model import DeviceParams
from dissipator.units import mhz, to_mhz

p = DeviceParams()
offsets = np.linspace(-150, 150, 21)
grid = SweepGrid((Axis("omega_p", "rad/us", abs(p.delta) + mhz(offsets)),
                  Axis("g_p", "rad/us", mhz(np.linspace(0, 11, 11)))))
res = ringdown_spectroscopy(p, grid)

# %%
# Rate map, rows are drive frequency offsets, columns exchange rate.
np.set_printoptions(precision=1, suppress=True, linewidth=140)
print(np.c_[offsets, res.rates])

# %%
# On resonance the excess rate is close to linear in drive power (g_p^2)
# while the swap stays overdamped.
g = grid.axis("g_p").values
excess = res.rates[10] - p.kappa_c
print("excess / (g_p/2pi)^2 [/us per MHz^2]:", np.round(excess[1:] / to_mhz(g[1:]) ** 2, 3))
print(f"rate at 11 MHz: {res.rates[10, -1]:.1f} +- {res.uncertainties[10, -1]:.2f} /us")
