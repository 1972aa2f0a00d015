"""
Closed-form budget: temperatures, occupations and dephasing
===========================================================

Everything here is a direct formula evaluation, so it runs instantly.
Frequencies are angular (rad/us); the ``units`` helpers do the 2 pi.
"""

# %%
import numpy as np

from dissipator import analytics
from dissipator.model import DeviceParams
from dissipator.units import ghz, khz, to_mhz

p = DeviceParams()

# %%
# A 5.594 GHz mode in equilibrium with a 115 mK bath holds about a tenth
# of a photon.
n_hot = analytics.thermal_occupation(ghz(5.594), 0.115)
print(f"n(115 mK) = {n_hot:.4f}")

# %%
# Swapping photons with a lossy mode at 8.6 GHz pulls the cavity toward
# that mode's (colder, in the cavity's frame) effective temperature.  With
# an exchange loss of 54 /us against the 3 /us intrinsic loss:
T = analytics.driven_cavity_temperature(p.replace(kappa_c=3.0), 54.0)
n_cold = analytics.thermal_occupation(p.omega_c, T)
print(f"cavity temperature = {T * 1e3:.1f} mK, n = {n_cold:.4f}")

# %%
# Residual photons dephase a dispersively coupled qubit.  The per-photon
# rate depends on the total cavity linewidth, so opening the exchange
# channel helps twice: fewer photons, each one less harmful.
for kappa, n in ((p.kappa_c, n_hot), (57.0, n_cold)):
    rate = analytics.photon_dephasing(p.chi, kappa, n, analytics.THERMAL)
    print(f"kappa = {kappa:6.2f} /us, n = {n:.3f}: Gamma_phi = {rate * 1e3:7.3f} /ms")

# %%
# Exchange loss versus parametric coupling.  Below kappa_diss / 4 the swap
# is overdamped and the loss grows as g^2; above it the cavity inherits
# half the dissipator linewidth.
for g_mhz in (2, 5, 11, 15, 30):
    loss = analytics.effective_loss(2 * np.pi * g_mhz, p.kappa_diss)
    print(f"g_p/2pi = {g_mhz:3d} MHz -> kappa_eff = {loss.rate:7.2f} /us ({loss.regime})")

# %%
# Whether the exchange cools at all is a sign law on the bath rates.
cav = analytics.BathRates.thermal(p.kappa_c, n_hot)
diss = analytics.BathRates.thermal(p.kappa_diss, 0.01)
print("cools:", analytics.cools(cav, diss), " shift at 54 /us:", analytics.cooling_shift(cav, diss, 54.0))
print(f"chi/2pi = {to_mhz(p.chi) * 1e3:.0f} kHz, kappa_c/2pi = {to_mhz(p.kappa_c) * 1e3:.0f} kHz")
