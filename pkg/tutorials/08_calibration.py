"""
Fitting data
============

Least-squares fitters for ringdowns, lines, avoided crossings and the
tuning curve.  Each returns estimates with 1-sigma errors.
"""

# %%
import numpy as np

from dissipator.calibration import (
    anticrossing_branches,
    fit_avoided_crossing,
    fit_exponential,
    fit_flux_curve,
    infer_coupling_from_chi,
)
from dissipator.model import DeviceParams, bias_for_frequency, flux_curve
from dissipator.units import ghz, khz, mhz, to_ghz, to_mhz

rng = np.random.default_rng(0)

# %%
# A noisy ringdown.
t = np.linspace(0, 5 / 57.4, 100)
fit = fit_exponential(t, 39 * np.exp(-57.4 * t) + rng.normal(0, 0.1, t.size))
print(f"rate = {fit['rate']:.2f} +- {fit.error('rate'):.2f} /us, R^2 = {fit.r_squared:.4f}")

# %%
# Branches near a crossing with the cavity; the tunable mode follows a known curve.
flux = {"omega_max": ghz(15.3), "alpha": mhz(-350), "d": 0.085}
phi_x = bias_for_frequency(DeviceParams(), ghz(5.594))
phi = np.linspace(phi_x - 0.02, phi_x + 0.02, 41)
lo, hi = anticrossing_branches(flux_curve(phi, **flux), ghz(5.594), mhz(118))
hi = hi + rng.normal(0, mhz(2), phi.size)
res = fit_avoided_crossing(phi, np.column_stack([lo, hi]), flux)
print(f"g/2pi = {to_mhz(res['g']):.1f} +- {to_mhz(res.error('g')):.1f} MHz")

# %%
# The tuning curve from a handful of crossing locations, anharmonicity pinned.
pts = np.array([[x, flux_curve(x, **flux)] for x in (0.15, 0.25, 0.33, 0.38, 0.44)])
curve = fit_flux_curve(pts, alpha=flux["alpha"])
print(f"omega_max/2pi = {to_ghz(curve['omega_max']):.3f} GHz, d = {curve['d']:.4f}")

# %%
g_q = infer_coupling_from_chi(khz(200), ghz(3.368), ghz(5.594), mhz(-172))
print(f"qubit-cavity coupling from the dispersive shift: {to_mhz(g_q):.1f} MHz")
