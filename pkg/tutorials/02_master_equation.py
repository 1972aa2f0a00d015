"""
Lindblad evolution and steady states
====================================

The dynamics module integrates dense master equations with a fixed-step
RK4 scheme and solves for steady states from the Liouvillian null space.
"""

# %%
import numpy as np

from dissipator import analytics
from dissipator.dynamics import LindbladSystem, coherent_ringdown, evolve, steady_state
from dissipator.model import thermal_collapse_pair
from dissipator.quantum import DensityMatrix, HilbertSpace, ModeSpec, annihilation, fock_dm, number
from dissipator.units import mhz

# %%
# One damped mode, one photon: <n> should fall as exp(-kappa t).
space = HilbertSpace([ModeSpec.bosonic("c", 3)])
a = annihilation(space, "c")
system = LindbladSystem(number(space, "c") * 0.0, [a * np.sqrt(3.0)])
t = np.linspace(0, 1, 6)
trace = evolve(system, DensityMatrix(space, fock_dm(3, 1)), t, {"n": number(space, "c")})
print(np.c_[t, trace["n"], np.exp(-3 * t)])
print("step used:", trace.metadata["max_step_us"], "us")

# %%
# Coherent states never leave the coherent manifold under pure loss, so
# large photon numbers are handled analytically.
print(coherent_ringdown(39.8, 57.4, [0.0, 0.0174, 0.05])["n"])

# %%
# Two modes swapping at g, each tied to its own bath.  The numerical steady
# state should agree with the detailed-balance pair at kappa_eff = 4 g^2 / (ka + kb).
ka, na, kb, nb, g = 3.0, 0.107, 377.0, 0.03, mhz(5)
two = HilbertSpace([ModeSpec.bosonic("a", 6), ModeSpec.bosonic("b", 6)])
A, B = annihilation(two, "a"), annihilation(two, "b")
system = LindbladSystem((A.dag() @ B + A @ B.dag()) * g,
                        thermal_collapse_pair(two, "a", ka, na) + thermal_collapse_pair(two, "b", kb, nb))
rho = steady_state(system)
n_num = np.real(np.trace(rho.matrix @ number(two, "a").matrix))
n_bal = analytics.driven_balance(analytics.BathRates.thermal(ka, na), analytics.BathRates.thermal(kb, nb),
                                 4 * g * g / (ka + kb)).n_c
print(f"steady state n_a = {n_num:.5f}, detailed balance = {n_bal:.5f}")
