"""A single Fourier mode evolved from kinetic initial data.

The reduced density is solved by the resolvent and directly as a Volterra
equation, then compared with a full velocity-grid kinetic simulation.  The
last part evaluates the physical-space free-transport source for separable
data and prints its t^-3 dispersion and conserved mass.
"""
import numpy as np

from vm_landau import equilibrium as eqm
from vm_landau import green as grn
from vm_landau import solver as slv

eq = eqm.maxwellian()
k = 0.5
data = slv.ModeInitialData(k, slv.profile(eq, "kappa"), slv.profile(eq, "q"), A0=1.0, A1=0.0)
grid = grn.TimeGrid(5e-3, 10000)
out = slv.compare_with_oracle(eq, data, grid)
for name, v in out.discrepancy.items():
    print(f"{name:12s} {v:.2e}")
print("recurrence time of the oracle grid:", round(slv.recurrence_time(k, slv.ORACLE_NODES), 1))

sep = slv.SeparableData(eq.phi, 1.0)
for t in (5.0, 20.0, 80.0):
    r = np.linspace(0.0, t + 4.0, 200)
    peak = np.max(slv.physical_S(sep, t, r))
    print(f"t={t:5.1f}  sup S * t^3 = {peak * t ** 3:.4f}  mass = {slv.physical_mass(sep, t):.12f}")
