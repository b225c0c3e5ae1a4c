"""Velocity kernels and the four model constants for the two built-in equilibria.

Prints tau0^2 by its three independent routes, then samples kappa(u) and q(u)
and checks the memory kernel slope K'(0) = tau0^2.
"""
import numpy as np

from vm_landau import equilibrium as eqm
from vm_landau import kernels as ker

for eq in (eqm.maxwellian(), eqm.powerlaw(4.0)):
    c = eq.constants
    print(f"{eq.spec.kind}: tau0^2={c.tau0_sq:.12f} tau1^2={c.tau1_sq:.12f} "
          f"kappa0^2={c.kappa0_sq:.12f} q0^2={c.q0_sq:.12f}")
    print("  tau0^2 routes:", ", ".join(f"{v:.12f}" for v in eqm.tau0_sq_routes(eq)))
    u = np.linspace(-0.95, 0.95, 5)
    print("  kappa(u):", np.array2string(ker.kappa(eq, u), precision=5))
    print("  q(u):    ", np.array2string(ker.q_kernel(eq, u), precision=5))
    dt = 1e-5
    slope = (ker.memory_K(eq, 1.0, dt) - ker.memory_K(eq, 1.0, 0.0)).real / dt
    print(f"  K'(0) ~ {slope:.6f}")
