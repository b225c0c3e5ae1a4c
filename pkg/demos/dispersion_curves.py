"""Electric and magnetic mode curves.

Below kappa0 the electric mode is a real frequency tau*(k); past it the root
continues into the damped half plane.  The magnetic branch nu*(k) stays in the
band tau0^2 + k^2 <= nu*^2 <= q0^2 + k^2.  Winding numbers on a few boxes in the
right half plane show there are no growing modes.
"""
import numpy as np

from vm_landau import dispersion as dsp
from vm_landau import equilibrium as eqm

eq = eqm.maxwellian()
c = eq.constants
print(f"kappa0 = {np.sqrt(c.kappa0_sq):.6f}")
for k in (0.25, 0.5, 0.9, 1.05, 2.0):
    nu = dsp.nu_star(eq, k)
    lo, hi = np.sqrt(c.tau0_sq + k * k), np.sqrt(c.q0_sq + k * k)
    if k < np.sqrt(c.kappa0_sq):
        el = f"tau*={dsp.tau_star(eq, k):.6f}"
    elif k < 1.1:
        lam = dsp.lambda_elec(eq, k)
        el = f"lambda+={lam.real:.3e}{lam.imag:+.6f}i"
    else:
        el = "no electric root"
    print(f"k={k:4.2f}  {el:32s} nu*={nu:.6f}  band [{lo:.4f}, {hi:.4f}]")

for rect in [(1e-3, 1.0, -2.0, 2.0), (1e-3, 20.0, -30.0, 30.0)]:
    w = [dsp.stability_winding(eq, 0.7, rect, which) for which in ("D", "M")]
    print("winding numbers on", rect, "->", w)
