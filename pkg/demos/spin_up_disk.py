"""
Spinning up a disk from rest
============================

The wall of the unit disk starts rotating at t = 0 with unit angular
velocity.  The fluid inside catches up through a boundary layer of width
about sqrt(nu t), and in the zero-viscosity limit all the vorticity piles
up on the wall as a vortex sheet.
"""

import numpy as np

from swirlflow.driving import step
from swirlflow.duhamel import disk_data, solve_flow
from swirlflow.experiments import rate_fit
from swirlflow.vorticity import concentration_limit, total_mass

bc = disk_data(step())
t = 1.0

# the speed near the wall for a few viscosities
r = np.array([0.5, 0.9, 0.99, 0.999, 1.0])
print("r       " + "  ".join(f"{x:9.3f}" for x in r))
for nu in (1e-2, 1e-4, 1e-6):
    v = solve_flow(None, bc, nu, t).velocity(r)
    print(f"nu={nu:.0e} " + "  ".join(f"{x:9.2e}" for x in v))

# the wall speed is always 1/2pi; the interior stays at rest as nu -> 0
# and the L2 size of the flow shrinks like nu^(1/4)
nus = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6]
norms = [solve_flow(None, bc, nu, t).forced_sobolev(0.0) for nu in nus]
slope, _, _ = rate_fit(list(zip(nus, norms)))
print(f"\nL2 norm slope in nu: {slope:.4f} (expected 1/4)")

# total vorticity equals the wall's angular velocity, whatever nu is
for nu in nus[::2]:
    print(f"nu={nu:.0e}  int w = {total_mass(solve_flow(None, bc, nu, t).vorticity_profile()):.12f}")

# shells of width nu^0.4 next to the wall carry all of it in the limit
rep = concentration_limit(None, bc, nus, t)
print(f"\nextrapolated wall atom {rep.extrapolated_atoms[0]:.4f}, predicted {rep.predicted_atoms[0]:.4f}")
print(f"interior L1 left over  {rep.interior_l1_discrepancy:.2e}")
