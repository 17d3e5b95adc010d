"""
Vorticity budget of a Taylor-Couette cell
=========================================

Two concentric cylinders, radii rho and 1, rotate with angular velocities
alpha1 (outer) and alpha2 (inner).  Stokes' theorem turns the total
vorticity into the circulation difference of the two walls,

    2 pi [r v]_rho^1 = alpha1 - rho^2 alpha2,

since the inner wall moves with speed alpha2 rho / (2 pi).  The identity
holds exactly at every viscosity and time.
"""

from swirlflow.driving import step, zero
from swirlflow.duhamel import annulus_data, solve_flow
from swirlflow.vorticity import total_mass

rho = 0.5
cases = {"outer only": (step(), zero()), "inner only": (zero(), step()), "both": (step(), step())}
print(f"{'case':12s} {'nu':>7s} {'int w':>16s} {'a1 - rho^2 a2':>14s} {'a1 - rho a2':>12s}")
for name, (a1, a2) in cases.items():
    for nu in (1e-2, 1e-5):
        m = total_mass(solve_flow(None, annulus_data(a1, a2, rho), nu, 1.0).vorticity_profile())
        print(f"{name:12s} {nu:7.0e} {m:16.12f} {a1(1.0) - rho**2 * a2(1.0):14.4f} {a1(1.0) - rho * a2(1.0):12.4f}")

# the measured budget tracks rho^2, not rho, whenever the inner wall moves
