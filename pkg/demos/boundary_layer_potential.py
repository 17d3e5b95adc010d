"""
The boundary layer as a heat potential
======================================

For short times the wall-driven flow is a double-layer heat potential with
a density h solving a Volterra equation of the second kind on the circle,
(I/2 + N) h = g.  Its leading term 2 D g already captures the layer to
O(t^(1/2)), and the interior is flat to all orders.
"""

import numpy as np

from swirlflow.duhamel import disk_data, solve_flow
from swirlflow.driving import step
from swirlflow.layerpot import BoundaryDensity, double_layer_eval, solve_bie

T = 1e-2
g = BoundaryDensity.step(T=T)
stepping = solve_bie(g, mode="stepping")
series = solve_bie(g, mode="series", k=6)
print(f"density at t = T: stepping {stepping.density.values[-1]:.8f}, series {series.density.values[-1]:.8f}")

# compare with the spectral solution for a step rotation, nu = 1
r = np.array([0.9, 0.97, 0.99, 0.999])
for tau in (1e-4, 1e-3, 1e-2):
    bie = double_layer_eval(stepping.density, tau, r)
    spec = solve_flow(None, disk_data(step()), 1.0, tau).velocity(r)
    lead = 2.0 * double_layer_eval(g, tau, r)
    print(f"t={tau:.0e}  |Dh - V| = {np.max(np.abs(bie - spec)):.1e}   |2Dg - V| = {np.max(np.abs(lead - spec)):.1e}")

# away from the wall the potential is exponentially small in 1/t
for tau in (1e-3, 3e-3, 1e-2):
    print(f"t={tau:.0e}  V(0.5) = {double_layer_eval(stepping.density, tau, [0.5])[0]:.3e}")
