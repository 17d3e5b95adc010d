"""Boundary-driven circularly symmetric viscous flow in the disk and the annulus.

The velocity of a swirl flow is ``s(r) x^perp``; profiles store the
tangential speed ``v(r) = r s(r)``.  Modules:

basis        Bessel eigenbases of the Dirichlet and Neumann problems
field        radial grids, profiles, spectral fields and norms
semigroup    the heat semigroup and fractional powers
driving      boundary motions and their integrals
duhamel      the driven solution on the disk and the annulus
vorticity    mass, flux, L1 bounds and boundary concentration
pressure     pressure from the radial momentum balance
layerpot     heat double-layer potentials on the circle
stochastic   Brownian boundary motion and the Ito variance identity
experiments  rate fits and reproduction experiments
cli          command-line entry point
"""
from .basis import DISK, EigenBasis, Geometry, annulus, basis_for, bessel_zeros, dirichlet_swirl_basis
from .driving import DrivingMotion, bv, parse_alpha, ramp, smooth, step, zero
from .duhamel import SwirlBoundaryData, annulus_data, disk_data, f1_profile, f2_profile, solve, solve_flow
from .field import RadialProfile, SpectralField, default_grid, sobolev_norm, synthesize, to_spectral
from .semigroup import EvolutionParams, evolve
from .vorticity import curl, total_mass

__version__ = "0.1.0"
