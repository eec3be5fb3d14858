"""Regularized inertial phase-field solver with temperature coupling.

A 1D cell-centered finite-volume discretization of the doubly regularized
(Yosida in space and in the nonlinearity) system, fixed-step integrators,
runtime ledgers for its conservation and energy laws, and sweep tooling for
the vanishing-parameter limits.
"""

__version__ = "0.1.0"
