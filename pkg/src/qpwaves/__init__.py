"""Quasi-periodic standing waves of the cubic nonlinear Schrodinger equation.

Profiles are computed two ways: by integrating the profile ODE from its
invariants (J, E), and as constrained energy minimizers found by a gradient
flow that renormalizes mass and momentum together.
"""

__version__ = "0.1.0"
