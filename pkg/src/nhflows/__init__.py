"""Nonholonomic geodesic flows on SO(n): simulation and verification.

Subpackages and modules:

* ``liealg``: so(n) in the wedge basis
* ``operators``: inertia operators and constraint distributions
* ``eps``: left-invariant constraints (Euler-Poincare-Suslov flows)
* ``lr``: right-invariant constraints, Veselova and Neumann systems
* ``lplusr``: left plus right-invariant metrics, Chaplygin sphere
* ``integrate``: RK4 engine, monitors, measures, reparameterization
* ``scenarios`` / ``cli``: named verification runs
"""

__version__ = "0.1.0"
