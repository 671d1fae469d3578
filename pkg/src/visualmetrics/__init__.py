"""Boundary geometry of strictly pseudoconvex domains.

Levi forms and Carnot-Caratheodory distances on the boundary, invariant
Finsler metrics inside, hyperbolic fillings with their visual boundary
functions, and distortion audits of boundary maps, together with a
scenario-based verification CLI (``visualmetrics``).
"""

__version__ = "0.1.0"

__all__ = ["__version__"]
