"""Convergence rates of cyclic alternating projections.

Computes f_n(c), the best rate bound for ‖P_n...P_1‖ given the Dixmier
number c of n subspaces, together with closed forms and bounds for it.
"""
from .fn_solver import FeasibleSpec, SolveResult, maximize_product
from .subspaces import Subspace, SubspaceSystem, dixmier_number, friedrichs_number

__all__ = [
    "FeasibleSpec",
    "SolveResult",
    "Subspace",
    "SubspaceSystem",
    "dixmier_number",
    "friedrichs_number",
    "maximize_product",
]
