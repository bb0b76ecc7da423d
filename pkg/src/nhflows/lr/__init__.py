"""LR systems and the Veselova family."""
from .general import LrState, LrSystem, lr_measure_density, lr_rhs
from .maupertuis import MaupertuisReport, maupertuis_check, run_maupertuis
from .neumann import Neumann, f0_integral, neumann_rhs, neumann_to_veselova, veselova_to_neumann
from .quadric import (
    QuadricGeodesic,
    knorrer_map,
    moser_lax,
    moser_lax_partner,
    quadric_geodesic_rhs,
    reconstruct_frame,
)
from .spheroconic import (
    fit_constants,
    quadrature_residual,
    spheroconic_coords,
    spheroconic_rates,
    spheroconic_to_q2,
    stackel_lagrangian,
)
from .veselova import (
    ReducedVeselova,
    SpherePotential,
    Veselova3,
    Veselova3Potential,
    chaplygin_reparameterize,
    lagrange_momenta,
    reduced_measure_density,
    reduced_potential_rhs,
    reduced_veselova_rhs,
    veselova3_rhs,
)
