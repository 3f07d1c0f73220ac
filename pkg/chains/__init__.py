"""
Exact computations on finite state spaces
"""

from chains.cheeger import cheeger_alpha_rate, cheeger_converse, cheeger_wpi, dirichlet_pp_bounds, lift_to_product
from chains.conductance import ConductanceProfile, map_subsets, weak_conductance
from chains.kernel import (
    ChainSpec,
    FiniteKernel,
    Observable,
    additive_reversibilization,
    adjoint,
    dirichlet_form,
    lazy,
    multiplicative_reversibilization,
    pn_decay,
    set_flow,
)
from chains.optimal import (
    alpha_star_values,
    beta_star_lower,
    beta_star_values,
    holding_beta_minus,
    phi_beta_eval,
    psi_sandwich,
    sticky_candidates,
    sticky_polynomial_floor,
)
from chains.reachability import RupiReport, rupi_check, zero_energy_witness
from chains.restriction import restrict, restricted_gap, wpi_from_restrictions
from chains.spectral import SpectralMeasure, exact_asymptotic_variance, spectral_gap, spectral_measure

__all__ = [
    "cheeger_alpha_rate", "cheeger_converse", "cheeger_wpi", "dirichlet_pp_bounds", "lift_to_product",
    "ConductanceProfile", "map_subsets", "weak_conductance", "ChainSpec", "FiniteKernel", "Observable",
    "additive_reversibilization", "adjoint", "dirichlet_form", "lazy", "multiplicative_reversibilization",
    "pn_decay", "set_flow", "alpha_star_values", "beta_star_lower", "beta_star_values", "holding_beta_minus",
    "phi_beta_eval", "psi_sandwich", "sticky_candidates", "sticky_polynomial_floor", "RupiReport",
    "rupi_check", "zero_energy_witness", "restrict", "restricted_gap", "wpi_from_restrictions",
    "SpectralMeasure", "exact_asymptotic_variance", "spectral_gap", "spectral_measure",
]
