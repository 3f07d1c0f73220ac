"""
Rate calculus for weak Poincare inequalities
"""

from rates.certificates import (
    OSC,
    Sieve,
    WpiCertificate,
    alpha_certificate,
    alpha_to_beta,
    beta_certificate,
    beta_to_alpha,
)
from rates.conjugate import (
    Conjugate,
    EnvelopeConjugate,
    PowerConjugate,
    beta_from_conjugate,
    k_transform,
)
from rates.derived import (
    OrderingReport,
    asym_var_bound,
    gamma_p_extend,
    order_rates,
    spectral_mass_bound,
    square_wpi,
)
from rates.monotone import (
    Capped,
    Clipped,
    Constant,
    ExpPower,
    InverseOf,
    MonotoneRate,
    PowerLaw,
    Tabulated,
    generalized_inverse,
    log_grid,
    parse_rate,
    parse_rate_flag,
    scale_rate,
    stretch_rate,
)
from rates.profiles import (
    ConvergenceProfile,
    beta_from_gamma,
    gamma_from_beta,
    iterate_bound,
)

__all__ = [
    "OSC", "Sieve", "WpiCertificate", "alpha_certificate", "alpha_to_beta", "beta_certificate",
    "beta_to_alpha", "Conjugate", "EnvelopeConjugate", "PowerConjugate", "beta_from_conjugate",
    "k_transform", "OrderingReport", "asym_var_bound", "gamma_p_extend", "order_rates",
    "spectral_mass_bound", "square_wpi", "Capped", "Clipped", "Constant", "ExpPower", "InverseOf",
    "MonotoneRate", "PowerLaw", "Tabulated", "generalized_inverse", "log_grid", "parse_rate",
    "parse_rate_flag", "scale_rate", "stretch_rate", "ConvergenceProfile", "beta_from_gamma", "gamma_from_beta",
    "iterate_bound",
]
