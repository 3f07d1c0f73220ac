"""
WPI constructors from drift, minorization, isoperimetry and conductance
"""

from bounds.conductance import wpi_from_conductance
from bounds.drift import (
    DriftCondition,
    Geometric,
    PhiLog,
    PhiPower,
    Subgeometric,
    drift_beta_value,
    engineered_drift,
    spi_from_drift,
    verify_drift,
    wpi_from_drift,
)
from bounds.isoperimetry import conductance_from_isoperimetry, restricted_conductance
from bounds.local_pi import (
    LocalPI,
    local_pi_from_isoperimetry,
    local_pi_from_minorization,
    local_pi_from_restriction,
    verify_local_pi,
)

__all__ = [
    "wpi_from_conductance", "DriftCondition", "Geometric", "PhiLog", "PhiPower", "Subgeometric",
    "drift_beta_value", "engineered_drift", "spi_from_drift", "verify_drift", "wpi_from_drift", "conductance_from_isoperimetry",
    "restricted_conductance", "LocalPI", "local_pi_from_isoperimetry", "local_pi_from_minorization",
    "local_pi_from_restriction", "verify_local_pi",
]
