"""
Cheeger-type certificates
alpha(r) = 16 / kappa(r/16)^2 from a conductance profile, its converse check, and the P*P lift
"""

from typing import Dict, Optional

import numpy as np

from chains.conductance import ConductanceProfile, weak_conductance
from chains.kernel import FiniteKernel, dirichlet_form, multiplicative_reversibilization
from errors import AssumptionViolated, BoundViolation, NotReversible, ZeroConductance
from rates.certificates import WpiCertificate, alpha_certificate
from rates.monotone import Tabulated, scale_rate, stretch_rate

INF = float("inf")
SLACK = 1e-12


def cheeger_alpha_rate(profile: ConductanceProfile) -> Tabulated:
    """Step alpha(r) = 16 / kappa(r/16)^2, zero once kappa is infinite"""
    if profile.ratios.size == 0 or profile.kappa0 <= 0:
        witness = profile.witnesses[0] if profile.witnesses else None
        raise ZeroConductance("kappa(0) = 0: the chain is reducible", witness=witness)
    levels = 16.0 * profile.levels
    values = 16.0 / profile.ratios ** 2
    return Tabulated(grid=levels.tolist(), values=np.append(values[1:], 0.0).tolist(), below=float(values[0]))


def cheeger_wpi(P: FiniteKernel, profile: Optional[ConductanceProfile] = None) -> WpiCertificate:
    """Alpha-form WPI for a reversible P from its exhaustive conductance profile"""
    if not P.is_reversible():
        raise NotReversible("cheeger_wpi needs a reversible kernel")
    if profile is None:
        profile = weak_conductance(P)
    return alpha_certificate(cheeger_alpha_rate(profile), source="cheeger")


def cheeger_converse(cert: WpiCertificate, profile: ConductanceProfile, r_grid=None) -> Dict[str, object]:
    """
    Check 1/alpha(r) <= 2 kappa(2r) on a grid.

    Raises:
        BoundViolation with the first offending r.
    """
    if r_grid is None:
        r_grid = np.geomspace(1e-4, 0.5, 50)
    r = np.asarray(r_grid, dtype=float)
    alpha = np.asarray(cert.rate(r), dtype=float)
    with np.errstate(divide="ignore"):
        lhs = np.where(alpha > 0, 1.0 / alpha, INF)
    rhs = 2.0 * profile.kappa(2.0 * r)
    finite = np.isfinite(lhs)
    bad = finite & (lhs > rhs * (1 + 1e-9) + SLACK)
    if bad.any():
        i = int(np.argmax(bad))
        raise BoundViolation(f"1/alpha(r) = {lhs[i]:.6g} exceeds 2 kappa(2r) = {rhs[i]:.6g}", witness={"r": float(r[i])})
    return {"r": r, "inverse_alpha": lhs, "two_kappa": rhs, "holds": True}


def dirichlet_pp_bounds(P: FiniteKernel, f) -> tuple:
    """
    (E(P, f), E(P*P, f)), checking E(P*P, f) <= 2 E(P, f) and, when every
    holding probability is at least eps > 0, E(P*P, f) >= 2 eps E(P, f).
    """
    e_p = dirichlet_form(P, f)
    e_pp = dirichlet_form(multiplicative_reversibilization(P), f)
    scale = max(1.0, abs(e_p))
    if e_pp > 2 * e_p + SLACK * scale:
        raise BoundViolation("E(P*P, f) > 2 E(P, f)", witness={"E_P": e_p, "E_PP": e_pp})
    eps = P.min_holding()
    if eps > 0 and e_pp < 2 * eps * e_p - SLACK * scale:
        raise BoundViolation("E(P*P, f) < 2 eps E(P, f)", witness={"E_P": e_p, "E_PP": e_pp, "eps": eps})
    return e_p, e_pp


def lift_to_product(cert: WpiCertificate, holding: float) -> WpiCertificate:
    """
    WPI for P*P from one for P when P(x, {x}) >= holding > 0, using E(P*P, f) >= 2 holding E(P, f).
    alpha scales by 1/(2 holding); beta is read at s * 2 holding.
    """
    if holding <= 0:
        raise AssumptionViolated("P has a state with zero holding probability", witness=holding)
    factor = max(1.0, 1.0 / (2.0 * holding))
    if cert.parametrization == "alpha":
        rate = scale_rate(cert.rate, factor)
    else:
        rate = stretch_rate(cert.rate, factor)
    return cert.model_copy(update={"rate": rate, "kernel": "P*P", "source": f"{cert.source or 'wpi'}+holding"})
