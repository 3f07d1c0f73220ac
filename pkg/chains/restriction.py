"""
Restrictions P_C and WPIs from vanishing restricted gaps
"""

import warnings
from typing import Dict, List, Optional, Sequence

import numpy as np

from chains.kernel import FiniteKernel, dirichlet_form
from chains.spectral import spectral_gap
from errors import BoundViolation, DomainError, EmptyRestriction, WpiWarning
from rates.certificates import WpiCertificate, beta_certificate
from rates.monotone import Constant, PowerLaw, Tabulated


def _as_states(P: FiniteKernel, C) -> np.ndarray:
    states = np.unique(np.asarray(list(C), dtype=int))
    if states.size == 0 or P.mu[states].sum() <= 0:
        raise EmptyRestriction("the restriction set has no mass", witness=states.tolist())
    if states.min() < 0 or states.max() >= P.n:
        raise DomainError("restriction set references unknown states")
    return states


def restrict(P: FiniteKernel, C) -> FiniteKernel:
    """
    P_C f(x) = P(f 1_C)(x) + f(x) P(x, C^c) on C.
    mu_C-reversible when P is reversible; otherwise the invariant law is recomputed.
    """
    states = _as_states(P, C)
    if len(states) == P.n:
        return P
    sub = P.matrix[np.ix_(states, states)].copy()
    sub[np.diag_indices_from(sub)] += 1.0 - sub.sum(axis=1)
    if P.is_reversible():
        return FiniteKernel.from_matrix(sub, P.mu[states] / P.mu[states].sum())
    warnings.warn("restriction of a nonreversible kernel need not keep mu_C invariant", WpiWarning)
    return FiniteKernel.from_matrix(sub)


def restricted_gap(P: FiniteKernel, C) -> Optional[float]:
    """Right spectral gap of P_C; None (with a warning) for nonreversible P"""
    if not P.is_reversible():
        warnings.warn("restricted gap skipped: P is not reversible", WpiWarning)
        return None
    return spectral_gap(restrict(P, C))


def restriction_table(P: FiniteKernel, family: Sequence) -> List[Dict[str, object]]:
    """Per set: mu(A), mu(A^c), gamma_P(A) and the s from which beta(s) <= mu(A^c)"""
    rows = []
    for A in family:
        states = _as_states(P, A)
        mass = 1.0 if len(states) == P.n else min(1.0, float(P.mu[states].sum()))
        gap = restricted_gap(P, states)
        if gap is None:
            continue
        threshold = mass / gap if gap > 0 else float("inf")
        rows.append({"states": states.tolist(), "mass": mass, "outside": max(0.0, 1.0 - mass),
                     "gap": gap, "threshold": threshold})
    return rows


def wpi_from_restrictions(P: FiniteKernel, family: Sequence) -> WpiCertificate:
    """
    beta(s) = 1 ^ inf{mu(A^c) : gamma_P(A) >= mu(A)/s} over the supplied family.

    A set enters at s = mu(A)/gamma_P(A); the certificate is the resulting step function.
    """
    rows = [r for r in restriction_table(P, family) if np.isfinite(r["threshold"])]
    if not rows:
        return beta_certificate(Constant(c=1.0), source="restrictions")
    rows.sort(key=lambda r: r["threshold"])
    grid, values = [], []
    best = 1.0
    for r in rows:
        best = min(best, r["outside"])
        if grid and r["threshold"] <= grid[-1]:
            values[-1] = best
            continue
        grid.append(r["threshold"])
        values.append(best)
    rate = Tabulated(grid=grid, values=values, below=1.0)
    return beta_certificate(rate, source="restrictions")


def restriction_alpha_check(P: FiniteKernel, A, functions) -> float:
    """
    Check mu(A) E(P_A, f) <= E(P, f) <= mu(A) E(P_A, f) + mu(A^c) Phi(f) on the
    given functions (Dirichlet forms of P_A taken under mu_A). Returns the smallest slack.
    """
    states = _as_states(P, A)
    mass = float(P.mu[states].sum())
    PA = restrict(P, states)
    slack = np.inf
    for f in functions:
        f = np.asarray(f, dtype=float)
        e_full = dirichlet_form(P, f)
        e_restr = mass * dirichlet_form(PA, f[states])
        phi = float(np.ptp(f[P.mu > 0])) ** 2
        low = e_full - e_restr
        high = e_restr + (1.0 - mass) * phi - e_full
        if min(low, high) < -1e-12:
            raise BoundViolation("restriction sandwich fails", witness={"states": states.tolist(), "low": low, "high": high})
        slack = min(slack, low, high)
    return float(slack)


def nested_family_beta(C: float, D: float, a: float, b: float) -> PowerLaw:
    """beta(s) = D (C s)^(-b/a) when gamma_P(A_t) >= C t^-a and mu(A_t^c) <= D t^-b"""
    if min(C, D, a, b) <= 0:
        raise DomainError("C, D, a and b must be positive")
    p = b / a
    return PowerLaw(c=D * C ** (-p), p=p)
