"""
Heavy-tailed targets with local proposals
Tail mu(B(0, rho)^c) = rho^-t and locality b(K) >= 1 - D K^-eta
"""

from dataclasses import dataclass

import numpy as np

from chains.conductance import KappaPower
from errors import DomainError
from rates.monotone import PowerLaw

PROBE_LEVELS = (1e-4, 1e-6, 1e-8)


@dataclass(frozen=True)
class HeavyTailFloor:
    exponent: float
    floor: PowerLaw
    kappa_envelope: KappaPower
    bracket_limit: float
    bracket_values: np.ndarray


def scaled_bracket(v, t: float, eta: float, D: float):
    """eps^-1 {1 - (1 - D eps) / (1 + eps)^t} with eps = v^((1/t) eta/(eta+1)); tends to t + D"""
    v = np.asarray(v, dtype=float)
    eps = v ** ((1.0 / t) * eta / (eta + 1.0))
    return (1.0 - (1.0 - D * eps) / (1.0 + eps) ** t) / eps


def heavy_tail_floor(t: float, eta: float, D: float) -> HeavyTailFloor:
    """
    kappa(u) <~ c u^theta with c = 2 (t + D), theta = (1/t) eta/(eta+1). Then
    alpha*(r) >= 1/(2 kappa(2r)) >= C r^-theta with C = 1 / (2^(1+theta) c), and
    beta*(s) >= (C/s)^(1/theta), an s^-t(eta+1)/eta floor for small u.

    The bracket limit is extrapolated linearly in eps from v in {1e-4, 1e-6, 1e-8}.
    """
    if min(t, eta, D) <= 0:
        raise DomainError("t, eta and D must be positive")
    theta = (1.0 / t) * eta / (eta + 1.0)
    v = np.asarray(PROBE_LEVELS)
    values = scaled_bracket(v, t, eta, D)
    eps = v ** theta
    slope, intercept = np.polyfit(eps, values, 1)
    exponent = t * (eta + 1.0) / eta
    envelope = KappaPower(c=2.0 * (t + D), theta=theta)
    C = 1.0 / (2.0 ** (1.0 + theta) * envelope.c)
    return HeavyTailFloor(exponent=exponent, floor=PowerLaw(c=C ** exponent, p=exponent), kappa_envelope=envelope,
                          bracket_limit=float(intercept), bracket_values=values)
