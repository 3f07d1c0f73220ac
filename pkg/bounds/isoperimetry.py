"""
Conductance from isoperimetry
Kernels whose rows are (1 - eps)-close in TV at distance delta, on an
m-strongly log-concave target restricted to C
"""

import math
from typing import Tuple

from errors import DomainError

LOG2 = math.log(2.0)


def conductance_from_isoperimetry(eps: float, delta: float, m: float, mu_C: float = 1.0) -> Tuple[float, float]:
    """
    Returns the two prefactors

        min form:      mu x P(A x A^c) >= eps/4 min{1, (log2/8) delta sqrt(m)} min{mu(A n C), mu(A^c n C)}
        product form:  mu x P(A x A^c) >= (1/mu(C)) eps/4 min{1, (log2/4) delta sqrt(m)} mu(A n C) mu(A^c n C)

    With C the whole space the product prefactor is a lower bound on kappa(0).
    """
    if min(eps, delta, m) <= 0:
        raise DomainError("eps, delta and m must be positive")
    if not 0 < mu_C <= 1:
        raise DomainError("mu(C) must lie in (0, 1]")
    root = delta * math.sqrt(m)
    single = eps / 4.0 * min(1.0, LOG2 / 8.0 * root)
    product = eps / (4.0 * mu_C) * min(1.0, LOG2 / 4.0 * root)
    return single, product


def restricted_conductance(eps: float, delta: float, m: float, mu_C: float) -> float:
    """kappa_C(0) for the restriction to C, from the product form rescaled to mu_C"""
    _, product = conductance_from_isoperimetry(eps, delta, m, mu_C)
    # mu_C x mu_C(A x A^c) = mu(A n C) mu(A^c n C) / mu(C)^2 and the flow picks up 1/mu(C)
    return product * mu_C
