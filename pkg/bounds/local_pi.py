"""
Local Poincare inequalities
||f_m 1_C||^2 <= K E(P, f) with m = mu(f 1_C) / mu(C)
"""

from typing import List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from bounds.isoperimetry import restricted_conductance
from chains.kernel import FiniteKernel, dirichlet_form
from chains.restriction import restricted_gap
from config import get_settings
from errors import BoundViolation, DomainError, MinorizationFails, NotReversible, ZeroConductance

VERIFY_COUNT = 500
TOL = 1e-12


class LocalPI(BaseModel):
    model_config = ConfigDict(frozen=True)

    constant: float = Field(gt=0)
    C: Optional[List[int]] = None
    flavor: Literal["restricted", "local", "minorization", "isoperimetry"] = "local"
    epsilon: Optional[float] = None


def local_pi_from_minorization(epsilon: float, C=None, P: Optional[FiniteKernel] = None, nu=None) -> LocalPI:
    """
    P(x, .) >= eps nu on C gives K = 2/eps.

    With a kernel the minorization is checked row by row over C; without nu the
    best nu is the normalized column minimum over C.
    """
    if not 0 < epsilon <= 1:
        raise DomainError(f"epsilon must lie in (0, 1], got {epsilon}")
    states = None
    if C is not None:
        states = sorted({int(x) for x in C})
    if P is not None:
        rows = np.arange(P.n) if states is None else np.asarray(states)
        block = P.matrix[rows]
        if nu is None:
            floor = block.min(axis=0)
            if floor.sum() < epsilon - TOL:
                # the row sharing least mass with the average row on C
                worst = int(rows[np.argmin(np.minimum(block, block.mean(axis=0)).sum(axis=1))])
                raise MinorizationFails(f"rows on C share only {floor.sum():.6g} < {epsilon} of mass",
                                        witness={"row": worst, "overlap": float(floor.sum())})
        else:
            nu = np.asarray(nu, dtype=float)
            deficit = (block - epsilon * nu[None, :]).min(axis=1)
            if deficit.min() < -TOL:
                worst = int(np.argmin(deficit))
                raise MinorizationFails(f"row {int(rows[worst])} falls below eps nu by {-deficit[worst]:.3g}",
                                        witness={"row": int(rows[worst]), "deficit": float(-deficit[worst])})
    return LocalPI(constant=2.0 / epsilon, C=states, flavor="minorization", epsilon=epsilon)


def local_pi_from_restriction(P: FiniteKernel, C) -> LocalPI:
    """A restricted PI for P_C carries over to P on C with K = 1/Gap(P_C)"""
    gap = restricted_gap(P, C)
    if gap is None:
        raise NotReversible("the restricted PI needs a reversible kernel")
    if gap <= 0:
        raise ZeroConductance("P_C has no spectral gap", witness=sorted(int(x) for x in C))
    return LocalPI(constant=1.0 / gap, C=sorted(int(x) for x in C), flavor="restricted")


def local_pi_from_isoperimetry(eps: float, delta: float, m: float, mu_C: float, C=None) -> LocalPI:
    """Restricted conductance from isoperimetry, then Gap(P_C) >= kappa_C^2 / 8, so K = 8 / kappa_C^2"""
    kappa = restricted_conductance(eps, delta, m, mu_C)
    states = None if C is None else sorted(int(x) for x in C)
    return LocalPI(constant=8.0 / kappa ** 2, C=states, flavor="isoperimetry", epsilon=eps)


def local_pi_ratio(P: FiniteKernel, lpi: LocalPI, f) -> float:
    """||f_m 1_C||^2 / (K E(P, f)); at most 1 when the inequality holds"""
    f = np.asarray(f, dtype=float)
    inside = np.zeros(P.n, dtype=bool)
    inside[lpi.C if lpi.C is not None else slice(None)] = True
    mass = P.mu[inside].sum()
    m = (P.mu[inside] @ f[inside]) / mass
    lhs = P.mu[inside] @ (f[inside] - m) ** 2
    energy = dirichlet_form(P, f)
    if energy <= TOL:
        return 0.0 if lhs <= TOL else np.inf
    return float(lhs / (lpi.constant * energy))


def verify_local_pi(P: FiniteKernel, lpi: LocalPI, count: int = VERIFY_COUNT, seed: Optional[int] = None) -> float:
    """
    Check the inequality on `count` random functions; returns the largest ratio.

    Raises:
        BoundViolation with the offending function.
    """
    seed = get_settings().seed if seed is None else seed
    rng = np.random.Generator(np.random.Philox(seed))
    worst = 0.0
    for _ in range(count):
        f = rng.standard_normal(P.n)
        ratio = local_pi_ratio(P, lpi, f)
        if ratio > 1.0 + 1e-9:
            raise BoundViolation(f"local PI fails with ratio {ratio:.6g}", witness={"f": f.tolist()})
        worst = max(worst, ratio)
    return worst
