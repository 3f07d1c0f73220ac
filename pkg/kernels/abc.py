"""
Pseudo-marginal ABC chain
Prior nu(x) = (1-q) q^(x-1), likelihood a^(x-1) estimated from N binomial replicates,
random-walk proposals x -> x +- 1
"""

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field
from scipy.stats import binom

from chains.conductance import KappaPower
from chains.kernel import FiniteKernel
from errors import DomainError
from rates.monotone import PowerLaw

TAIL_MASS = 1e-12


class AbcChain(BaseModel):
    a: float = Field(gt=0, lt=1)
    q: float = Field(gt=0, lt=1)
    N: int = Field(default=1, ge=1)
    x_max: Optional[int] = Field(default=None, ge=2)

    @property
    def truncation(self) -> int:
        """Largest x kept: the given one, or where pi_ABC's tail drops below 1e-12"""
        if self.x_max is not None:
            return self.x_max
        return max(2, int(math.ceil(math.log(TAIL_MASS) / math.log(self.a * self.q))) + 1)

    def likelihood(self, x) -> np.ndarray:
        return self.a ** (np.asarray(x, dtype=float) - 1)

    def labels(self) -> List[Tuple[int, int]]:
        """(x, k) in lexicographic order; k = 0 has zero weight and is left out"""
        return [(x, k) for x in range(1, self.truncation + 1) for k in range(1, self.N + 1)]


def pi_abc(chain: AbcChain, x) -> np.ndarray:
    """(1 - aq) (aq)^(x-1)"""
    aq = chain.a * chain.q
    return (1 - aq) * aq ** (np.asarray(x, dtype=float) - 1)


def abc_build(chain: AbcChain) -> FiniteKernel:
    """
    Joint kernel on (x, w) with w = k / (N l(x)). A move proposes y = x +- 1, draws
    k' ~ Binomial(N, l(y)), and accepts with 1 ^ nu(y) k' / (nu(x) k).
    """
    X, N = chain.truncation, chain.N
    labels = chain.labels()
    index = {lab: i for i, lab in enumerate(labels)}
    k = np.arange(1, N + 1)
    P = np.zeros((len(labels), len(labels)))
    for (x, kx), i in index.items():
        for y in (x - 1, x + 1):
            if y < 1 or y > X:
                continue
            draws = binom.pmf(k, N, chain.likelihood(y))
            accept = np.minimum(1.0, chain.q ** (y - x) * k / kx)
            for kk, prob in zip(k, 0.5 * draws * accept):
                P[i, index[(y, int(kk))]] += prob
        P[i, i] += 1.0 - P[i].sum()
    x_of = np.array([lab[0] for lab in labels], dtype=float)
    k_of = np.array([lab[1] for lab in labels], dtype=float)
    ell = chain.likelihood(x_of)
    mu = pi_abc(chain, x_of) * binom.pmf(k_of, N, ell) * k_of / (N * ell)
    return FiniteKernel.from_matrix(P, mu / mu.sum())


def weight_tail(chain: AbcChain, s: float) -> float:
    """N = 1: pi~(w >= s) = (aq)^ceil(log s / -log a) for the untruncated chain"""
    if chain.N != 1:
        raise DomainError("the closed-form weight tail is for N = 1")
    if s <= 1:
        return 1.0
    j = math.ceil(math.log(s) / -math.log(chain.a) - 1e-12)
    return (chain.a * chain.q) ** j


@dataclass(frozen=True)
class AbcFloor:
    """beta*(s) >= rate(s) for s >= valid_from"""

    rate: PowerLaw
    exponent: float
    valid_from: float
    kappa_envelope: KappaPower


def abc_beta_floor(chain: AbcChain) -> AbcFloor:
    """
    kappa(u) <= N a^-2 (2u)^theta for u < aq/4, theta = log a / log(aq), so
    alpha*(r) >= 1/(2 kappa(2r)) >= C r^-theta and beta*(s) >= (C/s)^(1/theta),
    C = a^2 4^-theta / (2N).
    """
    a, q, N = chain.a, chain.q, chain.N
    theta = math.log(a) / math.log(a * q)
    C = a * a * 4.0 ** (-theta) / (2.0 * N)
    valid_from = C * (a * q / 8.0) ** (-theta)
    envelope = KappaPower(c=N * a ** -2 * 2.0 ** theta, theta=theta, valid_below=a * q / 4.0)
    return AbcFloor(rate=PowerLaw(c=C ** (1.0 / theta), p=1.0 / theta), exponent=1.0 / theta,
                    valid_from=valid_from, kappa_envelope=envelope)
