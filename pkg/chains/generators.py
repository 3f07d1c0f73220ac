"""
Test chains: random reversible kernels and birth-death walks
"""

from typing import Optional

import numpy as np

from chains.kernel import FiniteKernel
from errors import DomainError


def random_reversible(n: int, rng: np.random.Generator, holding: float = 0.5,
                      density: float = 1.0) -> FiniteKernel:
    """
    P = holding Id + (1 - holding) W / rowsum(W) for a random symmetric W with a
    connected path 0-1-...-(n-1); reversible for mu proportional to rowsum(W).
    """
    if n < 2:
        raise DomainError("need at least two states")
    W = rng.random((n, n))
    W = W * (rng.random((n, n)) < density)
    W = np.triu(W, 1)
    path = np.arange(n - 1)
    W[path, path + 1] = np.maximum(W[path, path + 1], 0.05 + rng.random(n - 1))
    W = W + W.T
    rows = W.sum(axis=1)
    P = holding * np.eye(n) + (1 - holding) * W / rows[:, None]
    return FiniteKernel.from_matrix(P, rows / rows.sum())


def birth_death(n: int, up: float, down: float, holding: float = 0.5,
                up_at: Optional[np.ndarray] = None) -> FiniteKernel:
    """
    Lazy birth-death walk on 0..n-1 moving up with probability (1 - holding) up
    and down with (1 - holding) down; blocked moves stay put. `up_at` overrides
    the up-probabilities state by state.
    """
    if up + down > 1 or min(up, down) < 0:
        raise DomainError("need up, down >= 0 with up + down <= 1")
    ups = np.full(n, up) if up_at is None else np.asarray(up_at, dtype=float)
    P = np.zeros((n, n))
    for i in range(n):
        if i + 1 < n:
            P[i, i + 1] = (1 - holding) * ups[i]
        if i > 0:
            P[i, i - 1] = (1 - holding) * down
        P[i, i] = 1.0 - P[i].sum()
    mu = np.ones(n)
    for i in range(1, n):
        mu[i] = mu[i - 1] * P[i - 1, i] / P[i, i - 1]
    return FiniteKernel.from_matrix(P, mu / mu.sum())
