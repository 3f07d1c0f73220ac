"""
Finite Markov kernels
Row-stochastic matrices with their invariant law, observables, adjoints and Dirichlet forms
"""

from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from errors import InvalidInput, InvalidKernel, ZeroMassState

ROW_TOL = 1e-12
INVARIANCE_TOL = 1e-10
REVERSIBILITY_TOL = 1e-10
MAX_STATES = 2 ** 24


class ChainSpec(BaseModel):
    """Chain JSON: {"states": n, "matrix": [[...]], "mu": optional [...]}"""

    states: int = Field(ge=1)
    matrix: List[List[float]]
    mu: Optional[List[float]] = None


def stationary_distribution(matrix: np.ndarray) -> np.ndarray:
    """Left Perron vector of an irreducible stochastic matrix, normalized to sum 1"""
    n = matrix.shape[0]
    # mu (P - I) = 0 with sum(mu) = 1, solved in the least-squares sense
    system = np.vstack([(matrix - np.eye(n)).T, np.ones((1, n))])
    rhs = np.zeros(n + 1)
    rhs[-1] = 1.0
    mu, *_ = np.linalg.lstsq(system, rhs, rcond=None)
    mu = np.where(mu < 0, 0.0, mu)
    return mu / mu.sum()


@dataclass(frozen=True, eq=False)
class FiniteKernel:
    """
    Transition matrix on states 0..n-1 with a stationary law mu.

    Construct through `from_matrix`, which checks stochasticity and invariance.
    Arrays are made read-only so kernels can be shared across threads.
    """

    matrix: np.ndarray
    mu: np.ndarray

    @classmethod
    def from_matrix(cls, matrix, mu=None, check: bool = True) -> "FiniteKernel":
        matrix = np.array(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise InvalidKernel(f"matrix must be square, got shape {matrix.shape}")
        if matrix.shape[0] > MAX_STATES:
            raise InvalidKernel(f"{matrix.shape[0]} states exceed the dense limit")
        if np.any(matrix < 0):
            raise InvalidKernel("matrix has negative entries", witness=np.argwhere(matrix < 0)[0].tolist())
        rows = matrix.sum(axis=1)
        bad = np.flatnonzero(np.abs(rows - 1.0) > ROW_TOL)
        if bad.size:
            raise InvalidKernel(f"row {bad[0]} sums to {rows[bad[0]]!r}", witness=int(bad[0]))
        mu = stationary_distribution(matrix) if mu is None else np.array(mu, dtype=float)
        if check:
            if mu.shape != (matrix.shape[0],) or np.any(mu < 0) or abs(mu.sum() - 1.0) > ROW_TOL:
                raise InvalidKernel("mu must be a probability vector over the states")
            drift = np.max(np.abs(mu @ matrix - mu))
            if drift > INVARIANCE_TOL:
                raise InvalidKernel(f"mu is not invariant (residual {drift:.3g})", witness=float(drift))
        matrix.setflags(write=False)
        mu.setflags(write=False)
        return cls(matrix=matrix, mu=mu)

    @classmethod
    def from_spec(cls, spec) -> "FiniteKernel":
        try:
            spec = spec if isinstance(spec, ChainSpec) else ChainSpec.model_validate(spec)
        except ValidationError as e:
            raise InvalidInput(f"Invalid chain spec: {e}")
        if len(spec.matrix) != spec.states:
            raise InvalidInput(f"'states' is {spec.states} but the matrix has {len(spec.matrix)} rows")
        return cls.from_matrix(spec.matrix, spec.mu)

    def to_spec(self) -> ChainSpec:
        return ChainSpec(states=self.n, matrix=self.matrix.tolist(), mu=self.mu.tolist())

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.mu > 0)

    @property
    def flow(self) -> np.ndarray:
        """Q(x, y) = mu(x) P(x, y)"""
        return self.mu[:, None] * self.matrix

    def is_reversible(self, tol: float = REVERSIBILITY_TOL) -> bool:
        q = self.flow
        return bool(np.max(np.abs(q - q.T)) <= tol)

    def min_holding(self) -> float:
        """min over positive-mass states of P(x, {x})"""
        return float(np.min(np.diag(self.matrix)[self.support]))

    def apply(self, f: np.ndarray) -> np.ndarray:
        return self.matrix @ f

    def power(self, k: int) -> "FiniteKernel":
        return FiniteKernel.from_matrix(np.linalg.matrix_power(self.matrix, k), self.mu, check=False)

    def compose(self, other: "FiniteKernel") -> "FiniteKernel":
        """self then other: (self other)(x, y) = sum_z self(x, z) other(z, y)"""
        return FiniteKernel.from_matrix(self.matrix @ other.matrix, self.mu, check=False)

    def restrict_to_support(self) -> "FiniteKernel":
        keep = self.support
        sub = self.matrix[np.ix_(keep, keep)]
        sub = sub + np.diag(1.0 - sub.sum(axis=1))
        return FiniteKernel.from_matrix(sub, self.mu[keep] / self.mu[keep].sum())


class Observable:
    """Function on the states, with mean, variance and oscillation under mu."""

    def __init__(self, values, mu):
        self.values = np.array(values, dtype=float)
        self.mu = np.asarray(mu, dtype=float)
        if self.values.shape != self.mu.shape:
            raise InvalidInput(f"observable has {self.values.size} values for {self.mu.size} states")
        self.values.setflags(write=False)
        positive = self.values[self.mu > 0]
        self.mean = float(self.mu @ self.values)
        self.variance = float(self.mu @ (self.values - self.mean) ** 2)
        self.oscillation = float(positive.max() - positive.min()) if positive.size else 0.0

    @classmethod
    def indicator(cls, states, mu) -> "Observable":
        values = np.zeros(len(mu))
        values[list(states)] = 1.0
        return cls(values, mu)

    @property
    def centered(self) -> np.ndarray:
        return self.values - self.mean

    @property
    def sieve(self) -> float:
        """Phi(f) = ||f||_osc^2"""
        return self.oscillation ** 2

    def normalized(self) -> "Observable":
        """Rescaled to oscillation 1 (Phi = 1); constants stay as they are"""
        if self.oscillation == 0:
            return self
        return Observable(self.values / self.oscillation, self.mu)


def norm2(f: np.ndarray, mu: np.ndarray) -> float:
    return float(mu @ (f * f))


def adjoint(P: FiniteKernel) -> FiniteKernel:
    """P*(x, y) = mu(y) P(y, x) / mu(x)"""
    if np.any(P.mu <= 0):
        zero = int(np.flatnonzero(P.mu <= 0)[0])
        raise ZeroMassState(f"state {zero} has zero mass; restrict to the support first", witness=zero)
    star = P.flow.T / P.mu[:, None]
    star = star / star.sum(axis=1, keepdims=True)
    return FiniteKernel.from_matrix(star, P.mu)


def additive_reversibilization(P: FiniteKernel) -> FiniteKernel:
    return FiniteKernel.from_matrix(0.5 * (P.matrix + adjoint(P).matrix), P.mu)


def multiplicative_reversibilization(P: FiniteKernel) -> FiniteKernel:
    """P* P"""
    return adjoint(P).compose(P)


def lazy(P: FiniteKernel, eps: float) -> FiniteKernel:
    if not 0 < eps < 1:
        raise InvalidInput(f"eps must lie in (0, 1), got {eps}")
    return FiniteKernel.from_matrix(eps * np.eye(P.n) + (1 - eps) * P.matrix, P.mu)


def dirichlet_form(T: FiniteKernel, f) -> float:
    """<(I - T) f, f>_mu"""
    values = f.values if isinstance(f, Observable) else np.asarray(f, dtype=float)
    return float(T.mu @ (values * (values - T.matrix @ values)))


def set_flow(P: FiniteKernel, states) -> float:
    """mu (x) P (A x A^c)"""
    inside = np.zeros(P.n, dtype=bool)
    inside[list(states)] = True
    return float(P.flow[np.ix_(inside, ~inside)].sum())


def pn_decay(P: FiniteKernel, f, n_max: int) -> np.ndarray:
    """||P^n (f - mu(f))||^2 for n = 0..n_max"""
    values = f.values if isinstance(f, Observable) else np.asarray(f, dtype=float)
    g = values - P.mu @ values
    out = np.empty(n_max + 1)
    for n in range(n_max + 1):
        out[n] = norm2(g, P.mu)
        g = P.matrix @ g
    return out
