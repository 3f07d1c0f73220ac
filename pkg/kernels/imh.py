"""
Independent Metropolis-Hastings on geometric targets
pi(x) = (1-a) a^x, q(x) = (1-b) b^x, truncated to 0..N_t
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from pydantic import BaseModel, Field, model_validator

from chains.kernel import FiniteKernel, Observable, pn_decay
from chains.spectral import eigensystem
from errors import DomainError, TruncationTooSmall
from rates.certificates import WpiCertificate, beta_certificate
from rates.monotone import Tabulated

MASS_FLOOR = 1e-24
RESOLVED = 1e-8
TRUNCATION_MARGIN = 5


class ImhGeometric(BaseModel):
    a: float = Field(gt=0, lt=1)
    b: float = Field(gt=0, lt=1)
    truncation: int = Field(default=200, ge=2)

    @model_validator(mode="after")
    def _check(self):
        if not self.b < self.a:
            raise DomainError(f"need 0 < b < a < 1, got a={self.a}, b={self.b}")
        return self

    @property
    def states(self) -> np.ndarray:
        return np.arange(self.truncation + 1)

    @property
    def target(self) -> np.ndarray:
        p = self.a ** self.states.astype(float)
        return p / p.sum()

    @property
    def proposal(self) -> np.ndarray:
        """(1-b) b^x on 0..N_t; the missing mass b^(N_t+1) becomes a self-loop"""
        return (1 - self.b) * self.b ** self.states.astype(float)

    @property
    def residual(self) -> float:
        return self.b ** (self.truncation + 1)

    @property
    def weights(self) -> np.ndarray:
        """w = pi / q (increasing in x)"""
        return self.target / self.proposal


def imh_spectrum(a: float, b: float, m_max: int) -> np.ndarray:
    """Lambda_m = 1 - (1-b)/(1-a) (b/a)^m + (a-b)/(1-a) b^m for m = 0..m_max"""
    if not 0 < b < a < 1:
        raise DomainError(f"need 0 < b < a < 1, got a={a}, b={b}")
    m = np.arange(m_max + 1, dtype=float)
    return 1.0 - (1 - b) / (1 - a) * (b / a) ** m + (a - b) / (1 - a) * b ** m


def imh_build(chain: ImhGeometric) -> FiniteKernel:
    """Accept y ~ q with probability 1 ^ w(y)/w(x); rejected and unproposed mass stays put"""
    q = chain.proposal
    x = chain.states.astype(float)
    ratio = (chain.a / chain.b) ** (x[None, :] - x[:, None])
    P = q[None, :] * np.minimum(1.0, ratio)
    np.fill_diagonal(P, 0.0)
    P[np.diag_indices_from(P)] = 1.0 - P.sum(axis=1)
    return FiniteKernel.from_matrix(P, chain.target)


def _nontrivial(P: FiniteKernel):
    """Eigenvalues (ascending), eigenfunctions and index of the constant eigenfunction"""
    values, vectors, _ = eigensystem(P)
    overlap = np.abs(P.mu @ vectors)
    trivial = int(np.argmax(overlap))
    keep = np.delete(np.arange(values.size), trivial)
    return values[keep], vectors[:, keep]


@dataclass
class SpectrumReport:
    m: np.ndarray
    exact: np.ndarray
    computed: np.ndarray
    residuals: np.ndarray
    tolerance: float

    @property
    def max_residual(self) -> float:
        return float(self.residuals.max()) if self.residuals.size else 0.0


def imh_spectrum_validate(chain: ImhGeometric, m_max: int = 20, tol: float = 1e-8) -> SpectrumReport:
    """
    Match the ascending nontrivial eigenvalues of the truncated kernel with
    Lambda_1..Lambda_m_max shifted by the folded proposal mass. Lambda_0 = 0 has
    no counterpart: the lowest-weight state carries the eigenvalue 1.
    """
    if chain.truncation < m_max + TRUNCATION_MARGIN:
        raise TruncationTooSmall(f"truncation {chain.truncation} leaves no margin above m_max={m_max}",
                                 witness={"truncation": chain.truncation, "m_max": m_max})
    values, _ = _nontrivial(imh_build(chain))
    exact = imh_spectrum(chain.a, chain.b, m_max)[1:] + chain.residual
    computed = values[:m_max]
    residuals = np.abs(computed - exact)
    report = SpectrumReport(m=np.arange(1, m_max + 1), exact=exact, computed=computed,
                            residuals=residuals, tolerance=tol)
    if report.max_residual > tol:
        worst = int(np.argmax(residuals)) + 1
        raise TruncationTooSmall(f"eigenvalue residual {report.max_residual:.3g} at m={worst}",
                                 witness={"m": worst, "residual": report.max_residual})
    return report


@dataclass
class VarianceCriterion:
    m: np.ndarray
    eigenvalues: np.ndarray
    masses: np.ndarray
    partial_sums: np.ndarray
    slope: float
    threshold: float
    finite: bool


def imh_asymvar_criterion(chain: ImhGeometric, f, margin: float = 0.05) -> VarianceCriterion:
    """
    Finite asymptotic variance needs nu_f(Lambda_m) to decay faster than (b/a)^m.
    The decay rate is the slope of log nu_f(Lambda_m) against m, fitted where the
    masses are above 1e-24 and the eigenvalues are resolved (1 - lambda > 1e-8).
    """
    P = imh_build(chain)
    values, vectors = _nontrivial(P)
    raw = f.values if isinstance(f, Observable) else np.asarray(f, dtype=float)
    g = raw - P.mu @ raw
    masses = (vectors.T @ (P.mu * g)) ** 2
    usable = (masses > MASS_FLOOR) & (1.0 - values > RESOLVED)
    stop = int(np.argmin(usable)) if not usable.all() else usable.size
    m = np.arange(1, values.size + 1)
    window = slice(1, stop)
    if stop - 1 < 3:
        raise TruncationTooSmall("too few resolved spectral masses to estimate their decay",
                                 witness={"resolved": stop})
    slope = float(np.polyfit(m[window], np.log(masses[window]), 1)[0])
    threshold = math.log(chain.b / chain.a)
    partial = np.cumsum(masses[:stop] / (1.0 - values[:stop]))
    return VarianceCriterion(m=m[:stop], eigenvalues=values[:stop], masses=masses[:stop],
                             partial_sums=partial, slope=slope, threshold=threshold,
                             finite=slope < threshold - margin)


def imh_decay_slope(chain: ImhGeometric, n_low: int = 50, n_high: int = 500, f=None) -> float:
    """
    Log-log slope of ||P^n f||^2 over [n_low, n_high], default f = 1_{x=0}.
    Bounded functions decay like n^(-b/(a-b)) in squared norm.
    """
    P = imh_build(chain)
    if f is None:
        f = np.zeros(P.n)
        f[0] = 1.0
    decay = pn_decay(P, f, n_high)
    n = np.arange(n_low, n_high + 1)
    return float(np.polyfit(np.log(n), np.log(decay[n_low:]), 1)[0])


def imh_wpi(chain: ImhGeometric, s_grid: Optional[np.ndarray] = None) -> WpiCertificate:
    """
    beta(s) = pi(w > s) from the sets A = {w <= s}, on which the restricted
    gap is at least pi(A)/s.
    """
    w = chain.weights
    pi = chain.target
    levels = np.unique(w)
    tail = np.array([pi[w > level].sum() for level in levels])
    # beta(s) = pi(w > s) is right-continuous with drops at the weights
    rate = Tabulated(grid=levels.tolist(), values=tail.tolist(), below=1.0)
    return beta_certificate(rate, source="imh")


def imh_minorization(chain: ImhGeometric, s: float):
    """(A, eps): for x in A = {w <= s} the kernel dominates (pi(A)/s) pi_A"""
    w = chain.weights
    A = np.flatnonzero(w <= s)
    if A.size == 0:
        raise DomainError(f"no state has weight <= {s}")
    return A, float(chain.target[A].sum() / s)
