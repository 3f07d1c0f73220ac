"""
Central limit theorem check through the Maxwell-Woodroofe condition
sum n^-3/2 ||V_n f|| < inf, V_n f = sum_{k<n} P^k f
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from chains.kernel import FiniteKernel, Observable, norm2
from errors import DomainError, Inconclusive
from rates.profiles import ConvergenceProfile

CRITICAL_BAND = 0.05


@dataclass
class CltReport:
    verdict: str
    exponent: Optional[float]
    partial_sums: np.ndarray
    lp_threshold: Optional[float] = None


def lp_threshold(b: float) -> float:
    """A CLT holds for every f in L^p_0 once p > 2b/(b-1)"""
    if b <= 1:
        raise DomainError("b must exceed 1")
    return 2.0 * b / (b - 1.0)


def mw_growth_bound(a: float, n):
    """sum_{k<n} k^(-a/2) <= (2/(2-a)) n^(1-a/2), for a < 2"""
    if not 0 < a < 2:
        raise DomainError("a must lie in (0, 2)")
    return 2.0 / (2.0 - a) * np.asarray(n, dtype=float) ** (1.0 - a / 2.0)


def decay_exponent(values: np.ndarray) -> float:
    """Slope a of gamma(n) ~ n^-a, fitted on n in [n_max/10, n_max]"""
    n_max = len(values) - 1
    lo = max(1, n_max // 10)
    n = np.arange(lo, n_max + 1)
    tail = np.asarray(values[lo:], dtype=float)
    if np.any(tail <= 0):
        return math.inf
    return float(-np.polyfit(np.log(n), np.log(tail), 1)[0])


def _mw_sums(norms: np.ndarray) -> np.ndarray:
    """S_N = sum_{n=1..N} n^-3/2 ||V_n f||"""
    n = np.arange(1, len(norms) + 1, dtype=float)
    return np.cumsum(n ** -1.5 * norms)


def clt_from_profile(profile: ConvergenceProfile, phi_f: float = 1.0, b: Optional[float] = None) -> CltReport:
    """
    Certified gamma: ||V_n f|| <= Phi(f)^1/2 sum_{k<n} gamma(k)^1/2.
    Converges when gamma(n) = O(n^-a) with a > 1; within 0.05 of a = 1 the
    fitted slope cannot decide and Inconclusive is raised.
    """
    values = np.asarray(profile.values, dtype=float)
    a = decay_exponent(values)
    norms = math.sqrt(phi_f) * np.cumsum(np.sqrt(np.maximum(values[:-1], 0.0)))
    sums = _mw_sums(norms)
    threshold = lp_threshold(b) if b is not None else None
    if abs(a - 1.0) <= CRITICAL_BAND:
        raise Inconclusive(f"decay exponent {a:.4f} is within {CRITICAL_BAND} of the critical value 1",
                           witness={"exponent": a})
    verdict = "Converges" if a > 1.0 else "NotEstablished"
    return CltReport(verdict=verdict, exponent=a, partial_sums=sums, lp_threshold=threshold)


def clt_from_chain(P: FiniteKernel, f, n_max: int = 1000) -> CltReport:
    """Exact ||V_n f|| on a finite chain; summable whenever the partial sums settle"""
    raw = f.values if isinstance(f, Observable) else np.asarray(f, dtype=float)
    g = raw - P.mu @ raw
    acc = np.zeros_like(g)
    norms = np.empty(n_max)
    h = g.copy()
    for n in range(n_max):
        acc += h
        norms[n] = math.sqrt(norm2(acc, P.mu))
        h = P.matrix @ h
    sums = _mw_sums(norms)
    # sqrt(n) growth of ||V_n f|| or slower makes the tail sum like n^-1 or better
    growth = np.polyfit(np.log(np.arange(n_max // 2, n_max) + 1.0), np.log(norms[n_max // 2:] + 1e-300), 1)[0]
    verdict = "Converges" if growth < 0.5 - CRITICAL_BAND else "NotEstablished"
    return CltReport(verdict=verdict, exponent=None, partial_sums=sums)


def clt_check(source, f=None, n_max: int = 1000, phi_f: float = 1.0, b: Optional[float] = None) -> CltReport:
    """Dispatch on a certified profile or an exact (P, f) pair"""
    if isinstance(source, ConvergenceProfile):
        return clt_from_profile(source, phi_f, b)
    if isinstance(source, FiniteKernel):
        if f is None:
            raise DomainError("an exact check needs the observable f")
        return clt_from_chain(source, f, n_max)
    raise DomainError("clt_check takes a ConvergenceProfile or a FiniteKernel")
