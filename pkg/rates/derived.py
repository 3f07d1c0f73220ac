"""
Derived bounds
L^p extension, asymptotic variance, spectral mass, rate ordering, and WPIs for P^2
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from config import get_settings
from errors import (
    AssumptionViolated,
    BoundViolation,
    DivergentB,
    DomainError,
    IncomparableSieves,
)
from rates.certificates import Sieve, WpiCertificate
from rates.conjugate import k_transform
from rates.monotone import Tabulated
from rates.profiles import ConvergenceProfile, gamma_from_beta


def gamma_p_extend(profile: ConvergenceProfile, p: float) -> ConvergenceProfile:
    """gamma_p(n) = 2^(4 + 4/p) gamma(n)^(1 - 2/p) for the L^p sieve"""
    if p <= 2:
        raise DomainError(f"p must exceed 2, got {p}")
    if profile.sieve.kind != "osc":
        raise DomainError("gamma_p_extend needs an oscillation-sieve profile")
    factor = 2.0 ** (4.0 + 4.0 / p)
    exponent = 1.0 - 2.0 / p
    values = factor * np.asarray(profile.values) ** exponent
    return ConvergenceProfile(values=values, origin=profile.origin, a=factor * profile.a ** exponent,
                              sieve=Sieve(kind="pnorm", p=p))


def asym_var_bound(cert: WpiCertificate, v: float, phi_f: float) -> float:
    """
    var(P, f) <= 4 Phi(f) B(v), B(v) = int_0^v w / K*(w) dw.

    Args:
        cert: beta-form WPI for P*P (P reversible)
        v: ||f||^2 / Phi(f), or any upper bound of it in (0, a]
        phi_f: Phi(f)
    """
    if not 0 < v <= cert.a_bound:
        raise DomainError(f"v must lie in (0, {cert.a_bound}]")
    conj = k_transform(cert.rate)
    if not conj.id_minus_monotone(cert.a_bound):
        raise AssumptionViolated("w - K*(w) is not nondecreasing on (0, a]")
    b = conj.B(v)
    if not math.isfinite(b):
        raise DivergentB("B(v) diverges at 0", witness={"v": v})
    return 4.0 * phi_f * b


def spectral_mass_bound(profile: ConvergenceProfile, delta: float) -> float:
    """nu_f(lambda^2 > e^-delta) / Phi(f) <= min_{n >= 1} gamma(n) e^(delta n)"""
    if delta <= 0:
        raise DomainError("delta must be positive")
    n = np.arange(1, len(profile.values))
    with np.errstate(over="ignore"):
        return float(np.min(np.asarray(profile.values[1:]) * np.exp(delta * n)))


@dataclass
class OrderingReport:
    beta_order: Optional[str]
    gamma_order: Optional[str]
    s_grid: np.ndarray
    beta_1: np.ndarray
    beta_2: np.ndarray
    gamma_1: np.ndarray
    gamma_2: np.ndarray

    @property
    def consistent(self) -> bool:
        if self.beta_order is None:
            return True
        if self.beta_order == "equal":
            return self.gamma_order == "equal"
        return self.gamma_order in (self.beta_order, "equal")


def _order(x, y, tol) -> Optional[str]:
    scale = tol * np.maximum(1.0, np.maximum(np.abs(x), np.abs(y)))
    ge = np.all(y >= x - scale)
    le = np.all(y <= x + scale)
    if ge and le:
        return "equal"
    if ge:
        return "2>=1"
    if le:
        return "1>=2"
    return None


def order_rates(cert1: WpiCertificate, cert2: WpiCertificate, n_max: int, s_grid=None, tol: float = 1e-9) -> OrderingReport:
    """Larger beta means larger gamma: report both orderings and check the implication"""
    if cert1.sieve.key() != cert2.sieve.key():
        raise IncomparableSieves(f"{cert1.sieve.key()} vs {cert2.sieve.key()}")
    if cert1.a_bound != cert2.a_bound:
        raise DomainError("certificates must share a_bound")
    if s_grid is None:
        s_grid = np.geomspace(1e-4, 1e6, 256)
    s_grid = np.asarray(s_grid, dtype=float)
    b1, b2 = cert1.rate(s_grid), cert2.rate(s_grid)
    g1 = gamma_from_beta(cert1, n_max).values
    g2 = gamma_from_beta(cert2, n_max).values
    report = OrderingReport(_order(b1, b2, tol), _order(g1, g2, tol), s_grid, b1, b2, g1, g2)
    if not report.consistent:
        raise BoundViolation(
            f"beta ordering {report.beta_order} but gamma ordering {report.gamma_order}",
            witness={"n": int(np.argmax(np.abs(g2 - g1)))},
        )
    return report


def square_wpi(beta_plus, beta_minus, case: str = "Reversible", resolution: int = 256, grid=None) -> Tabulated:
    """
    beta for P^2 from a WPI for P (beta_plus) and for -P (beta_minus).

    Reversible: beta(s) = inf{s1 beta_plus(s2) + beta_minus(s1) : s1 s2 = s}
    Holding:    beta(s) = inf{s1 beta_minus(s2) + beta_plus(s1) : s1 s2 = s}
    The infimum runs over `resolution` log-spaced s1 values; a grid infimum
    over-estimates the true one, so the result stays a valid beta.
    """
    if case == "Reversible":
        outer, inner = beta_plus, beta_minus
    elif case == "Holding":
        outer, inner = beta_minus, beta_plus
    else:
        raise DomainError(f"unknown case '{case}'")
    settings = get_settings()
    if grid is None:
        grid = np.geomspace(1e-4, 1e6, 256)
    grid = np.asarray(grid, dtype=float)
    s1 = np.geomspace(settings.grid_low, settings.grid_high, resolution)
    inner_vals = np.asarray(inner(s1), dtype=float)
    vals = np.empty_like(grid)
    for i, s in enumerate(grid):
        vals[i] = np.min(s1 * np.asarray(outer(s / s1), dtype=float) + inner_vals)
    return Tabulated.upper_step(grid, vals)
