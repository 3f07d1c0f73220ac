"""
Drift conditions
Geometric PV <= (1 - lam) V + b 1_C gives a spectral gap lam / (1 + K b);
subgeometric PV <= V - phi(V) + b 1_C gives a WPI with
beta(s) = b mu(C) / phi((Id/phi)^-1 (s / (1 + K b)))
"""

import math
from dataclasses import dataclass
from typing import Annotated, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, model_validator
from scipy.optimize import brentq

from bounds.local_pi import LocalPI, verify_local_pi
from chains.generators import birth_death
from chains.kernel import FiniteKernel, additive_reversibilization
from chains.reachability import rupi_check
from chains.spectral import spectral_gap
from config import get_settings
from errors import AssumptionViolated, BoundViolation, DomainError, DriftViolated, NumericalFailure, RangeError
from rates.certificates import WpiCertificate, beta_certificate
from rates.monotone import Capped, Constant, PowerLaw, Raised, Tabulated, log_grid

DRIFT_TOL = 1e-10
ROOT_RTOL = 1e-12


class PhiPower(BaseModel):
    """phi(v) = c v^alpha"""

    model_config = ConfigDict(frozen=True)

    kind: Literal["power"] = "power"
    c: float = Field(gt=0)
    alpha: float = Field(ge=0, le=1)

    def __call__(self, v):
        return self.c * np.asarray(v, dtype=float) ** self.alpha

    def log_at_exp(self, t: float) -> float:
        return math.log(self.c) + self.alpha * t


class PhiLog(BaseModel):
    """
    phi(v) = c v / log(v)^alpha for v >= e^(alpha+1), where it is concave;
    below that point it follows its tangent line, which stays positive at v = 1.
    """

    model_config = ConfigDict(frozen=True)

    kind: Literal["log"] = "log"
    c: float = Field(gt=0)
    alpha: float = Field(gt=0)

    @property
    def v_star(self) -> float:
        return math.exp(self.alpha + 1.0)

    @property
    def tangent(self):
        """(intercept, slope) of the tangent at v_star"""
        a = self.alpha
        slope = self.c * (a + 1.0) ** (-a - 1.0)
        value = self.c * self.v_star * (a + 1.0) ** (-a)
        return value - slope * self.v_star, slope

    def __call__(self, v):
        v = np.asarray(v, dtype=float)
        intercept, slope = self.tangent
        with np.errstate(divide="ignore", invalid="ignore"):
            upper = self.c * v / np.log(np.maximum(v, self.v_star)) ** self.alpha
        return np.where(v >= self.v_star, upper, intercept + slope * v)

    def log_at_exp(self, t: float) -> float:
        """log phi(e^t), without forming e^t on the concave branch"""
        if t >= self.alpha + 1.0:
            return math.log(self.c) + t - self.alpha * math.log(t)
        intercept, slope = self.tangent
        return math.log(intercept + slope * math.exp(t))


Phi = Annotated[Union[PhiPower, PhiLog], Field(discriminator="kind")]


class Geometric(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["geometric"] = "geometric"
    lam: float = Field(gt=0, le=1)
    b: float = Field(gt=0)


class Subgeometric(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["subgeometric"] = "subgeometric"
    phi: Phi
    b: float = Field(gt=0)


class DriftCondition(BaseModel):
    model_config = ConfigDict(frozen=True)

    V: List[float]
    C: List[int]
    form: Annotated[Union[Geometric, Subgeometric], Field(discriminator="kind")]

    @model_validator(mode="after")
    def _check(self):
        if min(self.V) < 1:
            raise DomainError("V must be >= 1 everywhere", witness=int(np.argmin(self.V)))
        if not self.C:
            raise DomainError("C must not be empty")
        return self

    @property
    def b(self) -> float:
        return self.form.b

    def phi_of_V(self) -> np.ndarray:
        V = np.asarray(self.V, dtype=float)
        if isinstance(self.form, Geometric):
            return self.form.lam * V
        return np.asarray(self.form.phi(V), dtype=float)


drift_adapter = TypeAdapter(DriftCondition)


@dataclass
class DriftReport:
    slack: np.ndarray
    worst_state: int
    mu_phi_V: float
    b_mu_C: float
    kernel: str

    @property
    def min_slack(self) -> float:
        return float(self.slack[self.worst_state])


def _drift_kernel(P: FiniteKernel):
    if P.is_reversible():
        return P, "P"
    return additive_reversibilization(P), "(P+P*)/2"


def verify_drift(P: FiniteKernel, dc: DriftCondition, tol: float = DRIFT_TOL) -> DriftReport:
    """
    Pointwise slack V - phi(V) + b 1_C - PV on positive-mass states, plus
    mu(phi o V) <= b mu(C). Nonreversible kernels are checked through (P + P*)/2.

    Raises:
        DriftViolated with the worst offending state.
    """
    if len(dc.V) != P.n:
        raise DomainError(f"V has {len(dc.V)} entries for a {P.n}-state chain")
    T, label = _drift_kernel(P)
    V = np.asarray(dc.V, dtype=float)
    inside = np.zeros(P.n)
    inside[dc.C] = 1.0
    phi_V = dc.phi_of_V()
    slack = V - phi_V + dc.b * inside - T.matrix @ V
    slack[P.mu <= 0] = np.inf
    worst = int(np.argmin(slack))
    if slack[worst] < -tol * max(1.0, V[worst]):
        raise DriftViolated(f"drift fails at state {worst} by {-slack[worst]:.3g}",
                            witness={"state": worst, "slack": float(slack[worst]), "kernel": label})
    mu_phi = float(P.mu @ phi_V)
    b_mu_C = float(dc.b * (P.mu @ inside))
    if mu_phi > b_mu_C + tol:
        raise DriftViolated(f"mu(phi o V) = {mu_phi:.6g} exceeds b mu(C) = {b_mu_C:.6g}",
                            witness={"mu_phi_V": mu_phi, "b_mu_C": b_mu_C})
    return DriftReport(slack=slack, worst_state=worst, mu_phi_V=mu_phi, b_mu_C=b_mu_C, kernel=label)


def _check_hypotheses(P: FiniteKernel, dc: DriftCondition, lpi: LocalPI):
    report = rupi_check(P)
    if not report.irreducible:
        raise AssumptionViolated("the chain is reducible; mu is not the unique invariant law",
                                 witness={"unreachable": report.witness})
    verify_drift(P, dc)
    if lpi.C is not None and sorted(lpi.C) != sorted(set(dc.C)):
        raise DomainError("the local PI and the drift condition use different sets C")
    verify_local_pi(P, lpi.model_copy(update={"C": sorted(set(dc.C))}))


def spi_from_drift(dc: DriftCondition, lpi: LocalPI, P: Optional[FiniteKernel] = None) -> float:
    """
    lam / (1 + K b). With a finite kernel the drift, the local PI and
    irreducibility are checked and the bound is compared to the exact gap.
    """
    if not isinstance(dc.form, Geometric):
        raise DomainError("spi_from_drift takes a geometric drift condition")
    bound = dc.form.lam / (1.0 + lpi.constant * dc.b)
    if P is not None:
        _check_hypotheses(P, dc, lpi)
        if P.is_reversible():
            gap = spectral_gap(P)
            if bound > gap + DRIFT_TOL:
                raise BoundViolation(f"drift gap bound {bound:.6g} exceeds the exact gap {gap:.6g}",
                                     witness={"bound": bound, "gap": gap})
    return bound


def _inverse_ratio_log(phi, s_prime: float, t_high: float) -> float:
    """t = log v solving v / phi(v) = s', by Brent's method on [0, t_high]"""
    target = math.log(s_prime)

    def h(t):
        return t - phi.log_at_exp(t) - target

    if h(0.0) > 0:
        raise RangeError(f"s' = {s_prime:.6g} is below the infimum of v/phi(v)", witness={"s_prime": s_prime})
    hi = t_high
    for _ in range(200):
        if h(hi) >= 0:
            return brentq(h, 0.0, hi, rtol=ROOT_RTOL, xtol=1e-300)
        hi *= 2.0
    raise NumericalFailure("could not bracket (Id/phi)^-1", witness={"s_prime": s_prime})


def drift_beta_value(dc: DriftCondition, K: float, mu_C: float, s: float) -> float:
    """
    beta(s) = b mu(C) / phi(v) with v/phi(v) = s/(1 + K b); since phi(v) = v/s'
    at the root this is b mu(C) s' / v.

    Raises:
        RangeError when s' lies below inf v/phi(v) = 1/phi(1).
    """
    if not isinstance(dc.form, Subgeometric):
        raise DomainError("drift_beta_value takes a subgeometric drift condition")
    phi = dc.form.phi
    b = dc.b
    s_prime = s / (1.0 + K * b)
    if isinstance(phi, PhiPower) and phi.alpha >= 1:
        raise DomainError("phi(v) = c v is the geometric case; use spi_from_drift")
    if isinstance(phi, PhiPower):
        if s_prime < 1.0 / phi.c:
            raise RangeError(f"s' = {s_prime:.6g} is below 1/phi(1)", witness={"s_prime": s_prime})
        v = (phi.c * s_prime) ** (1.0 / (1.0 - phi.alpha))
        return b * mu_C / float(phi(v))
    t_high = max(math.log(max(dc.V)) + math.log(1e3), 1.0)
    t = _inverse_ratio_log(phi, s_prime, t_high)
    return b * mu_C * s_prime * math.exp(-t)


def _geometric_step(lam: float, K: float, b: float, a: float) -> Tabulated:
    """beta = a below (1 + K b)/lam and 0 from there on"""
    return Tabulated(grid=[(1.0 + K * b) / lam], values=[0.0], below=a)


def wpi_from_drift(dc: DriftCondition, lpi: LocalPI, mu_C: Optional[float] = None,
                   P: Optional[FiniteKernel] = None, grid=None, a: float = 1.0) -> WpiCertificate:
    """
    beta-form WPI from a drift condition and a local PI on C.

    phi(v) = c v^alpha, alpha < 1: beta(s) = b mu(C) c^(-1/(1-alpha)) (1+Kb)^(alpha/(1-alpha)) s^(-alpha/(1-alpha))
        from s = (1 + K b)/c on, and a below
    alpha = 1 or a geometric drift: the spectral gap as a step at (1 + K b)/lam
    otherwise: root-finding on a log grid, kept as a step majorant
    """
    if P is not None:
        _check_hypotheses(P, dc, lpi)
        inside = np.zeros(P.n, dtype=bool)
        inside[dc.C] = True
        mu_C = float(P.mu[inside].sum())
    if mu_C is None or not 0 < mu_C <= 1:
        raise DomainError("mu(C) must be given and lie in (0, 1]")
    K, b = lpi.constant, dc.b
    if isinstance(dc.form, Geometric):
        return beta_certificate(_geometric_step(dc.form.lam, K, b, a), a_bound=a, source="drift-geometric")
    phi = dc.form.phi
    if isinstance(phi, PhiPower):
        if phi.alpha >= 1:
            return beta_certificate(_geometric_step(phi.c, K, b, a), a_bound=a, source="drift-geometric")
        # no root for s' < 1/phi(1): beta = a there, as in the root-finding branch
        start = (1.0 + K * b) / phi.c
        if phi.alpha == 0:
            tail = Constant(c=min(b * mu_C / phi.c, a))
        else:
            p = phi.alpha / (1.0 - phi.alpha)
            c = b * mu_C * phi.c ** (-1.0 / (1.0 - phi.alpha)) * (1.0 + K * b) ** p
            tail = Capped(of=PowerLaw(c=c, p=p), cap=a)
        rate = Raised(of=tail, until=start, level=a)
        return beta_certificate(rate, a_bound=a, source="drift")
    if grid is None:
        settings = get_settings()
        grid = log_grid(settings.grid_low, settings.grid_high, settings.grid_points)
    values = []
    for s in np.asarray(grid, dtype=float):
        try:
            values.append(min(a, drift_beta_value(dc, K, mu_C, s)))
        except RangeError:
            values.append(a)
    rate = Tabulated.upper_step(grid, values, below=a)
    return beta_certificate(rate, a_bound=a, source="drift")


def engineered_drift(n: int = 30, alpha: float = 0.6, up: float = 0.3, down: float = 0.5,
                     holding: float = 0.5):
    """
    Birth-death walk with V(i) = (1 + i)^(1/(1-alpha)), for which
    PV - V ~ -(1-holding)(down-up) V^alpha / (1-alpha) far from 0. phi takes half
    of that slope; C collects the states where the drift still has a deficit
    (always 0 and 1) and b is the largest deficit.

    Returns:
        (P, DriftCondition)
    """
    if not 0 < alpha < 1:
        raise DomainError("alpha must lie in (0, 1)")
    if down <= up:
        raise DomainError("the walk must drift down: need down > up")
    P = birth_death(n, up, down, holding)
    V = (1.0 + np.arange(n, dtype=float)) ** (1.0 / (1.0 - alpha))
    phi = PhiPower(c=0.5 * (1.0 - holding) * (down - up) / (1.0 - alpha), alpha=alpha)
    deficit = np.maximum(P.matrix @ V - V + phi(V), 0.0)
    C = sorted(set(np.flatnonzero(deficit > 0).tolist()) | {0, 1})
    dc = DriftCondition(V=V.tolist(), C=C, form=Subgeometric(phi=phi, b=float(deficit.max()) * (1 + 1e-9)))
    return P, dc
