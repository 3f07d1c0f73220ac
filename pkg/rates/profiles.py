"""
Convergence profiles
gamma(n) from a beta-certificate, iterate bounds, and the converse direction
"""

import math
import warnings
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np

from errors import (
    DivergentIntegral,
    DomainError,
    InvalidCertificate,
    NonVanishingGamma,
    ShapeViolation,
    WpiWarning,
)
from rates.certificates import OSC, Sieve, WpiCertificate
from rates.conjugate import Conjugate, EnvelopeConjugate, k_transform
from rates.monotone import Tabulated

Origin = Literal["from_beta", "from_iterates", "empirical"]
SHAPE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class ConvergenceProfile:
    """gamma(0..n_max); `conjugate` gives the exact continuous extension when known."""

    values: np.ndarray
    origin: Origin
    a: float
    sieve: Sieve = OSC
    conjugate: Optional[Conjugate] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_values(cls, values, a: Optional[float] = None, origin: Origin = "empirical", sieve: Sieve = OSC):
        values = np.asarray(values, dtype=float)
        return cls(values=values, origin=origin, a=float(values[0] if a is None else a), sieve=sieve)

    @property
    def n_max(self) -> int:
        return len(self.values) - 1

    def __len__(self):
        return len(self.values)

    def __getitem__(self, n):
        return self.values[n]

    def at(self, t):
        """Continuous extension: exact when the conjugate is known, log-linear otherwise"""
        t = np.asarray(t, dtype=float)
        if self.conjugate is not None:
            out = np.where(t <= 0, self.a, self.conjugate.F_inverse(np.maximum(t, 0.0), self.a))
        else:
            n = np.arange(len(self.values), dtype=float)
            with np.errstate(divide="ignore"):
                logs = np.log(self.values)
            out = np.exp(np.interp(t, n, logs))
        return float(out) if out.ndim == 0 else out

    def inverse_at(self, v):
        """t with gamma~(t) = v on the continuous extension"""
        v = np.asarray(v, dtype=float)
        if self.conjugate is not None:
            out = self.conjugate.F(v, self.a)
        else:
            n = np.arange(len(self.values), dtype=float)
            logs = np.log(self.values)
            out = np.interp(-np.log(v), -logs, n)
        return float(out) if out.ndim == 0 else out

    def as_rate(self) -> Tabulated:
        """Step rate in n (gamma(t) = gamma(floor t))"""
        n = np.arange(1, len(self.values), dtype=float)
        return Tabulated(grid=n.tolist(), values=np.minimum.accumulate(self.values[1:]).tolist(),
                         below=float(max(self.values[0], self.values[1])))


def _beta_conjugate(cert: WpiCertificate) -> Conjugate:
    if cert.parametrization != "beta":
        raise InvalidCertificate("expected a beta-form certificate")
    if not cert.invariant_holds():
        raise InvalidCertificate("beta exceeds a_bound", witness={"sup": cert.rate.sup_value()})
    return k_transform(cert.rate)


def gamma_from_beta(cert: WpiCertificate, n_max: int) -> ConvergenceProfile:
    """
    gamma(n) = F_a^{-1}(n) with F_a(x) = int_x^a dv / K*(v), gamma(0) = a.

    Args:
        cert: beta-form certificate
        n_max: last index computed (>= 1)
    """
    if n_max < 1:
        raise DomainError("n_max must be >= 1")
    conj = _beta_conjugate(cert)
    a = cert.a_bound
    floor = conj.zero_level
    if floor >= a:
        raise DivergentIntegral(
            f"K* vanishes on [0, {floor:g}] which covers (0, a]; F_a is undefined",
            witness={"zero_level": floor, "a": a},
        )
    n = np.arange(n_max + 1, dtype=float)
    values = np.asarray(conj.F_inverse(n, a), dtype=float)
    values[0] = a
    if floor > 0:
        if cert.rate.vanishes():
            warnings.warn(
                f"gamma levels off at {floor:.3g}: the resolution of the beta representation",
                WpiWarning,
            )
        else:
            raise NonVanishingGamma(
                f"beta does not vanish; gamma stalls at {floor:g}",
                witness={"stall": floor, "tail": cert.rate.tail_value()},
            )
    return ConvergenceProfile(values=values, origin="from_beta", a=a, sieve=cert.sieve, conjugate=conj)


def iterate_bound(cert: WpiCertificate, v0: float, n_max: int) -> ConvergenceProfile:
    """v_n = max(0, v_{n-1} - K*(v_{n-1})), the cheaper alternative to F_a^{-1}"""
    if not 0 < v0 <= cert.a_bound:
        raise DomainError(f"v0 must lie in (0, {cert.a_bound}], got {v0}")
    conj = _beta_conjugate(cert)
    values = np.empty(n_max + 1)
    values[0] = v = float(v0)
    for n in range(1, n_max + 1):
        step = conj(v)
        v = 0.0 if not math.isfinite(step) else max(0.0, v - step)
        values[n] = v
    return ConvergenceProfile(values=values, origin="from_iterates", a=float(v0), sieve=cert.sieve)


def beta_from_gamma(profile: ConvergenceProfile, mode: str = "FForm") -> EnvelopeConjugate:
    """
    Recover K* from a rate of convergence.

    Args:
        profile: gamma(0..n_max), strictly positive and decreasing
        mode: "IterateForm" (gamma is an iterate sequence of Id - K*),
              "FForm" (gamma = F^{-1}(n + F(a))), or
              "ReversibleDecreasing" (any decreasing gamma for a reversible kernel)

    Returns:
        K* as a piecewise-linear conjugate; `beta_from_conjugate` converts onward.
    """
    g = np.asarray(profile.values, dtype=float)
    positive = g > 0
    if not positive.all():
        g = g[: int(np.argmin(positive))]
    if len(g) < 3 or np.any(np.diff(g) >= 0):
        raise ShapeViolation("gamma must be strictly positive and strictly decreasing on at least 3 points")

    if mode == "IterateForm":
        v, k = g[:-1], g[:-1] - g[1:]
        slopes = np.diff(np.concatenate([[0.0], k[::-1]])) / np.diff(np.concatenate([[0.0], v[::-1]]))
        if np.any(np.diff(slopes) < -SHAPE_TOL * max(1.0, float(np.abs(slopes).max()))):
            raise ShapeViolation("iterate increments are not convex in the level")
        return EnvelopeConjugate.from_points(v, k, cap=float(g[0]))

    if mode == "FForm":
        second = g[:-2] - 2 * g[1:-1] + g[2:]
        if np.any(second < -SHAPE_TOL):
            raise ShapeViolation("gamma is not convex", witness=int(np.argmin(second)))
        log_diff = np.log(g[:-1] - g[1:])
        log_second = log_diff[:-2] - 2 * log_diff[1:-1] + log_diff[2:]
        if log_second.size and np.any(log_second < -1e-8):
            raise ShapeViolation("log(-D gamma) is not convex", witness=int(np.argmin(log_second)))
        top = len(g) - 2
        if profile.conjugate is not None:
            t = np.linspace(0.0, top, 8 * top + 1)
            v = profile.at(t)
        else:
            v = g[: top + 1]
        t_of_v = profile.inverse_at(v)
        k = v - profile.at(np.asarray(t_of_v) + 1.0)
        return EnvelopeConjugate.from_points(v, k, cap=float(g[0]))

    if mode == "ReversibleDecreasing":
        # ||P^n f||^2 is log-convex in n for reversible P, so
        # ||P f||^2 / ||f||^2 <= (gamma(n)/v)^(1/n) for every n
        v = np.geomspace(g[-1], g[0], 256)
        n = np.arange(1, len(g), dtype=float)
        ratio = (g[1:][None, :] / v[:, None]) ** (1.0 / n[None, :])
        k = np.maximum(v * np.max(1.0 - ratio, axis=1), 0.0)
        # the bound is increasing in v, so k[i] is valid on [v[i], v[i+1]]
        return EnvelopeConjugate.from_points(v[1:], k[:-1], cap=float(g[0]))

    raise DomainError(f"unknown mode '{mode}'")
