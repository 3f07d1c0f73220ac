"""
WPI certificates
A sieve tag plus a rate in alpha- or beta-form, and the conversions between them
"""

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from errors import DomainError, InvalidCertificate
from rates.monotone import Capped, Clipped, Constant, MonotoneRate, generalized_inverse

TOL = 1e-12


class Sieve(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["osc", "pnorm", "custom"] = "osc"
    p: Optional[float] = None
    tag: Optional[str] = None

    @model_validator(mode="after")
    def _check(self):
        if self.kind == "pnorm" and (self.p is None or self.p <= 2):
            raise DomainError(f"PNorm sieve needs p > 2, got {self.p}")
        return self

    def key(self) -> str:
        if self.kind == "pnorm":
            return f"pnorm:{self.p:g}"
        if self.kind == "custom":
            return f"custom:{self.tag}"
        return "osc"


OSC = Sieve()


class WpiCertificate(BaseModel):
    """
    Asserts ||f||^2 <= alpha(r) E(T,f) + r Phi(f)  (alpha-form)
    or      ||f||^2 <= s E(T,f) + beta(s) Phi(f)   (beta-form)
    for centered f and the named kernel.
    """

    model_config = ConfigDict(frozen=True)

    sieve: Sieve = OSC
    parametrization: Literal["alpha", "beta"]
    rate: MonotoneRate
    a_bound: float = Field(default=1.0, gt=0)
    kernel: str = "P"
    source: str = ""

    def invariant_holds(self) -> bool:
        if self.parametrization == "alpha":
            return self.rate.zero_point() <= self.a_bound * (1 + TOL)
        return self.rate.sup_value() <= self.a_bound * (1 + TOL)


def beta_certificate(rate, a_bound: float = 1.0, sieve: Sieve = OSC, kernel: str = "P", source: str = "") -> WpiCertificate:
    """beta-form certificate; the rate is capped at a since ||f||^2 <= a Phi(f) always"""
    if rate.sup_value() > a_bound * (1 + TOL):
        rate = Capped(of=rate, cap=a_bound)
    return WpiCertificate(sieve=sieve, parametrization="beta", rate=rate, a_bound=a_bound,
                          kernel=kernel, source=source)


def alpha_certificate(rate, a_bound: float = 1.0, sieve: Sieve = OSC, kernel: str = "P", source: str = "") -> WpiCertificate:
    """alpha-form certificate; the rate is clipped to zero from a on"""
    if rate.zero_point() > a_bound * (1 + TOL):
        rate = Clipped(of=rate, at=a_bound)
    return WpiCertificate(sieve=sieve, parametrization="alpha", rate=rate, a_bound=a_bound,
                          kernel=kernel, source=source)


def alpha_to_beta(cert: WpiCertificate) -> WpiCertificate:
    """beta := alpha^-, same sieve and a_bound"""
    if cert.parametrization != "alpha":
        raise InvalidCertificate("alpha_to_beta expects an alpha-form certificate")
    if not cert.invariant_holds():
        raise InvalidCertificate(
            f"alpha is positive beyond a_bound={cert.a_bound}",
            witness={"zero_point": cert.rate.zero_point()},
        )
    beta = generalized_inverse(cert.rate)
    return beta_certificate(beta, cert.a_bound, cert.sieve, cert.kernel, source=cert.source or "alpha_to_beta")


def beta_to_alpha(cert: WpiCertificate) -> WpiCertificate:
    """alpha := beta^-, clipped at a_bound"""
    if cert.parametrization != "beta":
        raise InvalidCertificate("beta_to_alpha expects a beta-form certificate")
    rate = cert.rate
    if not rate.vanishes():
        raise InvalidCertificate("beta does not vanish at infinity", witness={"tail": rate.tail_value()})
    if not cert.invariant_holds():
        raise InvalidCertificate(
            f"beta exceeds a_bound={cert.a_bound}",
            witness={"sup": rate.sup_value()},
        )
    alpha = generalized_inverse(rate)
    if isinstance(alpha, Constant) and alpha.c == 0:
        return WpiCertificate(sieve=cert.sieve, parametrization="alpha", rate=alpha,
                              a_bound=cert.a_bound, kernel=cert.kernel, source=cert.source)
    return alpha_certificate(alpha, cert.a_bound, cert.sieve, cert.kernel, source=cert.source or "beta_to_alpha")
