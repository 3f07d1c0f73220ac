"""
WPIs from conductance, enumerated or analytic
"""

from typing import Union

from chains.cheeger import cheeger_alpha_rate
from chains.conductance import ConductanceProfile, KappaPower
from errors import ZeroConductance
from rates.certificates import WpiCertificate, alpha_certificate
from rates.monotone import Constant, PowerLaw


def wpi_from_conductance(profile: Union[ConductanceProfile, KappaPower]) -> WpiCertificate:
    """
    alpha(r) = 16 / kappa(r/16)^2.

    An envelope kappa(u) = c u^theta gives alpha(r) = 16^(1 + 2 theta) / (c^2 r^(2 theta)),
    a constant 16/c^2 when theta = 0. The envelope must bound kappa from below.
    """
    if isinstance(profile, ConductanceProfile):
        return alpha_certificate(cheeger_alpha_rate(profile), source="conductance")
    if profile.c <= 0:
        raise ZeroConductance("kappa vanishes identically", witness={"c": profile.c})
    theta = profile.theta
    if theta == 0:
        return alpha_certificate(Constant(c=16.0 / profile.c ** 2), source="conductance-envelope")
    rate = PowerLaw(c=16.0 ** (1.0 + 2.0 * theta) / profile.c ** 2, p=2.0 * theta)
    return alpha_certificate(rate, source="conductance-envelope")
