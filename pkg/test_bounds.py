"""
WPI constructors: isoperimetry, local Poincare inequalities, drift and conductance
"""

import math

import numpy as np
import pytest

from bounds.conductance import wpi_from_conductance
from bounds.drift import (
    DriftCondition,
    Geometric,
    PhiLog,
    PhiPower,
    Subgeometric,
    drift_adapter,
    drift_beta_value,
    engineered_drift,
    spi_from_drift,
    verify_drift,
    wpi_from_drift,
)
from bounds.isoperimetry import conductance_from_isoperimetry, restricted_conductance
from bounds.local_pi import (
    local_pi_from_isoperimetry,
    local_pi_from_minorization,
    local_pi_from_restriction,
    local_pi_ratio,
    verify_local_pi,
)
from chains.conductance import KappaPower, weak_conductance
from chains.kernel import FiniteKernel
from chains.spectral import spectral_gap
from errors import DomainError, DriftViolated, MinorizationFails, RangeError, ZeroConductance
from rates.monotone import log_grid


# Isoperimetry

def test_isoperimetric_prefactors():
    single, product = conductance_from_isoperimetry(1.0, 1.0, 1.0)
    assert single == pytest.approx(0.25 * math.log(2) / 8)
    assert product == pytest.approx(0.25 * math.log(2) / 4)
    # large delta saturates the min at 1
    assert conductance_from_isoperimetry(0.4, 100.0, 1.0) == pytest.approx((0.1, 0.1))


def test_isoperimetry_domain():
    with pytest.raises(DomainError):
        conductance_from_isoperimetry(0.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        conductance_from_isoperimetry(0.5, 1.0, 1.0, mu_C=1.5)


def test_restricted_conductance_undoes_mass_scaling():
    _, whole = conductance_from_isoperimetry(0.5, 2.0, 1.0)
    assert restricted_conductance(0.5, 2.0, 1.0, 0.3) == pytest.approx(whole)
    lpi = local_pi_from_isoperimetry(0.5, 2.0, 1.0, 0.3, C=[2, 0])
    assert lpi.constant == pytest.approx(8.0 / whole ** 2)
    assert lpi.C == [0, 2]


# Local Poincare inequalities

def test_minorization_constant(independent):
    lpi = local_pi_from_minorization(0.5, P=independent)
    assert lpi.constant == pytest.approx(4.0)
    assert lpi.flavor == "minorization"


def test_minorization_fails(two_state):
    # column minima add up to 0.6
    with pytest.raises(MinorizationFails) as info:
        local_pi_from_minorization(0.9, P=two_state)
    assert info.value.witness["overlap"] == pytest.approx(0.6)
    with pytest.raises(MinorizationFails):
        local_pi_from_minorization(0.9, P=two_state, nu=[0.5, 0.5])
    with pytest.raises(DomainError):
        local_pi_from_minorization(1.5)


def test_independent_kernel_local_pi(independent):
    lpi = local_pi_from_minorization(1.0, P=independent, nu=independent.mu)
    # Var(f) = E(Pi, f) and K = 2
    assert verify_local_pi(independent, lpi, count=50) == pytest.approx(0.5)


def test_restricted_local_pi(random_chains, rng):
    P = random_chains[0]
    lpi = local_pi_from_restriction(P, [0, 1, 2])
    assert lpi.flavor == "restricted"
    for _ in range(50):
        assert local_pi_ratio(P, lpi, rng.standard_normal(P.n)) <= 1.0 + 1e-9


def test_restriction_to_everything_is_the_gap(two_state):
    assert local_pi_from_restriction(two_state, [0, 1]).constant == pytest.approx(1.0 / 0.6)


# Drift

def test_engineered_drift_holds():
    P, dc = engineered_drift()
    report = verify_drift(P, dc)
    assert report.min_slack >= -1e-10
    assert report.mu_phi_V <= report.b_mu_C
    assert {0, 1} <= set(dc.C)
    assert dc.form.phi.c == pytest.approx(0.125)


def test_engineered_drift_domain():
    with pytest.raises(DomainError):
        engineered_drift(alpha=1.0)
    with pytest.raises(DomainError):
        engineered_drift(up=0.5, down=0.3)


def test_drift_violation_names_a_state():
    P, dc = engineered_drift()
    weak = dc.model_copy(update={"form": Subgeometric(phi=dc.form.phi, b=1e-6)})
    with pytest.raises(DriftViolated) as info:
        verify_drift(P, weak)
    assert info.value.witness["state"] in dc.C


def test_drift_condition_validation():
    with pytest.raises(DomainError):
        DriftCondition(V=[0.5, 2.0], C=[0], form=Geometric(lam=0.5, b=1.0))
    with pytest.raises(DomainError):
        DriftCondition(V=[1.0, 2.0], C=[], form=Geometric(lam=0.5, b=1.0))


def test_drift_condition_from_json():
    dc = drift_adapter.validate_python({"V": [1.0, 3.0], "C": [0],
                                        "form": {"kind": "subgeometric", "b": 2.0,
                                                 "phi": {"kind": "log", "c": 1.0, "alpha": 1.0}}})
    assert isinstance(dc.form.phi, PhiLog)


def test_geometric_drift_gives_spectral_gap(two_state):
    dc = DriftCondition(V=[1.0, 1.0], C=[0, 1], form=Geometric(lam=1.0, b=1.0))
    lpi = local_pi_from_minorization(0.6, C=[0, 1], P=two_state)
    bound = spi_from_drift(dc, lpi, P=two_state)
    assert bound == pytest.approx(1.0 / (1.0 + 2.0 / 0.6))
    assert bound <= spectral_gap(two_state)


def test_spi_needs_geometric_drift():
    P, dc = engineered_drift()
    with pytest.raises(DomainError):
        spi_from_drift(dc, local_pi_from_restriction(P, dc.C))


def test_power_drift_wpi_exponent():
    P, dc = engineered_drift(alpha=0.6)
    cert = wpi_from_drift(dc, local_pi_from_restriction(P, dc.C), P=P)
    s = log_grid(1.0, 1e12, 200)
    beta = np.asarray(cert.rate(s), dtype=float)
    keep = (beta > 0) & (beta < 1.0)
    slope = np.polyfit(np.log(s[keep]), np.log(beta[keep]), 1)[0]
    assert slope == pytest.approx(-1.5, abs=0.05)


def test_geometric_drift_wpi_is_a_step():
    dc = DriftCondition(V=[1.0, 1.0], C=[0, 1], form=Geometric(lam=0.5, b=1.0))
    cert = wpi_from_drift(dc, local_pi_from_minorization(0.5), mu_C=1.0)
    # threshold (1 + K b) / lam = 10
    assert cert.rate(9.9) == 1.0
    assert cert.rate(10.0) == 0.0


def test_phi_log_is_continuous_at_the_switch():
    phi = PhiLog(c=1.0, alpha=1.0)
    v = phi.v_star
    assert float(phi(v * (1 - 1e-9))) == pytest.approx(float(phi(v)), rel=1e-6)
    for t in (0.5, 5.0):
        assert phi.log_at_exp(t) == pytest.approx(math.log(float(phi(math.exp(t)))))


def test_log_drift_beta_by_root_finding():
    dc = DriftCondition(V=[1.0, 2.0], C=[0], form=Subgeometric(phi=PhiLog(c=1.0, alpha=1.0), b=1.0))
    # s' = 25 and v / phi(v) = log v, so v = e^25
    value = drift_beta_value(dc, K=1.0, mu_C=0.5, s=50.0)
    assert value == pytest.approx(0.5 * 25.0 * math.exp(-25.0), rel=1e-9)
    with pytest.raises(RangeError):
        drift_beta_value(dc, K=1.0, mu_C=0.5, s=0.1)


def test_power_drift_range():
    dc = DriftCondition(V=[1.0, 2.0], C=[0], form=Subgeometric(phi=PhiPower(c=0.5, alpha=0.5), b=1.0))
    with pytest.raises(RangeError):
        drift_beta_value(dc, K=1.0, mu_C=0.5, s=1.0)
    # s' = 4, v = (0.5 * 4)^2 = 4, phi(v) = 1
    assert drift_beta_value(dc, K=1.0, mu_C=0.5, s=8.0) == pytest.approx(0.5)


def test_power_drift_wpi_matches_root_finding_range():
    dc = DriftCondition(V=[1.0, 2.0], C=[0], form=Subgeometric(phi=PhiPower(c=1.0, alpha=0.5), b=1.0))
    cert = wpi_from_drift(dc, local_pi_from_minorization(0.5), mu_C=0.5)
    # K = 4, so s' = s / 5 and the root exists from s = 5 on
    with pytest.raises(RangeError):
        drift_beta_value(dc, K=4.0, mu_C=0.5, s=4.9)
    assert cert.rate(4.9) == 1.0
    assert cert.rate(5.0) == pytest.approx(0.5)
    assert cert.rate(20.0) == pytest.approx(drift_beta_value(dc, K=4.0, mu_C=0.5, s=20.0))
    assert cert.rate(20.0) == pytest.approx(0.125)


# Conductance

def test_kappa_power_certificate():
    cert = wpi_from_conductance(KappaPower(c=2.0, theta=0.5))
    assert cert.parametrization == "alpha"
    # alpha(r) = 64 / r, clipped from a = 1 on
    assert cert.rate(0.5) == pytest.approx(128.0)
    assert cert.rate(1.0) == 0.0
    flat = wpi_from_conductance(KappaPower(c=2.0, theta=0.0))
    assert flat.rate(0.5) == pytest.approx(4.0)


def test_profile_certificate_matches_kappa(random_chains):
    P = random_chains[1]
    profile = weak_conductance(P)
    cert = wpi_from_conductance(profile)
    for r in (0.003, 0.01, 0.1):
        kappa = profile.kappa(r / 16)
        expected = 0.0 if math.isinf(kappa) else 16.0 / kappa ** 2
        assert cert.rate(r) == pytest.approx(expected)


def test_profile_certificate_needs_conductance():
    with pytest.raises(ZeroConductance):
        wpi_from_conductance(weak_conductance(FiniteKernel.from_matrix(np.eye(3), np.full(3, 1 / 3))))
