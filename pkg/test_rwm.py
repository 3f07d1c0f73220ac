"""
Random-walk Metropolis: closed-form constants and Monte Carlo conductance
"""

import math

import pytest

from errors import BoundViolation, DomainError, RegimeViolation
from kernels.rwm import (
    Ball,
    HalfSpace,
    RwmSpec,
    acceptance_lower_bound,
    ball_ceiling,
    ball_radius,
    check_conductance_ceiling,
    halfspace_ceiling,
    limiting_constant,
    rwm_conductance_mc,
    rwm_gap_bounds,
    rwm_support_lemmas,
    rwm_tv_outside,
    set_adapter,
    varsigma_star,
)


def test_varsigma_star():
    assert varsigma_star() == pytest.approx(0.073033, abs=1e-5)


def test_tv_outside_the_ball():
    assert rwm_tv_outside() == pytest.approx(31.0 / 32.0)
    with pytest.raises(DomainError):
        rwm_tv_outside(b_kappa=0.1, b_delta=0.2)


def test_limiting_constant_peaks_at_half():
    best = limiting_constant(math.sqrt(0.5))
    assert round(best, 6) == 0.000926
    assert limiting_constant(0.5) < best
    assert limiting_constant(1.0) < best


def test_spec_rejects_m_above_L():
    with pytest.raises(DomainError):
        RwmSpec(d=2, varsigma=0.5, m=2.0, L=1.0)


def test_sigma_d_scaling():
    spec = RwmSpec(d=16, varsigma=0.5, sigma0=2.0)
    assert spec.sigma_d == pytest.approx(0.25)


def test_general_convex_regime_ceiling():
    with pytest.raises(RegimeViolation):
        rwm_gap_bounds(RwmSpec(d=10, varsigma=0.1), regime="general-convex")
    bounds = rwm_gap_bounds(RwmSpec(d=10, varsigma=0.07), regime="general-convex")
    assert bounds.conductance_lower == pytest.approx(8.46e-5 * 0.07 / math.sqrt(10))
    assert bounds.derived_prefactor >= 8.46e-5


def test_gaussian_regime_has_no_ceiling():
    bounds = rwm_gap_bounds(RwmSpec(d=10, varsigma=2.0), regime="gaussian")
    assert 0 < bounds.gap_lower <= bounds.gap_upper
    assert bounds.derived_prefactor >= 0.00216
    assert bounds.gap_upper == pytest.approx(4.0 / 20.0)


def test_unknown_regime():
    with pytest.raises(DomainError):
        rwm_gap_bounds(RwmSpec(d=2, varsigma=0.5), regime="banana")


def test_ball_radius_capped_by_median():
    spec = RwmSpec(d=4, varsigma=100.0)
    assert ball_radius(spec) < spec.sigma_d * 2.0 / (4.0 * math.sqrt(2.0))
    assert ball_ceiling(spec) <= 4.0


def test_set_descriptors_parse():
    sets = set_adapter.validate_python([{"kind": "half_space", "axis": 1}, {"kind": "ball", "radius": 0.5}])
    assert isinstance(sets[0], HalfSpace) and sets[0].axis == 1
    assert isinstance(sets[1], Ball)


def test_half_space_estimate_below_ceiling():
    spec = RwmSpec(d=4, varsigma=math.sqrt(0.5))
    estimates = rwm_conductance_mc(spec, [HalfSpace()], samples=20_000, seed=11)
    est = estimates[0]
    # mu(A) mu(A^c) = 1/4 for the half-space through the mode
    assert est.product.value == pytest.approx(0.25, abs=0.02)
    assert 0 < est.ratio.value < halfspace_ceiling(spec)
    check_conductance_ceiling(spec, estimates)


def test_ceiling_violation_is_reported():
    spec = RwmSpec(d=4, varsigma=math.sqrt(0.5))
    estimates = rwm_conductance_mc(spec, [HalfSpace()], samples=20_000, seed=11)
    with pytest.raises(BoundViolation):
        check_conductance_ceiling(RwmSpec(d=4, varsigma=1e-4), estimates)


def test_empty_ball_has_no_ratio():
    spec = RwmSpec(d=2, varsigma=0.5)
    est = rwm_conductance_mc(spec, [Ball(radius=0.0)], samples=1000, seed=1)[0]
    assert est.flow.value == 0.0
    assert est.ratio is None


def test_estimates_do_not_depend_on_thread_count():
    spec = RwmSpec(d=3, varsigma=0.7)
    serial = rwm_conductance_mc(spec, [HalfSpace(), Ball(radius=1.0)], samples=70_000, seed=5, parallelism=1)
    pooled = rwm_conductance_mc(spec, [HalfSpace(), Ball(radius=1.0)], samples=70_000, seed=5, parallelism=4)
    for a, b in zip(serial, pooled):
        assert a.flow.value == b.flow.value
        assert a.product.value == b.product.value


def test_logistic_potential_has_no_monte_carlo():
    with pytest.raises(DomainError):
        rwm_conductance_mc(RwmSpec(d=2, varsigma=0.5, potential="logistic-demo"), [HalfSpace()], samples=100)


def test_support_lemmas():
    spec = RwmSpec(d=10, varsigma=math.sqrt(0.5))
    lemmas = rwm_support_lemmas(spec, u=1.0, samples=20_000, seed=3)
    assert lemmas.tv_bound == pytest.approx(0.5)
    assert lemmas.chi2_tail_exact <= lemmas.chi2_tail_bound
    assert lemmas.acceptance_lower == pytest.approx(acceptance_lower_bound(math.sqrt(0.5), 10))
    assert lemmas.acceptance.value >= lemmas.acceptance_lower


def test_gap_bounds_need_square_root_scaling():
    with pytest.raises(RegimeViolation):
        rwm_gap_bounds(RwmSpec(d=10, varsigma=0.5, beta=1.0), regime="gaussian")
    with pytest.raises(RegimeViolation):
        rwm_gap_bounds(RwmSpec(d=10, varsigma=0.05, beta=0.25), regime="general-convex")
