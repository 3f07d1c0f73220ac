"""
Worked kernels: independence sampler, ABC, level walk, heavy tails and the CLT check
"""

import math

import numpy as np
import pytest

from chains.kernel import adjoint, dirichlet_form
from chains.spectral import spectral_gap
from errors import BadSupport, DomainError, Inconclusive, TruncationTooSmall
from kernels.abc import AbcChain, abc_beta_floor, abc_build, pi_abc, weight_tail
from kernels.clt import clt_check, lp_threshold, mw_growth_bound
from kernels.heavy_tail import heavy_tail_floor, scaled_bracket
from kernels.imh import (
    ImhGeometric,
    imh_build,
    imh_decay_slope,
    imh_minorization,
    imh_spectrum,
    imh_spectrum_validate,
    imh_wpi,
)
from kernels.level_walk import (
    geometric_levels,
    level_walk_build,
    level_walk_truncated,
    reducible_products,
    zero_energy_function,
)
from rates.profiles import ConvergenceProfile


# Independence sampler

def test_imh_spectrum_first_values():
    spectrum = imh_spectrum(0.5, 0.25, 3)
    assert spectrum[0] == pytest.approx(0.0)
    assert spectrum[1] == pytest.approx(0.375)
    assert np.all(np.diff(spectrum) > 0)


def test_imh_rejects_b_above_a():
    with pytest.raises(DomainError):
        ImhGeometric(a=0.25, b=0.5)
    with pytest.raises(DomainError):
        imh_spectrum(0.25, 0.5, 5)


def test_imh_kernel_is_reversible():
    P = imh_build(ImhGeometric(a=0.5, b=0.25, truncation=30))
    assert P.is_reversible()
    np.testing.assert_allclose(P.mu @ P.matrix, P.mu, atol=1e-14)


def test_imh_truncated_spectrum_matches():
    report = imh_spectrum_validate(ImhGeometric(a=0.5, b=0.25, truncation=200), m_max=20)
    assert report.max_residual <= 1e-8
    assert report.m[0] == 1


def test_imh_spectrum_needs_truncation_margin():
    with pytest.raises(TruncationTooSmall):
        imh_spectrum_validate(ImhGeometric(a=0.5, b=0.25, truncation=10), m_max=20)


def test_imh_indicator_decays_like_one_over_n():
    slope = imh_decay_slope(ImhGeometric(a=0.5, b=0.25, truncation=200))
    assert slope == pytest.approx(-1.0, abs=0.1)


def test_imh_wpi_is_the_weight_tail():
    chain = ImhGeometric(a=0.5, b=0.25, truncation=40)
    cert = imh_wpi(chain)
    w, pi = chain.weights, chain.target
    for s in (0.5, 2.0, 10.0):
        assert cert.rate(s) == pytest.approx(pi[w > s].sum())
    assert cert.rate(w.max()) == 0.0


def test_imh_minorization():
    chain = ImhGeometric(a=0.5, b=0.25, truncation=40)
    A, eps = imh_minorization(chain, 4.0)
    assert eps == pytest.approx(chain.target[A].sum() / 4.0)
    assert np.all(chain.weights[A] <= 4.0)
    with pytest.raises(DomainError):
        imh_minorization(chain, 1e-3)


# ABC

def test_pi_abc_closed_form():
    chain = AbcChain(a=0.5, q=0.5)
    np.testing.assert_allclose(pi_abc(chain, [1, 2, 3]), [0.75, 0.75 * 0.25, 0.75 * 0.0625])


def test_abc_marginal_is_pi_abc():
    chain = AbcChain(a=0.5, q=0.5, N=2, x_max=10)
    P = abc_build(chain)
    x_of = np.array([x for x, _ in chain.labels()])
    marginal = np.array([P.mu[x_of == x].sum() for x in range(1, 11)])
    expected = pi_abc(chain, np.arange(1, 11))
    np.testing.assert_allclose(marginal, expected / expected.sum(), rtol=1e-10)
    assert P.is_reversible()


def test_abc_weight_tail_matches_chain():
    chain = AbcChain(a=0.5, q=0.5, N=1)
    P = abc_build(chain)
    x_of = np.array([x for x, _ in chain.labels()])
    # N = 1: w = 2^(x-1), so w >= 3 means x >= 3
    assert weight_tail(chain, 3.0) == pytest.approx(0.25 ** 2)
    assert P.mu[x_of >= 3].sum() == pytest.approx(weight_tail(chain, 3.0), abs=1e-10)
    assert weight_tail(chain, 0.5) == 1.0


def test_abc_floor_exponent():
    floor = abc_beta_floor(AbcChain(a=0.5, q=0.5))
    # theta = log a / log(aq) = 1/2
    assert floor.exponent == pytest.approx(2.0)
    assert floor.kappa_envelope.theta == pytest.approx(0.5)
    assert floor.valid_from > 0


# Level walk

def test_level_walk_adjoint():
    walk = level_walk_build(geometric_levels(0.5, 3))
    np.testing.assert_allclose(adjoint(walk.P).matrix, walk.P_star.matrix, atol=1e-12)
    assert len(walk.labels) == 6


def test_level_walk_products():
    walk = level_walk_build(geometric_levels(0.5, 3))
    reports = reducible_products(walk, 4)
    assert [r.irreducible for r in reports] == [False, False, True, True]


def test_zero_energy_witness():
    walk = level_walk_build(geometric_levels(0.5, 3))
    f = zero_energy_function(walk, 1)
    assert np.ptp(f) > 0
    assert walk.P.mu @ f == pytest.approx(0.0, abs=1e-14)
    assert dirichlet_form(walk.product(1), f) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(DomainError):
        zero_energy_function(walk, 3)


def test_reducible_products_name_the_top_state():
    walk = level_walk_build(geometric_levels(0.5, 3))
    top = walk.index(3, 3)
    for report in reducible_products(walk, 2):
        assert report.witness[0] == top
        assert report.closed_class == [top]
    f = zero_energy_function(walk, 2)
    assert f[top] > 0
    assert np.all(np.delete(f, top) < 0)


def test_truncated_geometric_level_walk():
    walk = level_walk_truncated(lambda i: 0.5 ** i, 5)
    assert walk.tail_mass == pytest.approx(0.5 ** 5)
    assert walk.nu.sum() == pytest.approx(1.0)
    reports = reducible_products(walk, 5)
    assert [r.irreducible for r in reports] == [False, False, False, False, True]
    with pytest.raises(DomainError):
        level_walk_truncated(lambda i: 0.5 ** i, 1)


def test_level_walk_rejects_bad_nu():
    with pytest.raises(BadSupport):
        level_walk_build([0.5, 0.0, 0.5])
    with pytest.raises(BadSupport):
        level_walk_build([0.4, 0.4])


def test_level_walk_gap_of_products():
    walk = level_walk_build(geometric_levels(0.5, 2))
    assert spectral_gap(walk.product(2)) > 0


# Heavy tails

def test_heavy_tail_floor():
    floor = heavy_tail_floor(t=2.0, eta=1.0, D=0.5)
    assert floor.exponent == pytest.approx(4.0)
    assert floor.kappa_envelope.theta == pytest.approx(0.25)
    assert floor.bracket_limit == pytest.approx(2.5, abs=0.05)


def test_heavy_tail_floor_constant_comes_from_the_envelope():
    floor = heavy_tail_floor(t=2.0, eta=1.0, D=0.5)
    # kappa(u) <= 5 u^(1/4), so alpha*(r) >= r^(-1/4) / (2^(5/4) 5)
    C = 1.0 / (2.0 ** 1.25 * 5.0)
    assert floor.kappa_envelope.c == pytest.approx(5.0)
    assert floor.floor(10.0) == pytest.approx((C / 10.0) ** 4)


def test_scaled_bracket_approaches_limit():
    values = scaled_bracket(np.array([1e-4, 1e-8, 1e-16]), 2.0, 1.0, 0.5)
    assert np.all(np.diff(np.abs(values - 2.5)) < 0)


def test_heavy_tail_needs_positive_parameters():
    with pytest.raises(DomainError):
        heavy_tail_floor(t=0.0, eta=1.0, D=0.5)


# CLT

def test_lp_threshold_and_growth():
    assert lp_threshold(2.0) == pytest.approx(4.0)
    assert mw_growth_bound(1.0, 4.0) == pytest.approx(4.0)
    with pytest.raises(DomainError):
        lp_threshold(1.0)
    with pytest.raises(DomainError):
        mw_growth_bound(2.0, 10)


@pytest.mark.parametrize("a,verdict", [(0.5, "NotEstablished"), (1.5, "Converges"), (2.0, "Converges")])
def test_clt_from_profile(a, verdict):
    n = np.maximum(np.arange(1001, dtype=float), 1.0)
    report = clt_check(ConvergenceProfile.from_values(n ** -a, a=1.0), b=3.0)
    assert report.verdict == verdict
    assert report.exponent == pytest.approx(a, abs=1e-6)
    assert report.lp_threshold == pytest.approx(3.0)


def test_clt_near_critical_is_inconclusive():
    n = np.maximum(np.arange(1001, dtype=float), 1.0)
    with pytest.raises(Inconclusive):
        clt_check(ConvergenceProfile.from_values(n ** -1.02, a=1.0))


def test_clt_on_geometric_chain(two_state):
    report = clt_check(two_state, [0.0, 1.0], n_max=200)
    assert report.verdict == "Converges"
    assert math.isfinite(report.partial_sums[-1])
    with pytest.raises(DomainError):
        clt_check(two_state)
