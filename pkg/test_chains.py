"""
Finite chains: kernels, spectra, conductance and the Cheeger pipeline
"""

import numpy as np
import pytest

from chains.cheeger import cheeger_converse, cheeger_wpi, dirichlet_pp_bounds, lift_to_product
from chains.conductance import weak_conductance
from chains.generators import birth_death, random_reversible
from chains.kernel import (
    ChainSpec,
    FiniteKernel,
    Observable,
    adjoint,
    additive_reversibilization,
    dirichlet_form,
    lazy,
    pn_decay,
    set_flow,
)
from chains.optimal import (
    alpha_star_values,
    beta_star_values,
    holding_beta_minus,
    phi_beta_eval,
    psi_sandwich,
    sticky_candidates,
)
from chains.reachability import rupi_check, zero_energy_witness
from chains.restriction import (
    restrict,
    restricted_gap,
    restriction_alpha_check,
    restriction_table,
    wpi_from_restrictions,
)
from chains.spectral import check_decay_identity, exact_asymptotic_variance, spectral_gap, spectral_measure
from errors import EmptyRestriction, InvalidInput, InvalidKernel, NotReversible, WpiWarning, ZeroConductance
from rates.certificates import alpha_to_beta
from rates.monotone import PowerLaw
from rates.profiles import gamma_from_beta


# Kernels

def test_from_matrix_rejects_bad_rows():
    with pytest.raises(InvalidKernel):
        FiniteKernel.from_matrix([[0.5, 0.4], [0.5, 0.5]])


def test_from_spec_checks_state_count():
    with pytest.raises(InvalidInput):
        FiniteKernel.from_spec({"states": 3, "matrix": [[1.0]]})
    P = FiniteKernel.from_spec(ChainSpec(states=2, matrix=[[0.7, 0.3], [0.3, 0.7]]))
    np.testing.assert_allclose(P.mu, [0.5, 0.5])


def test_adjoint_of_reversible_is_itself(random_chains):
    for P in random_chains:
        np.testing.assert_allclose(adjoint(P).matrix, P.matrix, atol=1e-12)


def test_adjoint_reverses_the_cycle(three_cycle):
    star = adjoint(three_cycle)
    np.testing.assert_allclose(star.matrix, three_cycle.matrix.T, atol=1e-12)
    np.testing.assert_allclose(adjoint(star).matrix, three_cycle.matrix, atol=1e-12)


def test_lazy_holding(random_chains):
    T = lazy(random_chains[0], 0.3)
    assert np.all(np.diag(T.matrix) >= 0.3)


def test_dirichlet_form_two_state(two_state):
    assert dirichlet_form(two_state, [0.0, 1.0]) == pytest.approx(0.15)
    assert dirichlet_form(two_state, [2.0, 2.0]) == pytest.approx(0.0)


def test_independent_kernel_energy_is_variance(independent):
    f = Observable.indicator([0, 2], independent.mu)
    mass = 0.4
    assert dirichlet_form(independent, f) == pytest.approx(mass * (1 - mass))
    assert set_flow(independent, [0, 2]) == pytest.approx(mass * (1 - mass))


def test_energy_of_symmetrized_kernel(three_cycle, rng):
    f = rng.standard_normal(3)
    assert dirichlet_form(three_cycle, f) == pytest.approx(dirichlet_form(additive_reversibilization(three_cycle), f),
                                                           abs=1e-12)


def test_indicator_energy_is_flow(random_chains):
    P = random_chains[1]
    A = [0, 2]
    assert dirichlet_form(P, Observable.indicator(A, P.mu)) == pytest.approx(set_flow(P, A), abs=1e-14)


def test_pn_decay_of_independent_kernel(independent):
    decay = pn_decay(independent, [1.0, 0.0, 3.0, 2.0], 3)
    assert decay[0] > 0
    np.testing.assert_allclose(decay[1:], 0.0, atol=1e-14)


def test_pn_decay_matches_spectral_moments(random_chains, rng):
    for P in random_chains:
        f = rng.standard_normal(P.n)
        measure = spectral_measure(P, f)
        decay = pn_decay(P, f, 20)
        expected = [measure.moment(2 * n) for n in range(21)]
        np.testing.assert_allclose(decay, expected, atol=1e-9)
        assert check_decay_identity(P, f) < 1e-9


# Spectra

def test_two_state_asymptotic_variance(two_state):
    # eigenvalue 1 - 2p = 0.4; centered (0, 1) has ||f||^2 = 1/4
    assert exact_asymptotic_variance(two_state, [0.0, 1.0]) == pytest.approx(0.25 * 1.4 / 0.6)
    assert spectral_gap(two_state) == pytest.approx(0.6)


def test_eigenfunction_is_a_single_atom(two_state):
    measure = spectral_measure(two_state, [1.0, -1.0])
    atoms = measure.masses > 1e-12
    assert atoms.sum() == 1
    assert measure.eigenvalues[atoms][0] == pytest.approx(0.4)


# Conductance

def test_two_state_conductance(two_state):
    profile = weak_conductance(two_state)
    assert profile.kappa0 == pytest.approx(0.6)
    assert profile.kappa(0.2) == pytest.approx(0.6)
    assert np.isinf(profile.kappa(0.25))


def test_independent_kernel_conductance_is_one(independent):
    profile = weak_conductance(independent)
    assert profile.kappa(np.array([0.0, 0.1, 0.2])) == pytest.approx([1.0, 1.0, 1.0])


def test_conductance_profile_is_nondecreasing(random_chains):
    u = np.linspace(0, 0.3, 40)
    for P in random_chains:
        kappa = weak_conductance(P).kappa(u)
        low, high = kappa[:-1], kappa[1:]
        # inf - inf is nan, so compare pairs instead of differencing
        assert np.all((high >= low) | (np.isinf(low) & np.isinf(high)))


def test_sampled_conductance_warns(random_chains):
    P = random_chains[0]
    with pytest.warns(WpiWarning):
        sampled = weak_conductance(P, mode="sampled", count=50, seed=3)
    assert sampled.kappa0 >= weak_conductance(P).kappa0 - 1e-12
    assert not sampled.exhaustive


def test_parallel_enumeration_matches_serial(random_chains):
    P = random_chains[2]
    serial = weak_conductance(P, parallelism=1)
    parallel = weak_conductance(P, parallelism=4)
    np.testing.assert_array_equal(serial.levels, parallel.levels)
    np.testing.assert_array_equal(serial.ratios, parallel.ratios)


# Cheeger pipeline

def test_cheeger_needs_reversibility(three_cycle):
    with pytest.raises(NotReversible):
        cheeger_wpi(three_cycle)


def test_cheeger_on_reducible_chain():
    P = FiniteKernel.from_matrix(np.eye(2), [0.5, 0.5])
    with pytest.raises(ZeroConductance):
        cheeger_wpi(P)


def test_cheeger_converse_holds(random_chains):
    for P in random_chains:
        profile = weak_conductance(P)
        assert cheeger_converse(cheeger_wpi(P, profile), profile)["holds"]


def test_cheeger_sandwich_on_indicator_alpha(random_chains):
    r = np.geomspace(1e-4, 0.25, 50)
    for P in random_chains:
        profile = weak_conductance(P)
        alpha_hat = alpha_star_values(P, r)
        positive = alpha_hat > 0
        inverse = 1.0 / alpha_hat[positive]
        assert np.all(profile.kappa(r[positive] / 16) ** 2 / 16 <= inverse * (1 + 1e-9))
        assert np.all(inverse <= 2 * profile.kappa(2 * r[positive]) * (1 + 1e-9))


def test_dirichlet_product_bounds(random_chains, rng):
    for P in random_chains:
        for _ in range(20):
            e_p, e_pp = dirichlet_pp_bounds(P, rng.standard_normal(P.n))
            assert e_pp <= 2 * e_p + 1e-12


def test_flagship_decay_domination(random_chains, rng):
    for P in random_chains:
        cert = lift_to_product(cheeger_wpi(P), P.min_holding())
        gamma = gamma_from_beta(alpha_to_beta(cert), 100)
        for _ in range(10):
            f = rng.standard_normal(P.n)
            decay = pn_decay(P, f, 100)
            assert np.all(decay <= gamma.values * np.ptp(f) ** 2 + 1e-9)


def test_lift_scales_alpha_by_holding(rng):
    P = random_reversible(5, rng, holding=0.1)
    cert = cheeger_wpi(P)
    lifted = lift_to_product(cert, P.min_holding())
    r = np.array([1e-3, 1e-2])
    np.testing.assert_allclose(lifted.rate(r), cert.rate(r) / (2 * P.min_holding()))
    assert P.min_holding() == pytest.approx(0.1)
    assert lifted.kernel == "P*P"


# Optimal functions

def test_indicator_beta_star_vanishes_past_inverse_gap(random_chains):
    for P in random_chains:
        gap = spectral_gap(P)
        s, values = beta_star_values(P, s_grid=np.array([1.0 / gap, 2.0 / gap]))
        np.testing.assert_allclose(values, 0.0, atol=1e-12)


def test_beta_star_below_any_certificate(random_chains):
    for P in random_chains:
        cert = alpha_to_beta(cheeger_wpi(P))
        s, values = beta_star_values(P)
        assert np.all(values <= cert.rate(s) + 1e-12)


def test_psi_sandwich_orders_brackets(random_chains):
    out = psi_sandwich(random_chains[0])
    assert np.all(out["lower_half"] <= out["upper"] * (1 + 1e-9))
    assert np.all(out["lower_scaled"] <= out["upper"] * (1 + 1e-9))


def test_sticky_candidates_bound_beta_star():
    # states 0 and 1 hold with probability 0.95
    hold = np.array([0.95, 0.95, 0.5, 0.5, 0.5])
    W = (np.ones((5, 5)) - np.eye(5)) / 4
    mu = 1.0 / (1.0 - hold)
    P = FiniteKernel.from_matrix(np.diag(hold) + (1.0 - hold)[:, None] * W, mu / mu.sum())
    out = sticky_candidates(P, np.array([0.06, 0.5]), s_grid=np.array([0.5, 1.0, 2.0]))
    assert out["bound"][0] > 0
    s, values = beta_star_values(P, out["candidates"], s_grid=out["s"], exhaustive=False)
    assert np.all(values >= out["bound"] - 1e-12)


def test_holding_beta_minus():
    P = lazy(FiniteKernel.from_matrix([[0.0, 1.0], [1.0, 0.0]], [0.5, 0.5]), 0.25)
    beta = holding_beta_minus(P)
    # every state holds with probability 1/4, so beta_- drops from 1/2 to 0 just after s = 4
    assert beta(4.0) == pytest.approx(0.5)
    assert beta(4.1) == 0.0


def test_phi_beta_power_law_closed_form(two_state):
    value = phi_beta_eval(two_state, [1.0, -1.0], PowerLaw(c=1.0, p=1.0), 0)
    # ||f||^2 = 1, delta = 1 - 0.4^2; alpha = 1 gives ||f||^2 / (4 delta)
    assert value == pytest.approx(1.0 / (4 * (1 - 0.16)))


# Reachability and restrictions

def test_rupi_on_cycle_and_blocks(three_cycle):
    assert rupi_check(three_cycle).irreducible
    blocks = FiniteKernel.from_matrix(np.kron(np.eye(2), np.full((2, 2), 0.5)), np.full(4, 0.25))
    report = rupi_check(blocks)
    assert not report.irreducible
    f = zero_energy_witness(blocks)
    assert dirichlet_form(blocks, f) == pytest.approx(0.0, abs=1e-14)


def test_restriction_to_everything_is_identity(random_chains):
    P = random_chains[0]
    np.testing.assert_allclose(restrict(P, range(P.n)).matrix, P.matrix)
    assert restricted_gap(P, range(P.n)) == pytest.approx(spectral_gap(P))


def test_empty_restriction():
    P = random_reversible(4, np.random.Generator(np.random.Philox(1)))
    with pytest.raises(EmptyRestriction):
        restrict(P, [])


def test_restriction_sandwich(random_chains, rng):
    P = random_chains[3]
    assert restriction_alpha_check(P, [0, 1, 2], [rng.standard_normal(P.n) for _ in range(50)]) >= -1e-12


def test_wpi_from_restrictions_full_space(random_chains):
    P = random_chains[0]
    cert = wpi_from_restrictions(P, [range(P.n)])
    gap = spectral_gap(P)
    assert cert.rate(1.0 / gap) == 0.0
    assert cert.rate(0.5 / gap) == 1.0


def test_whole_space_restriction_has_unit_mass(random_chains):
    for P in random_chains:
        row = restriction_table(P, [range(P.n)])[0]
        assert row["mass"] == 1.0
        assert row["outside"] == 0.0
        gap = spectral_gap(P)
        assert wpi_from_restrictions(P, [range(P.n)]).rate(1.0 / gap) == 0.0
