"""
Rate calculus: generalized inverses, K*, gamma and the derived bounds
"""

import math
import warnings

import numpy as np
import pytest

from errors import DivergentB, DomainError, IncomparableSieves, InvalidCertificate, InvalidInput, NonVanishingGamma
from rates.certificates import Sieve, WpiCertificate, alpha_certificate, alpha_to_beta, beta_certificate, beta_to_alpha
from rates.conjugate import beta_from_conjugate, k_transform
from rates.derived import asym_var_bound, gamma_p_extend, order_rates, spectral_mass_bound, square_wpi
from rates.monotone import (
    Capped,
    Constant,
    ExpPower,
    PowerLaw,
    Raised,
    Tabulated,
    generalized_inverse,
    parse_rate,
    parse_rate_flag,
    scale_rate,
    stretch_rate,
)
from rates.profiles import ConvergenceProfile, beta_from_gamma, gamma_from_beta, iterate_bound


# Generalized inverse

def test_power_law_inverse_is_closed_form():
    g = generalized_inverse(PowerLaw(c=2.0, p=2.0))
    assert isinstance(g, PowerLaw)
    assert g.c == pytest.approx(math.sqrt(2.0))
    assert g.p == pytest.approx(0.5)
    x = 0.37
    assert PowerLaw(c=2.0, p=2.0)(g(x)) == pytest.approx(x)


def test_reciprocal_is_self_inverse():
    g = generalized_inverse(PowerLaw(c=1.0, p=1.0))
    assert g.c == pytest.approx(1.0)
    assert g.p == pytest.approx(1.0)


def test_step_inverse_uses_right_continuous_convention():
    f = Tabulated(grid=[1.0, 2.0], values=[3.0, 1.0])
    g = generalized_inverse(f)
    assert g(2.0) == 2.0
    assert g(1.0) == 2.0
    assert g(3.0) == 0.0
    assert math.isinf(g(0.5))


def test_double_inverse_recovers_step(rng):
    for _ in range(20):
        k = int(rng.integers(2, 8))
        grid = np.cumsum(rng.uniform(0.1, 1.0, k))
        values = np.sort(rng.uniform(0.1, 3.0, k))[::-1] + np.arange(k)[::-1] * 1e-3
        f = Tabulated(grid=grid.tolist(), values=values.tolist())
        h = generalized_inverse(generalized_inverse(f))
        y = rng.uniform(0.0, grid[-1] * 1.5, 50)
        np.testing.assert_allclose(h(y), f(y), atol=1e-10)


def test_exp_power_inverse_by_closed_form():
    f = ExpPower(c=1.0, lam=2.0, theta=0.5)
    g = generalized_inverse(f)
    x = 0.2
    assert f(g(x)) == pytest.approx(x, rel=1e-9)


def test_tabulated_rejects_increasing_values():
    with pytest.raises(InvalidInput):
        Tabulated(grid=[1.0, 2.0], values=[1.0, 2.0])


def test_parse_rate_flag_and_json():
    assert parse_rate_flag("powerlaw:1,2") == PowerLaw(c=1.0, p=2.0)
    assert parse_rate({"form": "constant", "c": 0.2}) == Constant(c=0.2)
    with pytest.raises(InvalidInput):
        parse_rate_flag("zigzag:1")


def test_scale_and_stretch_keep_closed_forms():
    f = PowerLaw(c=2.0, p=1.5)
    assert scale_rate(f, 3.0)(2.0) == pytest.approx(3.0 * f(2.0))
    assert stretch_rate(f, 4.0)(8.0) == pytest.approx(f(2.0))
    t = Tabulated(grid=[1.0, 2.0], values=[1.0, 0.5])
    assert stretch_rate(t, 2.0)(3.0) == pytest.approx(t(1.5))


def test_raised_rate():
    r = Raised(of=PowerLaw(c=1.0, p=1.0), until=2.0, level=1.0)
    assert r(1.5) == 1.0
    assert r(4.0) == pytest.approx(0.25)
    assert r.sup_value() == 1.0
    assert stretch_rate(r, 2.0)(3.0) == 1.0
    assert stretch_rate(r, 2.0)(8.0) == pytest.approx(0.25)
    assert parse_rate(r.model_dump()) == r
    with pytest.raises(InvalidInput):
        Raised(of=PowerLaw(c=1.0, p=1.0), until=0.5, level=1.0)


# Certificates

def test_beta_to_alpha_of_reciprocal_is_clipped():
    alpha = beta_to_alpha(beta_certificate(PowerLaw(c=1.0, p=1.0)))
    assert alpha.parametrization == "alpha"
    assert alpha.rate(0.5) == pytest.approx(2.0)
    assert alpha.rate(1.0) == 0.0
    assert alpha.rate(3.0) == 0.0


def test_beta_above_a_bound_is_rejected():
    # built directly, so not capped
    loose = WpiCertificate(parametrization="beta", rate=PowerLaw(c=2.0, p=1.0), a_bound=1.0)
    with pytest.raises(InvalidCertificate):
        beta_to_alpha(loose)


def test_zero_alpha_gives_zero_beta():
    beta = alpha_to_beta(alpha_certificate(Constant(c=0.0)))
    assert beta.rate(0.1) == 0.0
    assert beta.rate(10.0) == 0.0


def test_alpha_beta_roundtrip_on_power_laws():
    for p in (0.5, 1.0, 2.0):
        cert = beta_certificate(PowerLaw(c=1.0, p=p))
        back = alpha_to_beta(beta_to_alpha(cert))
        s = np.geomspace(1.5, 100.0, 20)
        np.testing.assert_allclose(back.rate(s), cert.rate(s), rtol=1e-9)


def test_beta_certificate_caps_at_a_bound():
    cert = beta_certificate(PowerLaw(c=1.0, p=1.0), a_bound=0.5)
    assert isinstance(cert.rate, Capped)
    assert cert.invariant_holds()
    assert cert.rate(0.01) == 0.5


def test_pnorm_sieve_needs_p_above_two():
    with pytest.raises(DomainError):
        Sieve(kind="pnorm", p=2.0)


# K* transform

def test_k_star_of_reciprocal():
    conj = k_transform(PowerLaw(c=1.0, p=1.0))
    v = np.array([0.1, 0.5, 1.0])
    np.testing.assert_allclose(conj(v), v ** 2 / 4)


def test_k_star_of_power_matches_grid_sup():
    p = 2.0
    conj = k_transform(PowerLaw(c=1.0, p=p))
    u = np.geomspace(1e-6, 1e3, 200_000)
    for v in (0.2, 0.7):
        # K(u) = u beta(1/u) = u^(1+p)
        grid_sup = np.max(u * v - u ** (1 + p))
        closed = p * (v / (1 + p)) ** ((1 + p) / p)
        assert conj(v) == pytest.approx(closed, rel=1e-9)
        assert conj(v) == pytest.approx(grid_sup, rel=1e-4)


def test_k_star_is_convex(rng):
    conj = k_transform(Tabulated(grid=[0.5, 1.0, 4.0, 10.0], values=[0.9, 0.5, 0.2, 0.0], below=1.0))
    for _ in range(200):
        u, v = rng.uniform(0.0, 1.0, 2)
        assert conj((u + v) / 2) <= (conj(u) + conj(v)) / 2 + 1e-9


def test_beta_from_conjugate_brackets_the_power_law():
    beta = PowerLaw(c=1.0, p=1.0)
    back = beta_from_conjugate(k_transform(beta), grid=np.geomspace(1.0, 100.0, 50))
    s = np.geomspace(1.0, 100.0, 50)
    assert np.all(back(s) >= beta(s) - 1e-9)


# gamma and iterates

def test_gamma_of_reciprocal_beta():
    gamma = gamma_from_beta(beta_certificate(PowerLaw(c=1.0, p=1.0)), 100)
    n = np.arange(101)
    np.testing.assert_allclose(gamma.values, 4.0 / (n + 4.0), rtol=1e-9)
    assert gamma.values[0] == 1.0
    assert np.all(np.diff(gamma.values) <= 0)


def test_constant_beta_stalls():
    with pytest.raises(NonVanishingGamma):
        gamma_from_beta(beta_certificate(Constant(c=0.3)), 10)


def test_gamma_exponent_from_drift_shaped_beta():
    # beta ~ s^-1.5 gives gamma ~ n^-1.5
    gamma = gamma_from_beta(beta_certificate(PowerLaw(c=1.0, p=1.5)), 10_000)
    n = np.arange(1000, 10_001)
    slope = np.polyfit(np.log(n), np.log(gamma.values[1000:]), 1)[0]
    assert slope == pytest.approx(-1.5, abs=0.05)


def test_iterate_bound_two_steps():
    profile = iterate_bound(beta_certificate(PowerLaw(c=1.0, p=1.0)), 1.0, 2)
    assert profile.values[1] == pytest.approx(0.75)
    assert profile.values[2] == pytest.approx(39.0 / 64.0)


def test_iterates_dominated_by_f_form(rng):
    for _ in range(20):
        p = float(rng.uniform(0.3, 3.0))
        cert = beta_certificate(PowerLaw(c=float(rng.uniform(0.1, 2.0)), p=p))
        gamma = gamma_from_beta(cert, 50)
        iterates = iterate_bound(cert, 1.0, 50)
        assert np.all(iterates.values <= gamma.values + 1e-9)


def test_beta_from_gamma_geometric():
    rho = 0.8
    profile = ConvergenceProfile.from_values(rho ** np.arange(60.0), a=1.0)
    conj = beta_from_gamma(profile, mode="IterateForm")
    for v in (0.5, 0.1):
        assert conj(v) == pytest.approx((1 - rho) * v, rel=1e-6)


def test_beta_from_gamma_reciprocal():
    n = np.arange(200.0)
    profile = ConvergenceProfile.from_values(4.0 / (n + 4.0), a=1.0)
    conj = beta_from_gamma(profile, mode="IterateForm")
    for v in (0.5, 0.2):
        # iterates of gamma(n) = 4/(n+4) step down by v^2/(4+v)
        assert conj(v) == pytest.approx(v * v / (4 + v), rel=1e-2)


# Derived bounds

def test_gamma_p_extension():
    n = np.maximum(np.arange(20.0), 1.0)
    profile = ConvergenceProfile.from_values(n ** -2.0, a=1.0)
    out = gamma_p_extend(profile, 4.0)
    np.testing.assert_allclose(out.values[1:], 2.0 ** 5 / n[1:], rtol=1e-12)
    assert out.sieve.key() == "pnorm:4"


def test_asym_var_bound_diverges_for_reciprocal_beta():
    # K*(w) = w^2/4 makes int_0 w / K*(w) dw diverge
    with pytest.raises(DivergentB) as info:
        asym_var_bound(beta_certificate(PowerLaw(c=1.0, p=1.0)), 0.5, 1.0)
    assert math.isinf(info.value.bound)


def test_asym_var_bound_geometric():
    # beta a step at 1/(1-rho): K*(w) = (1-rho) w and B(v) = v / (1-rho)
    rho = 0.5
    cert = beta_certificate(Tabulated(grid=[1.0 / (1 - rho)], values=[0.0], below=1.0))
    assert asym_var_bound(cert, 0.25, 2.0) == pytest.approx(4 * 2.0 * 0.25 / (1 - rho), rel=1e-9)


def test_spectral_mass_bound_geometric_is_vacuous():
    rho = 0.7
    profile = ConvergenceProfile.from_values(rho ** np.arange(30.0), a=1.0)
    assert spectral_mass_bound(profile, -math.log(rho)) == pytest.approx(1.0)


def test_order_rates_follows_beta():
    small = beta_certificate(PowerLaw(c=1.0, p=2.0))
    large = beta_certificate(PowerLaw(c=1.0, p=1.0))
    report = order_rates(small, large, 50, s_grid=np.geomspace(1.0, 100.0, 30))
    assert report.beta_order == "2>=1"
    assert report.gamma_order == "2>=1"
    same = order_rates(small, small, 20)
    assert same.gamma_order == "equal"


def test_order_rates_rejects_different_sieves():
    cert = beta_certificate(PowerLaw(c=1.0, p=1.0))
    other = beta_certificate(PowerLaw(c=1.0, p=1.0), sieve=Sieve(kind="pnorm", p=4.0))
    with pytest.raises(IncomparableSieves):
        order_rates(cert, other, 10)


def test_square_wpi_is_a_nonincreasing_step():
    beta = PowerLaw(c=1.0, p=1.0)
    squared = square_wpi(beta, Capped(of=PowerLaw(c=0.5, p=1.0), cap=1.0), resolution=128,
                         grid=np.geomspace(1.0, 100.0, 20))
    values = squared(np.geomspace(1.0, 100.0, 20))
    assert np.all(np.diff(values) <= 1e-12)
    assert np.all(values >= 0)


def test_step_conjugate_integral_is_warning_free():
    # K*(v) = max(v/4, v - 1/2); the lowest piece starts at K* = 0
    conj = k_transform(Tabulated(grid=[1.0, 4.0], values=[0.5, 0.0], below=1.0))
    with warnings.catch_warnings():
        warnings.simplefilter("error", RuntimeWarning)
        value = conj.F(0.5, 1.0)
        top = conj.F(1.0, 1.0)
    assert value == pytest.approx(math.log(3.0) + 4.0 * math.log(4.0 / 3.0))
    assert top == 0.0
