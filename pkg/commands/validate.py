"""
validate-all: the acceptance suite
Every check reports how many cases it ran and how many violated their bound;
--quick shrinks the sweeps for a smoke run
"""

import math
import warnings
from dataclasses import dataclass
from typing import Callable, List

import numpy as np

import artifacts
from bounds.drift import engineered_drift, wpi_from_drift
from bounds.local_pi import local_pi_from_restriction
from chains.cheeger import cheeger_wpi, lift_to_product
from chains.conductance import weak_conductance
from chains.generators import random_reversible
from chains.kernel import FiniteKernel, pn_decay
from chains.optimal import alpha_star_values, beta_star_values
from chains.reachability import rupi_check
from chains.spectral import exact_asymptotic_variance
from commands.common import emit, info, metadata, warn
from config import get_settings
from errors import BoundViolation, Inconclusive, WpiError, WpiWarning
from kernels.abc import AbcChain, abc_build
from kernels.clt import clt_check
from kernels.imh import ImhGeometric, imh_decay_slope, imh_spectrum_validate
from kernels.level_walk import geometric_levels, level_walk_build
from kernels.rwm import HalfSpace, RwmSpec, check_conductance_ceiling, limiting_constant, rwm_conductance_mc
from rates.certificates import alpha_to_beta
from rates.derived import asym_var_bound
from rates.monotone import Tabulated, generalized_inverse, log_grid
from rates.profiles import ConvergenceProfile, gamma_from_beta
from tracing import tag_trace, traced

SLACK = 1e-9
GALOIS_TOL = 1e-10
R_GRID = np.geomspace(1e-4, 0.25, 50)


@dataclass
class CheckResult:
    criterion: int
    check: str
    cases: int
    violations: int
    measured: float
    expected: float

    @property
    def passed(self) -> bool:
        return self.cases > 0 and self.violations == 0

    def row(self):
        return (self.criterion, self.check, self.cases, self.violations, self.measured, self.expected, self.passed)


@dataclass(frozen=True)
class Sizes:
    chains: int
    observables: int
    n_max: int
    rates: int
    variance_chains: int
    mc_samples: int


FULL = Sizes(chains=100, observables=100, n_max=200, rates=200, variance_chains=100, mc_samples=1_000_000)
QUICK = Sizes(chains=10, observables=10, n_max=100, rates=20, variance_chains=10, mc_samples=20_000)


def register(subparsers):
    p = subparsers.add_parser("validate-all", help="run the acceptance suite")
    p.add_argument("--quick", action="store_true", help="reduced sweep sizes")
    p.set_defaults(handler=run)


def _rng(offset: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=(get_settings().seed << 8) | offset))


def _decays(P: FiniteKernel, F: np.ndarray, n_max: int) -> np.ndarray:
    """||P^n f||^2 for every column f of F, shape (n_max + 1, k)"""
    G = F - P.mu @ F
    out = np.empty((n_max + 1, F.shape[1]))
    for n in range(n_max + 1):
        out[n] = P.mu @ (G * G)
        G = P.matrix @ G
    return out


def _test_chains(count: int) -> List[FiniteKernel]:
    rng = _rng(1)
    return [random_reversible(int(rng.integers(4, 11)), rng) for _ in range(count)]


def check_imh_spectrum(sizes: Sizes) -> CheckResult:
    try:
        report = imh_spectrum_validate(ImhGeometric(a=0.5, b=0.25, truncation=200), m_max=20)
        return CheckResult(1, "imh spectrum", 20, 0, report.max_residual, 1e-8)
    except WpiError as e:
        warn(str(e))
        return CheckResult(1, "imh spectrum", 20, 1, float("nan"), 1e-8)


def check_imh_decay(sizes: Sizes) -> CheckResult:
    slope = imh_decay_slope(ImhGeometric(a=0.5, b=0.25, truncation=200))
    return CheckResult(2, "imh decay slope", 1, int(abs(slope + 1.0) > 0.1), slope, -1.0)


def check_flagship(sizes: Sizes) -> CheckResult:
    rng = _rng(2)
    violations = 0
    worst = 0.0
    for P in _test_chains(sizes.chains):
        try:
            cert = lift_to_product(cheeger_wpi(P, weak_conductance(P)), P.min_holding())
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", WpiWarning)
                gamma = gamma_from_beta(alpha_to_beta(cert), sizes.n_max)
        except WpiError as e:
            warn(f"pipeline failed on a {P.n}-state chain: {e}")
            violations += sizes.observables
            continue
        F = rng.standard_normal((P.n, sizes.observables))
        osc2 = (F.max(axis=0) - F.min(axis=0)) ** 2
        bound = gamma.values[:, None] * osc2[None, :]
        decay = _decays(P, F, sizes.n_max)
        violations += int(np.any(decay > bound + SLACK, axis=0).sum())
        worst = max(worst, float(np.max(decay / np.maximum(bound, 1e-300))))
    return CheckResult(3, "flagship decay domination", sizes.chains * sizes.observables, violations, worst, 1.0)


def check_cheeger_sandwich(sizes: Sizes) -> CheckResult:
    violations = 0
    for P in _test_chains(sizes.chains):
        profile = weak_conductance(P)
        alpha_hat = alpha_star_values(P, R_GRID)
        with np.errstate(divide="ignore"):
            inverse = np.where(alpha_hat > 0, 1.0 / alpha_hat, np.inf)
        lower = profile.kappa(R_GRID / 16.0) ** 2 / 16.0
        upper = 2.0 * profile.kappa(2.0 * R_GRID)
        finite = np.isfinite(inverse)
        bad = (lower > inverse * (1 + SLACK)) | (finite & (inverse > upper * (1 + SLACK)))
        violations += int(bad.sum())
    return CheckResult(4, "cheeger sandwich", sizes.chains * R_GRID.size, violations, float(violations), 0.0)


def _random_step(rng: np.random.Generator) -> Tabulated:
    k = int(rng.integers(2, 12))
    grid = np.cumsum(rng.uniform(0.05, 2.0, k))
    values = np.sort(rng.uniform(0.01, 5.0, k))[::-1] + np.arange(k)[::-1] * 1e-3
    return Tabulated(grid=grid.tolist(), values=values.tolist())


def _galois_failures(f: Tabulated, rng: np.random.Generator) -> int:
    g = generalized_inverse(f)
    h = generalized_inverse(g)
    y = rng.uniform(0.0, f.grid[-1] * 1.5, 64)
    x = rng.uniform(f.values[-1], f.values[0] * 1.2, 64)
    failures = 0
    # f(g(x)) <= x for right-continuous f, and g(f(y)) <= y
    gx = np.asarray(g(x), dtype=float)
    failures += int(np.sum(np.asarray(f(gx)) > x + GALOIS_TOL))
    failures += int(np.sum(np.asarray(g(np.asarray(f(y)))) > y + GALOIS_TOL))
    # both inverses are nonincreasing
    xs = np.sort(x)
    failures += int(np.sum(np.diff(np.asarray(g(xs), dtype=float)) > GALOIS_TOL))
    # (f^-)^- = f
    failures += int(np.sum(np.abs(np.asarray(h(y)) - np.asarray(f(y))) > GALOIS_TOL))
    return failures


def check_galois(sizes: Sizes) -> CheckResult:
    rng = _rng(3)
    failures = sum(_galois_failures(_random_step(rng), rng) for _ in range(sizes.rates))
    return CheckResult(5, "alpha/beta inverse properties", sizes.rates, failures, float(failures), 0.0)


def check_asymptotic_variance(sizes: Sizes) -> CheckResult:
    rng = _rng(4)
    cases = violations = 0
    worst = 0.0
    for _ in range(sizes.variance_chains):
        P = random_reversible(5, rng)
        f = rng.standard_normal(P.n)
        g = f - P.mu @ f
        phi_f = float(np.ptp(f)) ** 2
        v = float(P.mu @ (g * g)) / phi_f
        try:
            cert = alpha_to_beta(lift_to_product(cheeger_wpi(P), P.min_holding()))
            bound = asym_var_bound(cert, v, phi_f)
        except WpiError as e:
            warn(f"variance bound unavailable: {e}")
            continue
        exact = exact_asymptotic_variance(P, f)
        cases += 1
        violations += int(exact > bound * (1 + SLACK))
        worst = max(worst, exact / bound)
    return CheckResult(6, "asymptotic variance dominance", cases, violations, worst, 1.0)


def check_drift(sizes: Sizes) -> CheckResult:
    P, dc = engineered_drift(alpha=0.6)
    lpi = local_pi_from_restriction(P, dc.C)
    cert = wpi_from_drift(dc, lpi, P=P)
    s = log_grid(1.0, 1e12, 200)
    beta = np.asarray(cert.rate(s), dtype=float)
    keep = (beta > 0) & (beta < cert.a_bound)
    slope = float(np.polyfit(np.log(s[keep]), np.log(beta[keep]), 1)[0])
    gamma = gamma_from_beta(lift_to_product(cert, P.min_holding()), sizes.n_max)
    violations = int(abs(slope + 1.5) > 0.05)
    for i in range(P.n):
        f = np.zeros(P.n)
        f[i] = 1.0
        violations += int(np.any(pn_decay(P, f, sizes.n_max) > gamma.values + SLACK))
    return CheckResult(7, "drift beta exponent", P.n + 1, violations, slope, -1.5)


def check_rwm(sizes: Sizes) -> CheckResult:
    varsigma = math.sqrt(0.5)
    constant = limiting_constant(varsigma)
    violations = int(round(constant, 6) != 0.000926)
    for d in (2, 4, 8, 16):
        spec = RwmSpec(d=d, varsigma=varsigma)
        estimates = rwm_conductance_mc(spec, [HalfSpace()], sizes.mc_samples)
        try:
            check_conductance_ceiling(spec, estimates)
        except BoundViolation as e:
            warn(str(e))
            violations += 1
    return CheckResult(8, "rwm gaussian constant and half-space ceiling", 5, violations, constant, 0.000926)


def check_level_walk(sizes: Sizes) -> CheckResult:
    cases = violations = 0
    for i0 in (2, 3, 4):
        walk = level_walk_build(geometric_levels(0.5, i0))
        # k <= i0 - 1 leaves a closed class; from k = i0 on the product is irreducible
        for k in range(1, i0 + 3):
            irreducible = rupi_check(walk.product(k)).irreducible
            cases += 1
            violations += int(irreducible != (k >= i0))
    return CheckResult(9, "level walk reducibility", cases, violations, float(violations), 0.0)


def check_abc(sizes: Sizes) -> CheckResult:
    P = abc_build(AbcChain(a=0.5, q=0.5, N=1, x_max=14))
    s, values = beta_star_values(P, s_grid=np.geomspace(16.0, 1024.0, 25), parallelism=get_settings().parallelism)
    positive = values > 0
    slope = float(np.polyfit(np.log(s[positive]), np.log(values[positive]), 1)[0])
    return CheckResult(10, "abc beta floor slope", 1, int(abs(slope + 2.0) > 0.15), slope, -2.0)


CLT_CASES = {0.5: "NotEstablished", 0.9: "NotEstablished", 0.97: "Inconclusive", 1.0: "Inconclusive",
             1.03: "Inconclusive", 1.1: "Converges", 1.5: "Converges", 2.0: "Converges"}


def check_clt(sizes: Sizes) -> CheckResult:
    n = np.maximum(np.arange(1001, dtype=float), 1.0)
    violations = 0
    for a, expected in CLT_CASES.items():
        try:
            verdict = clt_check(ConvergenceProfile.from_values(n ** -a, a=1.0)).verdict
        except Inconclusive:
            verdict = "Inconclusive"
        violations += int(verdict != expected)
    return CheckResult(11, "clt verdicts", len(CLT_CASES), violations, float(violations), 0.0)


CHECKS: List[Callable[[Sizes], CheckResult]] = [
    check_imh_spectrum, check_imh_decay, check_flagship, check_cheeger_sandwich, check_galois,
    check_asymptotic_variance, check_drift, check_rwm, check_level_walk, check_abc, check_clt,
]


@traced(name="validate_all")
def run(args):
    sizes = QUICK if args.quick else FULL
    tag_trace("validate-all", quick=bool(args.quick))
    results = []
    for check in CHECKS:
        result = check(sizes)
        status = "ok" if result.passed else "FAILED"
        info(f"[{result.criterion:2d}] {result.check}: {status} ({result.violations}/{result.cases})")
        results.append(result)
    meta = metadata(args, quick=bool(args.quick))
    bundle = [artifacts.table("acceptance", ["criterion", "check", "cases", "violations", "measured", "expected", "passed"],
                              [r.row() for r in results], "Acceptance suite", "one row per criterion", meta)]
    failed = [r.criterion for r in results if not r.passed]
    if failed:
        emit(bundle, getattr(args, "output", None))
        raise BoundViolation(f"{len(failed)} acceptance checks failed", witness={"criteria": failed})
    return bundle
