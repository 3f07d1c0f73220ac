"""
Lower bounds on the optimal WPI functions
beta*, alpha* and psi over indicator and user-supplied test functions, sticky sets, and Phi*_beta
"""

import math
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from chains.conductance import SubsetBlock, map_subsets
from chains.kernel import FiniteKernel, Observable, dirichlet_form, multiplicative_reversibilization, norm2
from config import get_settings
from errors import BracketViolation, DomainError, ZeroFunction
from rates.monotone import PowerLaw, Tabulated

INF = float("inf")


def _candidate_points(P: FiniteKernel, candidates: Sequence) -> tuple:
    """(||f - mu f||^2, E(P, f)) for each candidate rescaled to Phi(f) = 1"""
    v, e = [], []
    for f in candidates:
        obs = f if isinstance(f, Observable) else Observable(f, P.mu)
        if obs.oscillation == 0:
            continue
        obs = obs.normalized()
        v.append(obs.variance)
        e.append(dirichlet_form(P, obs))
    return np.asarray(v, dtype=float), np.asarray(e, dtype=float)


def _default_s_grid():
    return np.geomspace(1e-2, 1e6, 256)


def beta_star_values(P: FiniteKernel, candidates: Sequence = (), s_grid=None, exhaustive: bool = True,
                     parallelism: Optional[int] = None) -> tuple:
    """
    s -> max over test functions of (||f||^2 - s E(P, f))_+ on a grid.

    Returns:
        (s_grid, values)
    """
    s = _default_s_grid() if s_grid is None else np.asarray(s_grid, dtype=float)
    best = np.zeros_like(s)
    v, e = _candidate_points(P, candidates)
    if v.size:
        best = np.maximum(best, np.max(v[None, :] - s[:, None] * e[None, :], axis=1))
    if exhaustive:
        def reduce(block: SubsetBlock):
            return np.max(block.levels[None, :] - s[:, None] * block.flows[None, :], axis=1)

        for part in map_subsets(P, reduce, parallelism):
            best = np.maximum(best, part)
    return s, np.maximum(best, 0.0)


def beta_star_lower(P: FiniteKernel, candidates: Sequence = (), s_grid=None, exhaustive: bool = True,
                    parallelism: Optional[int] = None) -> Tabulated:
    """
    Certified lower bound on beta*, as a step minorant between grid points.

    Candidates are rescaled to Phi(f) = 1; indicator sets are enumerated
    exhaustively when `exhaustive` (n <= 20).
    """
    s, values = beta_star_values(P, candidates, s_grid, exhaustive, parallelism)
    return Tabulated.lower_step(s, values)


def alpha_star_values(P: FiniteKernel, r_grid, candidates: Sequence = (), exhaustive: bool = True,
                      parallelism: Optional[int] = None) -> np.ndarray:
    """alpha*(r) >= max over test functions of (||f||^2 - r)_+ / E(P, f)"""
    r = np.asarray(r_grid, dtype=float)

    def envelope(levels, flows):
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.maximum(levels[None, :] - r[:, None], 0.0) / flows[None, :]
        ratio = np.where(np.isnan(ratio), 0.0, ratio)
        return np.max(ratio, axis=1) if levels.size else np.zeros_like(r)

    best = np.zeros_like(r)
    v, e = _candidate_points(P, candidates)
    if v.size:
        best = np.maximum(best, envelope(v, e))
    if exhaustive:
        for part in map_subsets(P, lambda block: envelope(block.levels, block.flows), parallelism):
            best = np.maximum(best, part)
    return best


def psi_sandwich(P: FiniteKernel, candidates: Sequence = (), r_grid=None, exhaustive: bool = True) -> Dict[str, np.ndarray]:
    """
    psi(t) = inf{E(P, f) / ||f||^2 : Phi(f) = 1, ||f||^2 > t} over the test family, and
    the two brackets of alpha* it yields:
        max_t (1 - r/t) / psi(t) <= alpha*(r) <= 1 / psi(r)
        1 / (2 psi(2r))          <= alpha*(r) <= 1 / psi(r)
    The upper ends only hold when the family contains the extremal functions.
    """
    r = np.geomspace(1e-4, 0.25, 50) if r_grid is None else np.asarray(r_grid, dtype=float)
    v, e = _candidate_points(P, candidates)
    if exhaustive:
        blocks = map_subsets(P, lambda block: (block.levels, block.flows))
        v = np.concatenate([v] + [b[0] for b in blocks])
        e = np.concatenate([e] + [b[1] for b in blocks])
    keep = v > 0
    v, ratio = v[keep], e[keep] / v[keep]

    def psi(t):
        t = np.atleast_1d(t)
        mask = v[None, :] > t[:, None]
        return np.where(mask.any(axis=1), np.min(np.where(mask, ratio[None, :], INF), axis=1), INF)

    psi_r = psi(r)
    t_grid = np.unique(v)
    psi_t = psi(t_grid)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_t = np.where(psi_t > 0, 1.0 / psi_t, INF)
        scaled = np.max(np.maximum(1.0 - r[:, None] / t_grid[None, :], 0.0) * np.where(
            t_grid[None, :] > r[:, None], inv_t[None, :], 0.0), axis=1)
        upper = np.where(psi_r > 0, 1.0 / psi_r, INF)
        half = 1.0 / (2.0 * psi(2 * r))
    return {"r": r, "psi": psi_r, "upper": upper, "lower_half": half, "lower_scaled": np.nan_to_num(scaled)}


def sticky_sets(P: FiniteKernel, eps_grid) -> List[np.ndarray]:
    """A_eps = {x : P(x, {x}) >= 1 - eps}"""
    hold = np.diag(P.matrix)
    return [np.flatnonzero(hold >= 1.0 - eps) for eps in np.asarray(eps_grid, dtype=float)]


def sticky_candidates(P: FiniteKernel, eps_grid, s_grid=None) -> Dict[str, object]:
    """
    Indicators of the sticky sets, and the bound
    beta*(s) >= max_eps mu(A_eps) (1 - s eps - mu(A_eps)).
    """
    eps = np.asarray(eps_grid, dtype=float)
    s = _default_s_grid() if s_grid is None else np.asarray(s_grid, dtype=float)
    sets = sticky_sets(P, eps)
    mass = np.array([P.mu[A].sum() for A in sets])
    bound = np.max(mass[None, :] * (1.0 - s[:, None] * eps[None, :] - mass[None, :]), axis=1)
    candidates = [Observable.indicator(A, P.mu) for A in sets if 0 < len(A) < P.n]
    return {"eps": eps, "mass": mass, "s": s, "bound": np.maximum(bound, 0.0), "candidates": candidates}


def sticky_floor_value(s, alpha_exp: float, c: float, C: float):
    """c k s^-alpha [1/(1+alpha) - C k s^-alpha], k = (alpha/(1+alpha))^alpha"""
    s = np.asarray(s, dtype=float)
    k = (alpha_exp / (1.0 + alpha_exp)) ** alpha_exp
    lead = k * s ** (-alpha_exp)
    return c * lead * (1.0 / (1.0 + alpha_exp) - C * lead)


def sticky_polynomial_floor(mu_Aeps: Callable[[float], float], alpha_exp: float, c: float, C: float,
                            eps_samples=None, s_grid=None) -> Tabulated:
    """
    Floor on beta* when c eps^alpha <= mu(A_eps) <= C eps^alpha.

    The closed form is only a pointwise lower bound; since beta* is
    nonincreasing the running maximum from the right is one too, and that
    is what is returned (as a step minorant).
    """
    if min(alpha_exp, c, C) <= 0:
        raise DomainError("alpha, c and C must be positive")
    eps = np.geomspace(1e-4, 1.0, 25) if eps_samples is None else np.asarray(eps_samples, dtype=float)
    for e in eps:
        m = float(mu_Aeps(float(e)))
        low, high = c * e ** alpha_exp, C * e ** alpha_exp
        if m < low * (1 - 1e-12) or m > high * (1 + 1e-12):
            raise BracketViolation(f"mu(A_eps) = {m:.6g} outside [{low:.6g}, {high:.6g}]", witness={"eps": float(e)})
    s = np.geomspace(1e-2, 1e8, 400) if s_grid is None else np.asarray(s_grid, dtype=float)
    values = np.maximum(sticky_floor_value(s, alpha_exp, c, C), 0.0)
    values = np.maximum.accumulate(values[::-1])[::-1]
    return Tabulated.lower_step(s, values)


def holding_beta_minus(P: FiniteKernel) -> Tabulated:
    """beta_-(s) = mu(1/eps(X) >= s) / 2 with eps(x) = P(x, {x}), as an upper step function"""
    hold = np.diag(P.matrix)
    with np.errstate(divide="ignore"):
        thresholds = np.where(hold > 0, 1.0 / np.maximum(hold, 1e-300), INF)
    finite = np.unique(thresholds[np.isfinite(thresholds)])
    stuck = 0.5 * float(P.mu[~np.isfinite(thresholds)].sum())
    if finite.size == 0:
        return Tabulated(grid=[1.0], values=[stuck], below=0.5)
    values = np.array([0.5 * P.mu[thresholds >= g].sum() for g in finite])
    tail = np.append(values[1:], stuck)
    # the level at s = t_x still counts x, so each drop happens just after its threshold
    return Tabulated(grid=np.nextafter(finite, INF).tolist(), values=tail.tolist(), below=0.5)


def phi_beta(f: np.ndarray, PstarP: FiniteKernel, beta, s_points: int = 400) -> float:
    """Phi_beta(f) = ||f||^2 sup_s (1 - s delta(f)) / beta(s), delta = E(P*P, f) / ||f||^2"""
    mu = PstarP.mu
    size = norm2(f, mu)
    if size == 0:
        return 0.0
    delta = max(dirichlet_form(PstarP, f) / size, 0.0)
    if delta == 0:
        return INF
    if isinstance(beta, PowerLaw):
        a = beta.p
        return size * a ** a / (a + 1) ** (a + 1) * delta ** (-a) / beta.c
    s = np.geomspace(get_settings().grid_low, 1.0 / delta, s_points)
    b = np.asarray(beta(s), dtype=float)
    gain = 1.0 - s * delta
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(b > 0, gain / b, np.where(gain > 0, INF, 0.0))
    return size * float(np.max(ratio))


def phi_beta_eval(P: FiniteKernel, f, beta, n_max: int) -> float:
    """
    max over n <= n_max of Phi_beta(P^n f): a lower bound on Phi*_beta(f).
    Closed form for power-law beta.
    """
    values = f.values if isinstance(f, Observable) else np.asarray(f, dtype=float)
    g = values - P.mu @ values
    if norm2(g, P.mu) <= 0:
        raise ZeroFunction("f is constant under mu")
    pp = multiplicative_reversibilization(P)
    best = 0.0
    for _ in range(n_max + 1):
        if norm2(g, P.mu) <= 1e-300:
            break
        best = max(best, phi_beta(g, pp, beta))
        if math.isinf(best):
            break
        g = P.matrix @ g
    return best
