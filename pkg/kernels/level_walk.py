"""
Level walk
Deterministic moves along level i to (i, i), then a jump to (K, 1) with K ~ nu.
The time reversal walks back down the level and jumps to (K, K).
"""

from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np

from chains.kernel import FiniteKernel, dirichlet_form
from chains.reachability import RupiReport, rupi_check
from errors import BadSupport, DomainError

SUPPORT_TOL = 1e-15


@dataclass(frozen=True, eq=False)
class LevelWalk:
    P: FiniteKernel
    P_star: FiniteKernel
    labels: List[Tuple[int, int]]
    nu: np.ndarray
    tail_mass: Optional[float] = None

    def index(self, i: int, j: int) -> int:
        return self.labels.index((i, j))

    def product(self, k: int) -> FiniteKernel:
        """(P*)^k P^k"""
        if k < 1:
            raise DomainError("k must be >= 1")
        left = np.linalg.matrix_power(self.P_star.matrix, k)
        right = np.linalg.matrix_power(self.P.matrix, k)
        return FiniteKernel.from_matrix(left @ right, self.P.mu, check=False)

    @property
    def top(self) -> int:
        """Index of the state (i0, i0)"""
        return len(self.labels) - 1


def geometric_levels(a: float, levels: int) -> np.ndarray:
    """nu(i) proportional to (1-a) a^(i-1) on 1..levels"""
    if not 0 < a < 1:
        raise DomainError("a must lie in (0, 1)")
    nu = (1 - a) * a ** np.arange(levels, dtype=float)
    return nu / nu.sum()


def level_walk_build(nu) -> LevelWalk:
    """
    Build P and P* on the positive-mass states {(i, j) : j <= i <= i0}, ordered
    lexicographically, with mu(i, j) = nu(i) / sum_k k nu(k).

    Args:
        nu: masses nu(1..i0); every entry positive and nu(1) < 1
    """
    nu = np.asarray(nu, dtype=float)
    if nu.ndim != 1 or nu.size < 1:
        raise BadSupport("nu must be a nonempty vector over levels 1..i0")
    if np.any(nu <= SUPPORT_TOL):
        raise BadSupport("nu must charge every level up to i0", witness=int(np.argmax(nu <= SUPPORT_TOL)) + 1)
    if abs(nu.sum() - 1.0) > 1e-12:
        raise BadSupport(f"nu sums to {nu.sum()!r}")
    if not nu[0] < 1:
        raise BadSupport("nu(1) must lie in (0, 1)")
    top = nu.size
    labels = [(i, j) for i in range(1, top + 1) for j in range(1, i + 1)]
    index = {lab: n for n, lab in enumerate(labels)}
    P = np.zeros((len(labels), len(labels)))
    P_star = np.zeros_like(P)
    for (i, j), n in index.items():
        if j < i:
            P[n, index[(i, j + 1)]] = 1.0
        else:
            for level in range(1, top + 1):
                P[n, index[(level, 1)]] += nu[level - 1]
        if j > 1:
            P_star[n, index[(i, j - 1)]] = 1.0
        else:
            for level in range(1, top + 1):
                P_star[n, index[(level, level)]] += nu[level - 1]
    levels = np.arange(1, top + 1)
    mu = np.array([nu[i - 1] for i, _ in labels]) / float(nu @ levels)
    return LevelWalk(P=FiniteKernel.from_matrix(P, mu), P_star=FiniteKernel.from_matrix(P_star, mu),
                     labels=labels, nu=nu)


def level_walk_truncated(mass: Callable[[int], float], truncation: int) -> LevelWalk:
    """
    Level walk for nu with unbounded support, cut at level `truncation` and
    renormalized. The dropped mass is kept as `tail_mass`.

    Args:
        mass: nu(i) for i >= 1, summing to 1 over all levels
        truncation: number of levels kept
    """
    if truncation < 2:
        raise DomainError("truncation must keep at least two levels")
    nu = np.array([float(mass(i)) for i in range(1, truncation + 1)])
    if np.any(nu < 0):
        raise BadSupport("nu must be nonnegative", witness=int(np.argmax(nu < 0)) + 1)
    kept = float(nu.sum())
    if not 0 < kept <= 1 + 1e-12:
        raise BadSupport(f"nu puts mass {kept!r} on the kept levels")
    walk = level_walk_build(nu / kept)
    return LevelWalk(P=walk.P, P_star=walk.P_star, labels=walk.labels, nu=walk.nu, tail_mass=max(0.0, 1.0 - kept))


def _top_report(walk: LevelWalk, T: FiniteKernel, tol: float = 1e-12) -> Optional[RupiReport]:
    """(i0, i0) is absorbing for (P*)^k P^k when k <= i0 - 1"""
    x = walk.top
    if T.matrix[x, x] < 1.0 - tol:
        return None
    other = 0 if x != 0 else 1
    return RupiReport(False, witness=(x, other), closed_class=[x])


def reducible_products(walk: LevelWalk, k_max: int) -> List[RupiReport]:
    """
    rupi_check((P*)^k P^k) for k = 1..k_max. A reducible product reports the
    absorbing state (i0, i0) as its witness when it has one.
    """
    reports = []
    for k in range(1, k_max + 1):
        T = walk.product(k)
        report = rupi_check(T)
        if not report.irreducible:
            report = _top_report(walk, T) or report
        reports.append(report)
    return reports


def zero_energy_function(walk: LevelWalk, k: int) -> np.ndarray:
    """
    f_k = 1_{A_k} - mu(A_k) with A_k a closed class of (P*)^k P^k, so that
    E((P*)^k P^k, f_k) = 0. Raises DomainError when the product is irreducible.
    """
    T = walk.product(k)
    report = rupi_check(T)
    if not report.irreducible:
        report = _top_report(walk, T) or report
    if report.irreducible:
        raise DomainError(f"(P*)^{k} P^{k} is irreducible; no zero-energy witness")
    f = np.zeros(T.n)
    f[report.closed_class] = 1.0
    f -= T.mu @ f
    energy = dirichlet_form(T, f)
    if abs(energy) > 1e-12:
        raise DomainError(f"closed class has energy {energy:.3g}")
    return f
