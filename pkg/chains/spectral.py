"""
Spectral decomposition of reversible finite kernels
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh

from chains.kernel import FiniteKernel, Observable, norm2
from errors import MassAtOne, NotReversible

MASS_AT_ONE_TOL = 1e-10
ONE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class SpectralMeasure:
    """Atoms nu_f(lambda_i) >= 0, summing to ||f||^2"""

    eigenvalues: np.ndarray
    masses: np.ndarray

    @property
    def total(self) -> float:
        return float(self.masses.sum())

    def moment(self, n: int) -> float:
        """<P^n f, f>"""
        return float(self.masses @ self.eigenvalues ** n)

    def decay(self, n_max: int) -> np.ndarray:
        """||P^n f||^2 = sum lambda^(2n) nu(lambda)"""
        n = np.arange(n_max + 1)
        return (self.eigenvalues[None, :] ** (2 * n[:, None])) @ self.masses


def _require_reversible(P: FiniteKernel):
    if not P.is_reversible():
        q = P.flow
        worst = np.unravel_index(np.argmax(np.abs(q - q.T)), q.shape)
        raise NotReversible("detailed balance fails", witness=[int(worst[0]), int(worst[1])])


def eigensystem(P: FiniteKernel):
    """
    Eigenvalues (ascending) and mu-orthonormal eigenfunctions of a reversible kernel,
    from the symmetric matrix D^1/2 P D^-1/2 on the support of mu.

    Returns:
        (eigenvalues, eigenfunctions, support) with eigenfunctions[:, i] defined on the support
    """
    _require_reversible(P)
    keep = P.support
    root = np.sqrt(P.mu[keep])
    sub = P.matrix[np.ix_(keep, keep)]
    sym = root[:, None] * sub / root[None, :]
    sym = 0.5 * (sym + sym.T)
    values, vectors = eigh(sym)
    return np.clip(values, -1.0, 1.0), vectors / root[:, None], keep


def spectral_measure(P: FiniteKernel, f) -> SpectralMeasure:
    values, vectors, keep = eigensystem(P)
    raw = f.values if isinstance(f, Observable) else np.asarray(f, dtype=float)
    g = raw[keep] - P.mu @ raw
    weights = P.mu[keep]
    masses = (vectors.T @ (weights * g)) ** 2
    return SpectralMeasure(eigenvalues=values, masses=masses)


def exact_asymptotic_variance(P: FiniteKernel, f) -> float:
    """var(P, f) = sum nu_f(lambda) (1 + lambda) / (1 - lambda)"""
    measure = spectral_measure(P, f)
    at_one = measure.eigenvalues >= 1.0 - ONE_TOL
    stuck = float(measure.masses[at_one].sum())
    if stuck > MASS_AT_ONE_TOL * max(1.0, measure.total):
        raise MassAtOne(f"centered f keeps mass {stuck:.3g} at eigenvalue 1; the chain is reducible", witness=stuck)
    lam, nu = measure.eigenvalues[~at_one], measure.masses[~at_one]
    return float(np.sum(nu * (1 + lam) / (1 - lam)))


def spectral_gap(P: FiniteKernel) -> float:
    """Right spectral gap 1 - lambda_2 (0 when the chain is reducible)"""
    values, _, _ = eigensystem(P)
    if values.size < 2:
        return 1.0
    return float(max(0.0, 1.0 - values[-2]))


def absolute_gap(P: FiniteKernel) -> float:
    values, _, _ = eigensystem(P)
    if values.size < 2:
        return 1.0
    return float(max(0.0, 1.0 - max(values[-2], -values[0])))


def check_decay_identity(P: FiniteKernel, f, n_max: int = 50) -> float:
    """Largest gap between <P^n f, f> and the spectral moments, n <= n_max"""
    measure = spectral_measure(P, f)
    raw = f.values if isinstance(f, Observable) else np.asarray(f, dtype=float)
    g = raw - P.mu @ raw
    h = g.copy()
    worst = 0.0
    for n in range(n_max + 1):
        worst = max(worst, abs(float(P.mu @ (h * g)) - measure.moment(n)))
        h = P.matrix @ h
    return worst


def variance_of(P: FiniteKernel, f) -> float:
    raw = f.values if isinstance(f, Observable) else np.asarray(f, dtype=float)
    return norm2(raw - P.mu @ raw, P.mu)
