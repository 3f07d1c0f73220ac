"""
Weak conductance
Exhaustive subset enumeration in Gray-code order, split into blocks for a thread pool
"""

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from chains.kernel import FiniteKernel
from config import get_settings
from errors import DomainError, TooLarge, WpiWarning

MAX_EXHAUSTIVE = 20
BLOCK_BITS = 12
LEVEL_FLOOR = 1e-15
INF = float("inf")


@dataclass(frozen=True)
class SubsetBlock:
    """One block of subsets: bit masks with their variance level and boundary flow"""

    masks: np.ndarray
    levels: np.ndarray
    flows: np.ndarray

    @property
    def ratios(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.flows / self.levels


def gray_code(start: int, stop: int) -> np.ndarray:
    i = np.arange(start, stop, dtype=np.int64)
    return i ^ (i >> 1)


def _membership(masks: np.ndarray, n: int) -> np.ndarray:
    bits = np.arange(n, dtype=np.int64)
    return ((masks[:, None] >> bits[None, :]) & 1).astype(bool)


def _evaluate(P: FiniteKernel, masks: np.ndarray) -> SubsetBlock:
    inside = _membership(masks, P.n).astype(float)
    mass = inside @ P.mu
    levels = mass * (1.0 - mass)
    # flow(A) = 1_A^T Q 1_{A^c}
    flows = np.einsum("bi,bi->b", inside, (1.0 - inside) @ P.flow.T)
    return SubsetBlock(masks=masks, levels=levels, flows=np.maximum(flows, 0.0))


def map_subsets(P: FiniteKernel, reducer: Callable[[SubsetBlock], object], parallelism: Optional[int] = None) -> List:
    """
    Apply `reducer` to every block of the 2^n - 2 proper nonempty subsets.

    Blocks are contiguous ranges of the Gray-code sequence; results come back
    in block order whatever the pool width.
    """
    n = P.n
    if n > MAX_EXHAUSTIVE:
        raise TooLarge(f"exhaustive enumeration is limited to {MAX_EXHAUSTIVE} states, got {n}", witness=n)
    width = parallelism or get_settings().parallelism
    total = 1 << n
    size = 1 << min(BLOCK_BITS, n)
    starts = list(range(0, total, size))

    def run(start):
        masks = gray_code(start, min(start + size, total))
        masks = masks[(masks != 0) & (masks != total - 1)]
        return reducer(_evaluate(P, masks))

    if width == 1 or len(starts) == 1:
        return [run(s) for s in starts]
    with ThreadPoolExecutor(max_workers=width) as pool:
        return list(pool.map(run, starts))


def sampled_subsets(P: FiniteKernel, count: int, seed: Optional[int] = None) -> SubsetBlock:
    """`count` uniformly random proper subsets (any n)"""
    rng = np.random.Generator(np.random.Philox(seed if seed is not None else get_settings().seed))
    inside = rng.random((count, P.n)) < 0.5
    inside = inside[inside.any(axis=1) & ~inside.all(axis=1)]
    masks = np.array([sum(1 << int(i) for i in np.flatnonzero(row)) for row in inside], dtype=object)
    mass = inside.astype(float) @ P.mu
    flows = np.einsum("bi,bi->b", inside.astype(float), (~inside).astype(float) @ P.flow.T)
    return SubsetBlock(masks=masks, levels=mass * (1 - mass), flows=np.maximum(flows, 0.0))


def _front(levels: np.ndarray, ratios: np.ndarray, masks: np.ndarray):
    """Sets not dominated by one with a higher level and a lower ratio, ascending in level"""
    keep = levels > LEVEL_FLOOR
    levels, ratios, masks = levels[keep], ratios[keep], masks[keep]
    order = np.lexsort((ratios, -levels))
    best = INF
    chosen = []
    for i in order:
        if ratios[i] < best:
            best = ratios[i]
            chosen.append(i)
    chosen = np.asarray(chosen[::-1], dtype=np.int64)
    return levels[chosen], ratios[chosen], masks[chosen]


@dataclass(frozen=True, eq=False)
class ConductanceProfile:
    """
    kappa(u) = inf{flow(A) / level(A) : level(A) > u}, level(A) = mu(A) mu(A^c).

    `levels` ascend, and `ratios[i]` is kappa on [levels[i-1], levels[i]) with
    levels[-1] = 0. From levels[-1] on (and always from 1/4) kappa is inf.
    """

    levels: np.ndarray
    ratios: np.ndarray
    witnesses: Tuple[Tuple[int, ...], ...]
    n_states: int
    exhaustive: bool = True

    def kappa(self, u):
        u = np.asarray(u, dtype=float)
        idx = np.searchsorted(self.levels, u, side="right")
        padded = np.append(self.ratios, INF)
        out = np.where(u >= 0.25, INF, padded[idx])
        return float(out) if out.ndim == 0 else out

    @property
    def kappa0(self) -> float:
        """Cheeger's constant"""
        return float(self.ratios[0]) if self.ratios.size else INF

    def witness(self, u: float) -> Tuple[int, ...]:
        idx = int(np.searchsorted(self.levels, u, side="right"))
        if idx >= len(self.witnesses):
            return ()
        return self.witnesses[idx]


def _mask_states(mask: int, n: int) -> Tuple[int, ...]:
    return tuple(i for i in range(n) if (int(mask) >> i) & 1)


def _profile_from(levels, ratios, masks, n, exhaustive) -> ConductanceProfile:
    lv, rt, mk = _front(levels, ratios, masks)
    return ConductanceProfile(levels=lv, ratios=rt, witnesses=tuple(_mask_states(m, n) for m in mk),
                              n_states=n, exhaustive=exhaustive)


def weak_conductance(P: FiniteKernel, mode: str = "exhaustive", count: int = 0,
                     parallelism: Optional[int] = None, seed: Optional[int] = None) -> ConductanceProfile:
    """
    Weak conductance profile of P.

    Args:
        P: kernel, reversible when the profile feeds a certificate
        mode: "exhaustive" (n <= 20, a true infimum) or "sampled" (an upper bound on kappa)
        count: number of random sets in sampled mode
    """
    if mode == "exhaustive":
        def reduce(block: SubsetBlock):
            return _front(block.levels, block.ratios, block.masks)

        parts = map_subsets(P, reduce, parallelism)
        levels = np.concatenate([p[0] for p in parts])
        ratios = np.concatenate([p[1] for p in parts])
        masks = np.concatenate([p[2] for p in parts])
        return _profile_from(levels, ratios, masks, P.n, True)
    if mode == "sampled":
        if count < 1:
            raise DomainError("sampled mode needs a positive set count")
        warnings.warn(f"kappa from {count} sampled sets is only an upper bound", WpiWarning)
        block = sampled_subsets(P, count, seed)
        return _profile_from(block.levels, block.ratios, block.masks, P.n, False)
    raise DomainError(f"unknown conductance mode '{mode}'")



class KappaPower(BaseModel):
    """Analytic envelope kappa(u) = c u^theta for u < valid_below (inf from 1/4)"""

    model_config = ConfigDict(frozen=True)

    c: float = Field(gt=0)
    theta: float = Field(ge=0)
    valid_below: float = Field(default=0.25, gt=0)

    def kappa(self, u):
        u = np.asarray(u, dtype=float)
        out = np.where(u >= 0.25, INF, self.c * u ** self.theta)
        return float(out) if out.ndim == 0 else out
