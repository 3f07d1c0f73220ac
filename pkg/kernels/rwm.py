"""
Random-walk Metropolis with Gaussian proposals
Y = X + sigma_d Z, sigma_d = varsigma sigma0 d^-beta, accepted with 1 ^ exp(U(x) - U(y))
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Annotated, Dict, List, Literal, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, Field, TypeAdapter, model_validator
from scipy.special import expit, logsumexp
from scipy.stats import chi2

from bounds.isoperimetry import conductance_from_isoperimetry
from config import get_settings
from errors import BoundViolation, DomainError, RegimeViolation

# Step-size ceiling and constants for m-convex, L-smooth targets with sigma <= varsigma / sqrt(L)
VARSIGMA_STAR = 0.073
CONVEX_KAPPA = 8.46e-5
CONVEX_GAP = 8.94e-10
# Gaussian targets, any varsigma
GAUSSIAN_KAPPA = 0.00216
GAUSSIAN_GAP = 5.83e-7

B_KAPPA = 4.0 + 1.0 / 16.0
B_DELTA = 1.0 / 16.0
CHUNK = 1 << 15


class RwmSpec(BaseModel):
    d: int = Field(ge=1)
    sigma0: float = Field(default=1.0, gt=0)
    varsigma: float = Field(gt=0)
    m: float = Field(default=1.0, gt=0)
    L: float = Field(default=1.0, gt=0)
    beta: float = 0.5
    potential: Literal["gaussian", "logistic-demo"] = "gaussian"

    @model_validator(mode="after")
    def _check(self):
        if self.m > self.L:
            raise DomainError(f"need m <= L, got m={self.m}, L={self.L}")
        return self

    @property
    def sigma_d(self) -> float:
        return self.varsigma * self.sigma0 * self.d ** (-self.beta)

    def U(self, x: np.ndarray) -> np.ndarray:
        """Potential on rows of x"""
        quad = 0.5 * np.einsum("...i,...i->...", x, x) / self.sigma0 ** 2
        if self.potential == "gaussian":
            return quad
        # log(1 + e^x) summed over coordinates: Hessian between 1/sigma0^2 and 1/sigma0^2 + 1/4
        return quad + logsumexp(np.stack([np.zeros_like(x), x]), axis=0).sum(axis=-1)

    def grad_U(self, x: np.ndarray) -> np.ndarray:
        g = x / self.sigma0 ** 2
        if self.potential == "gaussian":
            return g
        return g + expit(x)


class HalfSpace(BaseModel):
    """{x : x[axis] >= offset} (side="upper") or {x : x[axis] < offset}"""

    kind: Literal["half_space"] = "half_space"
    axis: int = Field(default=0, ge=0)
    offset: float = 0.0
    side: Literal["upper", "lower"] = "upper"

    def contains(self, x: np.ndarray) -> np.ndarray:
        coord = x[..., self.axis]
        return coord >= self.offset if self.side == "upper" else coord < self.offset


class Ball(BaseModel):
    """Open ball {|x| < radius}; radius 0 is the empty set"""

    kind: Literal["ball"] = "ball"
    radius: float = Field(ge=0)

    def contains(self, x: np.ndarray) -> np.ndarray:
        return np.einsum("...i,...i->...", x, x) < self.radius ** 2


SetDescriptor = Annotated[Union[HalfSpace, Ball], Field(discriminator="kind")]
set_adapter = TypeAdapter(List[SetDescriptor])


@dataclass(frozen=True)
class McEstimate:
    value: float
    stderr: float
    n_samples: int
    seed: int

    def record(self) -> Dict[str, float]:
        return {"value": self.value, "stderr": self.stderr, "n_samples": self.n_samples, "seed": self.seed}


@dataclass(frozen=True)
class ConductanceEstimate:
    set: Union[HalfSpace, Ball]
    flow: McEstimate
    product: McEstimate
    ratio: Optional[McEstimate]


def ball_radius(spec: RwmSpec) -> float:
    """sigma_d sqrt(d) / (4 sqrt 2), capped at the target's median radius"""
    median = spec.sigma0 * math.sqrt(chi2.ppf(0.5, spec.d))
    return min(spec.sigma_d * math.sqrt(spec.d) / (4.0 * math.sqrt(2.0)), median)


def halfspace_ceiling(spec: RwmSpec) -> float:
    """kappa(0) <= 4 varsigma d^-beta, from A = {x_1 >= 0}"""
    return 4.0 * spec.varsigma * spec.d ** (-spec.beta)


def ball_ceiling(spec: RwmSpec) -> float:
    """kappa(0) <= 2 {exp(-d/16) + exp(-varsigma^2 d^(1-2 beta) / 8)}, from the ball of radius ball_radius"""
    d = spec.d
    return 2.0 * (math.exp(-d / 16.0) + math.exp(-spec.varsigma ** 2 * d ** (1 - 2 * spec.beta) / 8.0))


def conductance_ceiling(spec: RwmSpec) -> float:
    return min(halfspace_ceiling(spec), ball_ceiling(spec))


def _chunk_sums(spec: RwmSpec, sets: Sequence, seed: int, chunk: int, size: int) -> np.ndarray:
    """
    Per set: [sum h, sum h^2, sum g, sum g^2, sum hg] and one extra row for the
    acceptance rate, where h is the antithetic flow term and g the product term.
    """
    rng = np.random.Generator(np.random.Philox(key=(seed << 64) | chunk))
    s0 = spec.sigma0
    X = s0 * rng.standard_normal((size, spec.d))
    Z = rng.standard_normal((size, spec.d))
    X_other = s0 * rng.standard_normal((size, spec.d))
    u = spec.U(X)
    out = np.zeros((len(sets) + 1, 5))
    steps = [X + spec.sigma_d * Z, X - spec.sigma_d * Z]
    accepts = [np.exp(np.minimum(0.0, u - spec.U(Y))) for Y in steps]
    rate = 0.5 * (accepts[0] + accepts[1])
    out[-1, 0] = rate.sum()
    out[-1, 1] = (rate ** 2).sum()
    for i, A in enumerate(sets):
        inside = A.contains(X)
        h = np.zeros(size)
        for Y, accept in zip(steps, accepts):
            h += 0.5 * (inside & ~A.contains(Y)) * accept
        g = (inside & ~A.contains(X_other)).astype(float)
        out[i] = [h.sum(), (h * h).sum(), g.sum(), (g * g).sum(), (h * g).sum()]
    return out


def _estimate(total: float, square: float, n: int, seed: int) -> McEstimate:
    mean = total / n
    var = max(square / n - mean * mean, 0.0) * n / max(n - 1, 1)
    return McEstimate(value=mean, stderr=math.sqrt(var / n), n_samples=n, seed=seed)


def _run_chunks(spec: RwmSpec, sets: Sequence, samples: int, seed: int, parallelism: int) -> np.ndarray:
    if spec.potential != "gaussian":
        raise DomainError("Monte Carlo needs exact draws from the target; only the gaussian potential has them")
    sizes = [CHUNK] * (samples // CHUNK)
    if samples % CHUNK:
        sizes.append(samples % CHUNK)

    def run(job):
        index, size = job
        return _chunk_sums(spec, sets, seed, index, size)

    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        parts = list(pool.map(run, enumerate(sizes)))
    total = np.zeros((len(sets) + 1, 5))
    for part in parts:
        total += part
    return total


def rwm_conductance_mc(spec: RwmSpec, sets: Sequence, samples: int = 100_000,
                       seed: Optional[int] = None, parallelism: Optional[int] = None) -> List[ConductanceEstimate]:
    """
    Monte Carlo estimates of mu x P(A x A^c) and mu x mu(A x A^c) for each set.

    The flow uses the acceptance probability in place of the accept coin and pairs
    each Z with -Z; the product term draws an independent X' ~ mu. Chunks are
    keyed (seed, chunk index) on Philox and summed in chunk order, so results do
    not depend on the thread count.
    """
    settings = get_settings()
    seed = settings.seed if seed is None else seed
    width = parallelism or settings.parallelism
    if samples < 2:
        raise DomainError("need at least two samples")
    total = _run_chunks(spec, list(sets), samples, seed, width)
    estimates = []
    for A, row in zip(sets, total):
        flow = _estimate(row[0], row[1], samples, seed)
        product = _estimate(row[2], row[3], samples, seed)
        ratio = None
        if product.value > 0:
            value = flow.value / product.value
            # delta method for a ratio of means
            cov = (row[4] / samples - flow.value * product.value) / samples
            var = (flow.stderr ** 2 - 2 * value * cov + value ** 2 * product.stderr ** 2) / product.value ** 2
            ratio = McEstimate(value=value, stderr=math.sqrt(max(var, 0.0)), n_samples=samples, seed=seed)
        estimates.append(ConductanceEstimate(set=A, flow=flow, product=product, ratio=ratio))
    return estimates


def acceptance_mc(spec: RwmSpec, samples: int = 100_000, seed: Optional[int] = None,
                  parallelism: Optional[int] = None) -> McEstimate:
    """Mean acceptance probability of a move from stationarity"""
    settings = get_settings()
    seed = settings.seed if seed is None else seed
    total = _run_chunks(spec, [], samples, seed, parallelism or settings.parallelism)
    return _estimate(total[-1, 0], total[-1, 1], samples, seed)


def check_conductance_ceiling(spec: RwmSpec, estimates: Sequence[ConductanceEstimate], k: float = 3.0):
    """Each estimated ratio must sit below the analytic ceiling for its set, up to k standard errors"""
    for est in estimates:
        if est.ratio is None:
            continue
        ceiling = halfspace_ceiling(spec) if isinstance(est.set, HalfSpace) else ball_ceiling(spec)
        if est.ratio.value > ceiling + k * est.ratio.stderr:
            raise BoundViolation(f"conductance estimate {est.ratio.value:.6g} exceeds ceiling {ceiling:.6g}",
                                 witness={"set": est.set.model_dump(), "estimate": est.ratio.record()})


# Support lemmas


def proposal_tv_bound(eps: float, sigma: float) -> float:
    """||Q_x - Q_y||_TV <= eps / (2 sigma) when |x - y| <= eps (per-coordinate scale sigma)"""
    if sigma <= 0 or eps < 0:
        raise DomainError("need sigma > 0 and eps >= 0")
    return eps / (2.0 * sigma)


def chi2_threshold(d: int, u: float) -> float:
    """P(W >= d + 2 sqrt(du) + 2u) <= exp(-u) for W ~ chi2(d)"""
    return d + 2.0 * math.sqrt(d * u) + 2.0 * u


def chi2_lower_threshold(d: int, u: float) -> float:
    """P(W <= d - 2 sqrt(du)) <= exp(-u)"""
    return d - 2.0 * math.sqrt(d * u)


def chi_factor(eps: float) -> float:
    """1 + 2 sqrt(log 1/eps) + 2 log 1/eps"""
    t = math.log(1.0 / eps)
    return 1.0 + 2.0 * math.sqrt(t) + 2.0 * t


def acceptance_lower_bound(varsigma: float, d: int) -> float:
    """Gaussian target: P(move accepted) >= exp{-varsigma^2/2 [1 + 2 d^-1/2 + 2/d]} (1 - 1/e) / 2"""
    return math.exp(-0.5 * varsigma ** 2 * _shape(d)) * 0.5 * (1.0 - math.exp(-1.0))


def _shape(d: int) -> float:
    return 1.0 + 2.0 / math.sqrt(d) + 2.0 / d


@dataclass
class SupportLemmas:
    tv_bound: float
    chi2_threshold: float
    chi2_tail_bound: float
    chi2_tail_exact: float
    chi2_lower_tail_exact: float
    acceptance_lower: float
    acceptance: Optional[McEstimate]


def rwm_support_lemmas(spec: RwmSpec, eps: Optional[float] = None, u: float = 1.0,
                       samples: int = 0, seed: Optional[int] = None) -> SupportLemmas:
    """
    Evaluate the proposal TV bound, the chi-square tail bounds and the
    acceptance lower bound; chi-square tails are checked against scipy and the
    acceptance bound against simulation when samples > 0.
    """
    sigma = spec.sigma_d
    eps = sigma if eps is None else eps
    d = spec.d
    upper = chi2_threshold(d, u)
    exact_upper = float(chi2.sf(upper, d))
    lower = chi2_lower_threshold(d, u)
    exact_lower = float(chi2.cdf(lower, d)) if lower > 0 else 0.0
    tail = math.exp(-u)
    if exact_upper > tail or exact_lower > tail:
        raise BoundViolation(f"chi-square tail exceeds exp(-{u})",
                             witness={"d": d, "u": u, "upper": exact_upper, "lower": exact_lower})
    floor = acceptance_lower_bound(spec.varsigma, d)
    accepted = None
    if samples > 0:
        accepted = acceptance_mc(spec, samples, seed)
        if floor > accepted.value + 3.0 * accepted.stderr:
            raise BoundViolation(f"acceptance lower bound {floor:.6g} above estimate {accepted.value:.6g}",
                                 witness={"varsigma": spec.varsigma, "d": d})
    return SupportLemmas(tv_bound=proposal_tv_bound(eps, sigma), chi2_threshold=upper, chi2_tail_bound=tail,
                         chi2_tail_exact=exact_upper, chi2_lower_tail_exact=exact_lower,
                         acceptance_lower=floor, acceptance=accepted)


def varsigma_star() -> float:
    """
    Largest varsigma keeping ||P(x, .) - Q_x||_TV <= 15/32 on the ball of radius
    (4 + 1/16) sigma sqrt(d): sqrt(-log(49/64) / chi(15/128) * (2/3) / (4 + 1/16)).
    """
    return math.sqrt(-math.log(49.0 / 64.0) / chi_factor(15.0 / 128.0) * (2.0 / 3.0) / B_KAPPA)


def rwm_tv_outside(b_kappa: float = B_KAPPA, b_delta: float = B_DELTA) -> float:
    """TV between rows outside the ball: 3/4 + 3 / (4 (b_kappa - b_delta)) + b_delta / 2"""
    if b_kappa <= b_delta:
        raise DomainError("need b_kappa > b_delta")
    return 0.75 + 3.0 / (4.0 * (b_kappa - b_delta)) + b_delta / 2.0


@dataclass
class GapBounds:
    regime: str
    conductance_lower: float
    gap_lower: float
    gap_upper: float
    derived_prefactor: float

    def record(self) -> Dict[str, float]:
        return {"regime": self.regime, "conductance_lower": self.conductance_lower,
                "gap_lower": self.gap_lower, "gap_upper": self.gap_upper,
                "derived_prefactor": self.derived_prefactor}


def rwm_gap_bounds(spec: RwmSpec, regime: Literal["gaussian", "general-convex"] = "gaussian") -> GapBounds:
    """
    Closed-form conductance and spectral-gap bounds with sigma_d = varsigma sigma0 d^-1/2.

    general-convex (sigma = varsigma / sqrt(L), varsigma <= 0.073):
        kappa(0) >= 8.46e-5 varsigma sqrt(m / (L d)),  Gap >= 8.94e-10 varsigma^2 m / (L d)
    gaussian:
        kappa(0) >= 0.00216 e^{-varsigma^2 s_d} varsigma d^-1/2,  Gap >= 5.83e-7 e^{-2 varsigma^2 s_d} varsigma^2 / d
        with s_d = 1 + 2 d^-1/2 + 2/d
    Gap <= varsigma^2 / (2d) in both cases.
    """
    s, d = spec.varsigma, spec.d
    if spec.beta != 0.5:
        raise RegimeViolation(f"closed-form bounds need sigma_d ~ d^-1/2, got beta={spec.beta}",
                              witness={"beta": spec.beta})
    if regime == "general-convex":
        if s > VARSIGMA_STAR:
            raise RegimeViolation(f"varsigma={s} exceeds {VARSIGMA_STAR}", witness={"varsigma": s})
        ratio = spec.m / (spec.L * d)
        # eps = 1/32 and delta sqrt(m) = varsigma sqrt(m / (L d)) / 16, product form with C the whole space
        _, derived = conductance_from_isoperimetry(1.0 / 32.0, s * math.sqrt(ratio) / 16.0, 1.0)
        kappa = CONVEX_KAPPA * s * math.sqrt(ratio)
        gap = CONVEX_GAP * s * s * ratio
        prefactor = derived / (s * math.sqrt(ratio))
    elif regime == "gaussian":
        v = acceptance_lower_bound(s, d)
        # eps = v/2 and delta sqrt(m) = v varsigma d^-1/2
        _, derived = conductance_from_isoperimetry(v / 2.0, v * s / math.sqrt(d), 1.0)
        shape = math.exp(-s * s * _shape(d))
        kappa = GAUSSIAN_KAPPA * shape * s / math.sqrt(d)
        gap = GAUSSIAN_GAP * shape * shape * s * s / d
        prefactor = derived / (shape * s / math.sqrt(d))
    else:
        raise DomainError(f"unknown regime {regime!r}")
    # hard-coded constants are rounded down from the derivation
    if kappa > derived * (1 + 1e-12):
        raise BoundViolation("rounded conductance constant exceeds its derivation",
                             witness={"constant": kappa, "derived": derived})
    upper = s * s / (2.0 * d)
    if gap > upper:
        raise BoundViolation(f"gap lower bound {gap:.3g} exceeds upper bound {upper:.3g}",
                             witness={"varsigma": s, "d": d})
    return GapBounds(regime=regime, conductance_lower=kappa, gap_lower=gap, gap_upper=upper,
                     derived_prefactor=prefactor)


def limiting_constant(varsigma: float) -> float:
    """lim inf kappa_d(0) d^1/2 >= 0.00216 e^{-varsigma^2} varsigma; maximal at varsigma^2 = 1/2"""
    return GAUSSIAN_KAPPA * math.exp(-varsigma ** 2) * varsigma
