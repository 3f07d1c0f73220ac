"""
Worked Markov kernels: independence sampler, pseudo-marginal ABC, level walk,
random-walk Metropolis, heavy-tailed targets and the CLT check
"""

from kernels.abc import AbcChain, abc_beta_floor, abc_build, pi_abc, weight_tail
from kernels.clt import clt_check, lp_threshold, mw_growth_bound
from kernels.heavy_tail import heavy_tail_floor
from kernels.imh import (
    ImhGeometric,
    imh_asymvar_criterion,
    imh_build,
    imh_decay_slope,
    imh_minorization,
    imh_spectrum,
    imh_spectrum_validate,
    imh_wpi,
)
from kernels.level_walk import (
    LevelWalk,
    geometric_levels,
    level_walk_build,
    level_walk_truncated,
    reducible_products,
    zero_energy_function,
)
from kernels.rwm import (
    Ball,
    HalfSpace,
    RwmSpec,
    ball_radius,
    rwm_conductance_mc,
    rwm_gap_bounds,
    rwm_support_lemmas,
    rwm_tv_outside,
    varsigma_star,
)

__all__ = [
    "AbcChain", "abc_beta_floor", "abc_build", "pi_abc", "weight_tail", "clt_check", "lp_threshold",
    "mw_growth_bound", "heavy_tail_floor", "ImhGeometric", "imh_asymvar_criterion", "imh_build",
    "imh_decay_slope", "imh_minorization", "imh_spectrum", "imh_spectrum_validate", "imh_wpi", "LevelWalk",
    "geometric_levels", "level_walk_build", "level_walk_truncated", "reducible_products", "zero_energy_function",
    "Ball", "HalfSpace",
    "RwmSpec", "ball_radius", "rwm_conductance_mc", "rwm_gap_bounds", "rwm_support_lemmas", "rwm_tv_outside",
    "varsigma_star",
]
