"""
imh, abc, rwm-bounds and clt: the worked kernels
"""

import numpy as np

import artifacts
from chains.optimal import beta_star_values
from commands.common import info, metadata
from commands.finite import load_chain, load_observable
from commands.rates import load_beta
from config import get_settings
from kernels.abc import AbcChain, abc_beta_floor, abc_build, weight_tail
from kernels.clt import clt_check
from kernels.imh import ImhGeometric, imh_decay_slope, imh_spectrum_validate
from kernels.rwm import (
    Ball,
    HalfSpace,
    RwmSpec,
    ball_ceiling,
    ball_radius,
    check_conductance_ceiling,
    halfspace_ceiling,
    limiting_constant,
    rwm_conductance_mc,
    rwm_gap_bounds,
)
from rates.certificates import beta_certificate
from rates.profiles import ConvergenceProfile, gamma_from_beta
from tracing import tag_trace, traced

ABC_S_GRID = np.geomspace(16.0, 1024.0, 25)


def register(subparsers):
    p = subparsers.add_parser("imh", help="independence sampler spectrum and decay")
    p.add_argument("--a", type=float, default=0.5)
    p.add_argument("--b", type=float, default=0.25)
    p.add_argument("--trunc", type=int, default=200)
    p.add_argument("--m-max", type=int, default=20)
    p.set_defaults(handler=run_imh)

    p = subparsers.add_parser("abc", help="pseudo-marginal ABC floor")
    p.add_argument("--a", type=float, default=0.5)
    p.add_argument("--q", type=float, default=0.5)
    p.add_argument("--n", type=int, default=1, help="replicates N in the likelihood estimator")
    p.add_argument("--x-max", type=int, default=14)
    p.set_defaults(handler=run_abc)

    p = subparsers.add_parser("rwm-bounds", help="random-walk Metropolis conductance and gap bounds")
    p.add_argument("--regime", choices=["gaussian", "general-convex"], default="gaussian")
    p.add_argument("--varsigma", type=float, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--m", type=float, default=1.0)
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--mc-samples", type=int, default=0)
    p.set_defaults(handler=run_rwm)

    p = subparsers.add_parser("clt", help="Maxwell-Woodroofe check")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--gamma-power", type=float, help="gamma(n) = n^-A")
    source.add_argument("--beta", help="compact beta rate")
    source.add_argument("--input", help="chain JSON (exact check)")
    p.add_argument("--observable", help="JSON list of function values")
    p.add_argument("--n-max", type=int, default=1000)
    p.add_argument("--b", type=float, help="report the L^p threshold 2b/(b-1)")
    p.set_defaults(handler=run_clt)


@traced(name="imh")
def run_imh(args):
    chain = ImhGeometric(a=args.a, b=args.b, truncation=args.trunc)
    tag_trace("imh", a=args.a, b=args.b)
    report = imh_spectrum_validate(chain, m_max=args.m_max)
    rows = [(int(m), float(e), float(c), float(r))
            for m, e, c, r in zip(report.m, report.exact, report.computed, report.residuals)]
    slope = imh_decay_slope(chain)
    info(f"max eigenvalue residual {report.max_residual:.3g}, decay slope {slope:.4f}")
    meta = metadata(args)
    return [
        artifacts.table("spectrum", ["m", "exact", "computed", "residual"], rows, "IMH spectrum",
                        "Lambda_m against the truncated kernel", meta),
        artifacts.record("decay", {"slope": slope, "expected": -args.b / (args.a - args.b)},
                         "Decay of ||P^n 1_{x=0}||^2", meta),
    ]


@traced(name="abc")
def run_abc(args):
    chain = AbcChain(a=args.a, q=args.q, N=args.n, x_max=args.x_max)
    tag_trace("abc", a=args.a, q=args.q, N=args.n)
    P = abc_build(chain)
    floor = abc_beta_floor(chain)
    s, values = beta_star_values(P, s_grid=ABC_S_GRID, parallelism=get_settings().parallelism)
    positive = values > 0
    slope = float(np.polyfit(np.log(s[positive]), np.log(values[positive]), 1)[0]) if positive.sum() > 1 else float("nan")
    rows = [(float(x), float(v), float(floor.rate(x))) for x, v in zip(s, values)]
    summary = {"fitted_slope": slope, "floor_exponent": floor.exponent, "valid_from": floor.valid_from}
    if chain.N == 1:
        summary["weight_tail"] = {str(t): weight_tail(chain, t) for t in (2.0, 4.0, 8.0)}
    info(f"beta* slope {slope:.4f} against floor exponent -{floor.exponent:.4f}")
    meta = metadata(args)
    return [
        artifacts.table("beta_star", ["s", "beta_star_lower", "floor"], rows, "ABC beta* lower bound",
                        "exhaustive indicator bound on the truncated joint chain", meta),
        artifacts.record("abc", summary, "ABC floor", meta),
    ]


@traced(name="rwm_bounds")
def run_rwm(args):
    spec = RwmSpec(d=args.d, varsigma=args.varsigma, m=args.m, L=args.L)
    tag_trace("rwm-bounds", regime=args.regime, d=args.d)
    bounds = rwm_gap_bounds(spec, args.regime)
    values = bounds.record()
    values["limiting_constant"] = limiting_constant(args.varsigma)
    values["scaled_conductance_lower"] = bounds.conductance_lower * args.d ** 0.5
    meta = metadata(args)
    bundle = [artifacts.record("rwm_bounds", values, "RWM closed-form bounds", meta)]
    if args.mc_samples:
        sets = [HalfSpace(), Ball(radius=ball_radius(spec))]
        estimates = rwm_conductance_mc(spec, sets, args.mc_samples)
        check_conductance_ceiling(spec, estimates)
        rows = []
        for est, ceiling in zip(estimates, (halfspace_ceiling(spec), ball_ceiling(spec))):
            ratio = est.ratio.value if est.ratio else 0.0
            stderr = est.ratio.stderr if est.ratio else 0.0
            rows.append((est.set.kind, est.flow.value, est.flow.stderr, est.product.value, ratio, stderr, ceiling))
        bundle.insert(0, artifacts.table("rwm_conductance",
                                         ["set", "flow", "flow_stderr", "product", "ratio", "ratio_stderr", "ceiling"],
                                         rows, "RWM conductance estimates", "Monte Carlo against the analytic ceiling",
                                         metadata(args, n_samples=args.mc_samples)))
    info(f"kappa lower {bounds.conductance_lower:.6g}, gap in [{bounds.gap_lower:.3g}, {bounds.gap_upper:.3g}]")
    return bundle


def _power_profile(a: float, n_max: int) -> ConvergenceProfile:
    n = np.maximum(np.arange(n_max + 1, dtype=float), 1.0)
    return ConvergenceProfile.from_values(n ** -a, a=1.0)


@traced(name="clt")
def run_clt(args):
    if args.gamma_power is not None:
        source, f = _power_profile(args.gamma_power, args.n_max), None
    elif args.beta:
        source, f = gamma_from_beta(beta_certificate(load_beta(args), source="cli"), args.n_max), None
    else:
        source = load_chain(args.input)
        f = load_observable(args.observable, source)
    tag_trace("clt")
    report = clt_check(source, f, n_max=args.n_max, b=args.b)
    rows = [(n + 1, float(v)) for n, v in enumerate(report.partial_sums)]
    info(f"verdict {report.verdict}")
    meta = metadata(args)
    values = {"verdict": report.verdict, "exponent": report.exponent, "lp_threshold": report.lp_threshold}
    return [
        artifacts.table("mw_sums", ["N", "S_N"], rows, "Maxwell-Woodroofe partial sums",
                        "S_N = sum_{n<=N} n^-3/2 ||V_n f||", meta),
        artifacts.record("clt", values, "CLT verdict", meta),
    ]
