"""
finite-analyze and conductance: exact analysis of a finite chain
"""

import numpy as np

import artifacts
from chains.cheeger import cheeger_wpi, lift_to_product
from chains.conductance import weak_conductance
from chains.kernel import ChainSpec, FiniteKernel, Observable, pn_decay
from chains.reachability import rupi_check
from chains.spectral import exact_asymptotic_variance, spectral_gap
from commands.common import info, load_json, metadata, parse_model, warn
from config import get_settings
from errors import BoundViolation, InvalidInput, WpiError
from rates.certificates import alpha_to_beta
from rates.profiles import gamma_from_beta
from tracing import tag_trace, traced

SLACK = 1e-9


def register(subparsers):
    p = subparsers.add_parser("finite-analyze", help="conductance -> WPI -> gamma, checked against exact decay")
    p.add_argument("--input", required=True, help="chain JSON")
    p.add_argument("--observable", help="JSON list of function values")
    p.add_argument("--n-max", type=int, default=200)
    p.set_defaults(handler=run_analyze)

    p = subparsers.add_parser("conductance", help="weak conductance profile")
    p.add_argument("--input", required=True, help="chain JSON")
    p.add_argument("--sampled", type=int, help="sample this many random sets instead of enumerating")
    p.set_defaults(handler=run_conductance)


def load_chain(path: str) -> FiniteKernel:
    spec = parse_model(ChainSpec, load_json(path), "chain")
    return FiniteKernel.from_spec(spec)


def load_observable(path, P: FiniteKernel) -> Observable:
    if path is None:
        rng = np.random.Generator(np.random.Philox(get_settings().seed))
        return Observable(rng.standard_normal(P.n), P.mu)
    values = load_json(path)
    if not isinstance(values, list) or len(values) != P.n:
        raise InvalidInput(f"observable must be a list of {P.n} numbers")
    return Observable(values, P.mu)


@traced(name="finite_analyze")
def run_analyze(args):
    P = load_chain(args.input)
    f = load_observable(args.observable, P)
    tag_trace("finite-analyze", states=P.n)
    report = rupi_check(P)
    if not report.irreducible:
        warn(f"chain is reducible: {report.witness[1]} is unreachable from {report.witness[0]}")
    settings = get_settings()
    profile = weak_conductance(P, parallelism=settings.parallelism)
    cert = lift_to_product(cheeger_wpi(P, profile), P.min_holding())
    gamma = gamma_from_beta(alpha_to_beta(cert), args.n_max)
    g = f.values - f.mean
    osc = f.sieve
    # ||P^n f||^2 <= gamma(n) ||f||_osc^2 via the P*P certificate
    decay = pn_decay(P, g, args.n_max)
    rows = [(n, float(decay[n]), float(gamma.values[n] * osc)) for n in range(args.n_max + 1)]
    bad = [n for n, d, bound in rows if d > bound + SLACK]
    if bad:
        raise BoundViolation(f"exact decay exceeds the certified bound at n={bad[0]}",
                             witness={"n": bad[0], "f": f.values.tolist()})
    summary = {"states": P.n, "kappa0": profile.kappa0, "irreducible": report.irreducible}
    if P.is_reversible():
        summary["spectral_gap"] = spectral_gap(P)
        try:
            summary["asymptotic_variance"] = exact_asymptotic_variance(P, f)
        except WpiError as e:
            warn(f"asymptotic variance unavailable: {e}")
    info(f"certified decay holds for n <= {args.n_max}")
    meta = metadata(args)
    return [
        artifacts.table("decay", ["n", "exact", "bound"], rows, "Exact decay against the certified bound",
                        "||P^n f||^2 and gamma(n) ||f||_osc^2", meta),
        artifacts.record("summary", summary, "Chain summary", meta),
    ]


@traced(name="conductance")
def run_conductance(args):
    P = load_chain(args.input)
    settings = get_settings()
    if args.sampled:
        profile = weak_conductance(P, mode="sampled", count=args.sampled, seed=settings.seed)
    else:
        profile = weak_conductance(P, parallelism=settings.parallelism)
    tag_trace("conductance", exhaustive=profile.exhaustive)
    rows = [(float(u), float(k)) for u, k in zip(profile.levels, profile.ratios)]
    info(f"kappa(0) = {profile.kappa0:.6g} over {len(rows)} front points")
    return [artifacts.table("conductance", ["level", "kappa"], rows, "Weak conductance front",
                            "kappa(u) = ratio at the first level above u", metadata(args, exhaustive=profile.exhaustive))]
