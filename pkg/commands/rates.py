"""
rates-convert: beta -> gamma, iterates, or K*
"""

import numpy as np

import artifacts
from commands.common import info, load_json, metadata, parse_model
from config import get_settings
from errors import InvalidInput
from rates.certificates import beta_certificate
from rates.conjugate import k_transform
from rates.monotone import log_grid, parse_rate_flag, rate_adapter
from rates.profiles import gamma_from_beta, iterate_bound
from tracing import tag_trace, traced


def register(subparsers):
    p = subparsers.add_parser("rates-convert", help="convergence profile from a beta-function")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--beta", help="compact rate, e.g. powerlaw:1,1")
    source.add_argument("--input", help="rate JSON")
    p.add_argument("--a", type=float, default=1.0, help="sieve bound a")
    p.add_argument("--n-max", type=int, default=100)
    p.add_argument("--mode", choices=["gamma", "iterate", "kstar"], default="gamma")
    p.set_defaults(handler=run)


def load_beta(args):
    if getattr(args, "beta", None):
        return parse_rate_flag(args.beta)
    if getattr(args, "input", None):
        return parse_model(rate_adapter, load_json(args.input), "rate")
    raise InvalidInput("give --beta or --input")


@traced(name="rates_convert")
def run(args):
    rate = load_beta(args)
    cert = beta_certificate(rate, a_bound=args.a, source="cli")
    tag_trace("rates-convert", args.mode)
    meta = metadata(args, beta=rate.model_dump(), a=args.a)
    if args.mode == "kstar":
        settings = get_settings()
        v = log_grid(settings.grid_low, args.a, settings.grid_points)
        k = np.asarray(k_transform(cert.rate)(v), dtype=float)
        rows = list(zip(v.tolist(), k.tolist()))
        info(f"K* tabulated at {len(rows)} points")
        return [artifacts.table("kstar", ["v", "kstar"], rows, "Conjugate K*",
                                "K*(v) = sup_s (v - beta(s)) / s", meta)]
    if args.mode == "iterate":
        profile = iterate_bound(cert, args.a, args.n_max)
    else:
        profile = gamma_from_beta(cert, args.n_max)
    rows = [(n, float(g)) for n, g in enumerate(profile.values)]
    info(f"gamma({args.n_max}) = {profile.values[-1]:.6g}")
    return [artifacts.table("profile", ["n", "gamma"], rows, "Convergence profile",
                            f"gamma(n) from beta ({args.mode})", meta)]
