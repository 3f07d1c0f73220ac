"""
drift-wpi: certificates from a drift condition and a local PI
"""

from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, Field

import artifacts
from bounds.drift import DriftCondition, Geometric, spi_from_drift, wpi_from_drift
from bounds.local_pi import LocalPI, local_pi_from_minorization, local_pi_from_restriction
from chains.cheeger import lift_to_product
from chains.kernel import ChainSpec, FiniteKernel, pn_decay
from commands.common import info, load_json, metadata, parse_model
from config import get_settings
from errors import BoundViolation, DomainError
from rates.monotone import log_grid
from rates.profiles import gamma_from_beta
from tracing import tag_trace, traced


class LocalPISource(BaseModel):
    kind: Literal["restriction", "minorization", "given"] = "restriction"
    epsilon: Optional[float] = None
    constant: Optional[float] = Field(default=None, gt=0)


class DriftJob(BaseModel):
    """drift.json: {"drift": {...}, "local_pi": {...}, "chain": optional, "mu_C": optional}"""

    drift: DriftCondition
    local_pi: LocalPISource = LocalPISource()
    chain: Optional[ChainSpec] = None
    mu_C: Optional[float] = None


def register(subparsers):
    p = subparsers.add_parser("drift-wpi", help="WPI from a drift condition")
    p.add_argument("--input", required=True, help="drift JSON")
    p.add_argument("--n-max", type=int, default=200)
    p.set_defaults(handler=run)


def build_local_pi(job: DriftJob, P: Optional[FiniteKernel]) -> LocalPI:
    source = job.local_pi
    C = job.drift.C
    if source.kind == "given":
        if source.constant is None:
            raise DomainError("a given local PI needs its constant")
        return LocalPI(constant=source.constant, C=sorted(set(C)), flavor="local")
    if source.kind == "minorization":
        if source.epsilon is None:
            raise DomainError("a minorization local PI needs epsilon")
        return local_pi_from_minorization(source.epsilon, C, P)
    if P is None:
        raise DomainError("a restriction local PI needs the chain")
    return local_pi_from_restriction(P, C)


@traced(name="drift_wpi")
def run(args):
    job = parse_model(DriftJob, load_json(args.input), "drift job")
    P = FiniteKernel.from_spec(job.chain) if job.chain is not None else None
    lpi = build_local_pi(job, P)
    tag_trace("drift-wpi", form=job.drift.form.kind)
    meta = metadata(args, local_pi=lpi.model_dump())
    bundle = []
    summary = {"K": lpi.constant, "b": job.drift.b}
    if isinstance(job.drift.form, Geometric):
        summary["spectral_gap_lower"] = spi_from_drift(job.drift, lpi, P)
    cert = wpi_from_drift(job.drift, lpi, mu_C=job.mu_C, P=P)
    settings = get_settings()
    s = log_grid(settings.grid_low, settings.grid_high, settings.grid_points)
    bundle.append(artifacts.table("beta", ["s", "beta"], list(zip(s.tolist(), np.asarray(cert.rate(s)).tolist())),
                                  "Drift beta-function", "beta(s) from the drift and local PI", meta))
    if P is not None:
        product = lift_to_product(cert, P.min_holding())
        gamma = gamma_from_beta(product, args.n_max)
        rows = []
        for i in range(P.n):
            f = np.zeros(P.n)
            f[i] = 1.0
            decay = pn_decay(P, f, args.n_max)
            bad = np.flatnonzero(decay > gamma.values + 1e-9)
            if bad.size:
                raise BoundViolation(f"exact decay of 1_{{{i}}} exceeds gamma at n={int(bad[0])}",
                                     witness={"state": i, "n": int(bad[0])})
            rows.append(decay)
        worst = np.max(rows, axis=0)
        bundle.append(artifacts.table("profile", ["n", "gamma", "worst_indicator_decay"],
                                      [(n, float(g), float(w)) for n, (g, w) in enumerate(zip(gamma.values, worst))],
                                      "Drift convergence profile", "gamma(n) for P*P against exact decay", meta))
    info(f"drift certificate built with K = {lpi.constant:.6g}")
    bundle.append(artifacts.record("drift", summary, "Drift summary", meta))
    return bundle
