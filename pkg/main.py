"""
WPI toolkit CLI
Convergence-rate certificates for Markov chains through weak Poincare inequalities
"""
# python main.py finite-analyze --input chain.json --output artifacts/chain

import argparse
import sys

from dotenv import load_dotenv

# Load env vars (local .env or the shell)
load_dotenv()

from commands import drift, finite, kernels, rates, validate
from commands.common import emit
from config import override_settings
from errors import WpiError
from tracing import configure_tracing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wpi", description="Weak Poincare inequality toolkit")
    parser.add_argument("--output", help="artifact path prefix; JSON goes to stdout when omitted")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--parallelism", type=int)
    parser.add_argument("--tol", type=float)
    subparsers = parser.add_subparsers(dest="command", required=True)
    # Commands
    for module in (rates, finite, kernels, drift, validate):
        module.register(subparsers)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    configure_tracing()
    override_settings(seed=args.seed, parallelism=args.parallelism, tolerance=args.tol)
    try:
        bundle = args.handler(args)
    except WpiError as e:
        print(f"[ERROR] {e}", file=sys.stderr)
        if e.witness is not None:
            print(f"[ERROR] witness: {e.witness}", file=sys.stderr)
        return e.exit_code
    except Exception as e:
        print(f"[ERROR] {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    for path in emit(bundle, args.output):
        print(f"[INFO] wrote {path}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
