"""gpfstab command-line interface.

Usage:
    gpfstab ml --alpha A --x X [--tol T]
    gpfstab simulate --spec F [--step H] [--sweeps M] --out traj.csv|traj.json
    gpfstab certify --spec F [--method t1|t2|both]
    gpfstab verify --spec F [--samples N] [--seed S] [--step H] [--out report.json]
    gpfstab reproduce 1|2

``--spec`` takes a JSON spec path or a bundled name (example1, example2).
Exit codes: 0 success / certified / pass, 3 not certified / fail, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .certify import t1_certify, t2_certify
from .config import SpecError, load_spec, spec_to_dict
from .harness import DEFAULT_STEP, VerifyConfig, mc_verify, reproduce_example
from .solver import DEFAULT_SWEEPS, DivergenceError, StepError, solve_trajectory
from .special_fn import ConvergenceError, mittag_leffler

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NEGATIVE = 3


def _emit(payload, out: str | None = None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_ml(args) -> int:
    try:
        value = mittag_leffler(args.alpha, args.x, args.tol)
    except ValueError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ConvergenceError, OverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NEGATIVE
    print(repr(value))
    return EXIT_OK


def cmd_simulate(args) -> int:
    spec = load_spec(args.spec)
    try:
        traj = solve_trajectory(spec.system, spec.phi, args.step, args.sweeps)
        code = EXIT_OK
    except DivergenceError as exc:
        print(f"divergence: {exc}", file=sys.stderr)
        traj, code = exc.trajectory, EXIT_NEGATIVE
    if args.out.endswith(".json"):
        payload = traj.to_json_dict()
        payload["spec"] = spec_to_dict(spec)
        _emit(payload, args.out)
    else:
        traj.to_csv(args.out)
    peak, at = traj.max_norm()
    print(f"wrote {traj.N + traj.m + 1} rows (h = {traj.step!r}) to {args.out}; "
          f"max ||y|| = {peak!r} at t = {at!r}")
    return code


def cmd_certify(args) -> int:
    spec = load_spec(args.spec)
    certs = []
    if args.method in ("t1", "both"):
        certs.append(t1_certify(spec.system, spec.box))
    if args.method in ("t2", "both"):
        certs.append(t2_certify(spec.system, spec.box))
    payload = [c.to_dict() for c in certs]
    _emit(payload[0] if len(payload) == 1 else payload)
    # either criterion is sufficient on its own
    return EXIT_OK if any(c.certified for c in certs) else EXIT_NEGATIVE


def cmd_verify(args) -> int:
    spec = load_spec(args.spec)
    cfg = VerifyConfig(samples=args.samples, seed=args.seed, box=spec.box, step=args.step)
    report = mc_verify(spec.system, cfg, threads=args.threads)
    text = report.to_json()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    print(f"verdict: {report.verdict} ({len(report.violations)} violations "
          f"in {cfg.samples} samples)", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_NEGATIVE


def cmd_reproduce(args) -> int:
    _emit(reproduce_example(args.which, args.step))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gpfstab",
        description="Finite-time stability of delayed generalized proportional fractional systems",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ml", help="evaluate the Mittag-Leffler function E_alpha(x)")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-12)
    p.set_defaults(func=cmd_ml)

    p = sub.add_parser("simulate", help="solve a system and export the trajectory")
    p.add_argument("--spec", required=True)
    p.add_argument("--step", type=float, default=2.0**-10)
    p.add_argument("--sweeps", type=int, default=DEFAULT_SWEEPS, help="corrector sweeps per step")
    p.add_argument("--out", required=True, help="output path (.csv or .json)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("certify", help="evaluate the stability criteria")
    p.add_argument("--spec", required=True)
    p.add_argument("--method", choices=["t1", "t2", "both"], default="both")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("verify", help="Monte-Carlo check of the stability box")
    p.add_argument("--spec", required=True)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--step", type=float, default=DEFAULT_STEP)
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: $GPFSTAB_THREADS or min(4, cpus))")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("reproduce", help="recompute a bundled example")
    p.add_argument("which", type=int, choices=[1, 2])
    p.add_argument("--step", type=float, default=DEFAULT_STEP)
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SpecError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INPUT
    except (StepError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
