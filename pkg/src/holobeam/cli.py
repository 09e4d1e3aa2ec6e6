"""Command-line entry point: ``holobeam {run,convergence,timing} SPEC``."""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys

from .experiment import ExperimentAborted, load_spec, run_experiment, write_results
from .geometry import ConfigError


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="holobeam", description="Hybrid holographic beamforming experiments."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "run": "Monte-Carlo sweep over SNR or surface size",
        "convergence": "per-iteration sum-rate traces",
        "timing": "per-iteration wall time versus surface size",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("spec", help="JSON experiment file")
        p.add_argument("--seed", type=int, help="override master_seed")
        p.add_argument("--trials", type=int, help="override num_trials")
        p.add_argument("--out", help="override output directory")
        p.add_argument("--workers", type=int, default=1, help="worker processes")
        p.add_argument("--plot", action="store_true", help="also write plot.svg")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        spec = load_spec(args.spec)
        changes = {}
        if args.seed is not None:
            changes["master_seed"] = args.seed
        if args.trials is not None:
            changes["num_trials"] = args.trials
        if args.out is not None:
            changes["output_path"] = args.out
        if args.command in ("convergence", "timing") and spec.sweep != args.command:
            changes.update(_coerce_sweep(spec, args.command))
        elif args.command == "run" and spec.sweep not in ("snr", "rhs_size"):
            raise ConfigError("sweep.kind", "'run' expects an snr or rhs_size sweep")
        spec = dataclasses.replace(spec, **changes)
        result = run_experiment(spec, workers=args.workers)
        written = write_results(result, spec.output_path, plot=args.plot)
    except ConfigError as exc:
        print(f"holobeam: invalid spec: {exc}", file=sys.stderr)
        return 2
    except (OSError, ExperimentAborted) as exc:
        print(f"holobeam: {exc}", file=sys.stderr)
        return 1
    for kind, path in written.items():
        print(f"{kind}: {path}")
    return 0


def _coerce_sweep(spec, command):
    if command == "convergence":
        snr = spec.grid[0] if spec.sweep == "snr" else spec.snr_db
        return {"sweep": "convergence", "grid": (snr,)}
    sizes = spec.grid if spec.sweep == "rhs_size" else ((16, 16), (16, 32), (32, 32))
    snr = spec.grid[0] if spec.sweep in ("snr", "convergence") else spec.snr_db
    return {"sweep": "timing", "grid": tuple(sizes), "snr_db": snr}


if __name__ == "__main__":
    sys.exit(main())
