"""Command line interface.

Subcommands: simulate (single run, snapshot diagnostics), nsweep, ksweep,
couple (single coupled run, distance series) and verify (kernel inequality
certificates). Exit codes: 0 success, 2 configuration error, 3 numerical
non-convergence or failed certificate, 4 I/O error.
"""

from __future__ import annotations

import argparse
import sys

from .config import ExperimentConfig, parse_config
from .errors import ConfigError, NumericalError
from .harness import (
    SCHEMAS,
    couple_series,
    emit_report,
    experiment_k_sweep,
    experiment_n_sweep,
    kernel_certificates,
    simulate_series,
)
from .kernel import SoftPotentialParams

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nanbu", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, needs_config in (
        ("simulate", True),
        ("nsweep", True),
        ("ksweep", True),
        ("couple", True),
        ("verify", False),
    ):
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=needs_config, help="configuration document path")
        cmd.add_argument("--seed", type=lambda s: int(s, 0), default=None, help="override sim.seed")
        cmd.add_argument("--out", default=None, help="override the report base path")
        cmd.add_argument("--replicas", type=int, default=None, help="override replica count")
        cmd.add_argument("--threads", type=int, default=1, help="worker processes for replicas")
        if name == "verify":
            cmd.add_argument("--gamma", type=float, default=-0.5)
            cmd.add_argument("--nu", type=float, default=0.7)
            cmd.add_argument("--samples", type=int, default=200)
    return parser


def _load_config(args) -> ExperimentConfig:
    with open(args.config) as handle:
        text = handle.read()
    config = parse_config(text)
    overrides = {}
    if args.seed is not None:
        base = config.base
        base = type(base)(
            n=base.n,
            cutoff=base.cutoff,
            horizon=base.horizon,
            seed=args.seed,
            params=base.params,
            initial=base.initial,
            diagnostic_times=base.diagnostic_times,
        )
        overrides["base"] = base
    if args.replicas is not None:
        if args.replicas < 1:
            raise ConfigError(f"replicas: replicas>=1 violated (got {args.replicas})")
        overrides["replicas"] = args.replicas
    if args.out is not None:
        overrides["output"] = args.out
    if overrides:
        config = type(config)(
            base=overrides.get("base", config.base),
            sweep=config.sweep,
            replicas=overrides.get("replicas", config.replicas),
            blob_p=config.blob_p,
            blob_delta=config.blob_delta,
            output=overrides.get("output", config.output),
        )
    return config


def _cmd_verify(args) -> int:
    params = SoftPotentialParams(gamma=args.gamma, nu=args.nu)
    seed = args.seed if args.seed is not None else 0
    report = kernel_certificates(params, seed=seed, samples=args.samples)
    for name, entry in report.items():
        if not isinstance(entry, dict):
            continue
        status = "PASS" if entry["ok"] else "FAIL"
        detail = ", ".join(f"{k}={v:.6g}" for k, v in entry.items() if k != "ok" and v is not None)
        print(f"{status} {name}: {detail}")
    if args.out:
        rows = [
            (name, int(entry["ok"]))
            for name, entry in report.items()
            if isinstance(entry, dict)
        ]
        lines = ["certificate,ok"] + [f"{n},{ok}" for n, ok in rows]
        from .harness import _atomic_write

        _atomic_write(args.out if args.out.endswith(".csv") else args.out + ".csv", "\n".join(lines) + "\n")
    return EXIT_OK if report["all_ok"] else EXIT_NUMERICAL


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            return _cmd_verify(args)
        config = _load_config(args)
        if args.command == "simulate":
            rows, metadata = simulate_series(config)
        elif args.command == "nsweep":
            rows, metadata = experiment_n_sweep(config, threads=args.threads)
        elif args.command == "ksweep":
            rows, metadata = experiment_k_sweep(config, threads=args.threads)
        else:
            rows, metadata = couple_series(config)
        metadata["columns"] = SCHEMAS[args.command]
        emit_report(rows, metadata, config.output, config=config)
        print(f"wrote {config.output}.csv and {config.output}.json ({len(rows)} rows)")
        return EXIT_OK
    except ConfigError as exc:
        for violation in exc.violations:
            print(f"config error: {violation}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
