#!/usr/bin/env python3
"""Run both convergence studies (cutoff sweep and particle-count sweep)
and print the fitted trends next to the theoretical exponents.

Takes a few minutes at the default desk scale; pass --replicas to shrink.
"""

import argparse
import pathlib
import sys

from nanbu.cli import main as nanbu_main

HERE = pathlib.Path(__file__).resolve().parent.parent


def run(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--replicas", type=int, default=None)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--out", default="out")
    args = parser.parse_args(argv)

    for study in ("ksweep", "nsweep"):
        cmd = [
            study,
            "--config",
            str(HERE / "configs" / f"{study}.cfg"),
            "--out",
            f"{args.out}/{study}",
            "--threads",
            str(args.threads),
        ]
        if args.replicas is not None:
            cmd += ["--replicas", str(args.replicas)]
        code = nanbu_main(cmd)
        if code != 0:
            return code
        print(f"{study} done -> {args.out}/{study}.csv")
    return 0


if __name__ == "__main__":
    sys.exit(run())
