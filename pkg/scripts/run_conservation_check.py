#!/usr/bin/env python3
"""Replica study of the conservation properties: momentum and energy are
martingales of the collision dynamics, so their replica-mean drift should
sit inside the CLT band around zero while fourth moments stay bounded.
"""

import argparse
import math
import sys

import numpy as np

from nanbu.kernel import CutoffLevel, SoftPotentialParams
from nanbu.metrics import EmpiricalMeasure, conserved_stats, moment
from nanbu.simulation import Gaussian, SimConfig, run, stream


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=500)
    parser.add_argument("--k", type=float, default=8.0)
    parser.add_argument("--t", type=float, default=1.0)
    parser.add_argument("--replicas", type=int, default=100)
    parser.add_argument("--seed", type=int, default=1006)
    args = parser.parse_args(argv)

    config = SimConfig(
        n=args.n,
        cutoff=CutoffLevel(args.k),
        horizon=args.t,
        seed=args.seed,
        params=SoftPotentialParams(-0.5, 0.7),
        initial=Gaussian(),
        diagnostic_times=(0.0, args.t),
    )
    drift = np.empty((args.replicas, 4))
    m4_ratio = np.empty(args.replicas)
    for r in range(args.replicas):
        snapshots, _ = run(config, rng=stream(args.seed, 1, r))
        first, last = (EmpiricalMeasure.from_state(s) for s in (snapshots[0], snapshots[-1]))
        p0, e0 = conserved_stats(first)
        p1, e1 = conserved_stats(last)
        drift[r, :3] = p1 - p0
        drift[r, 3] = e1 - e0
        m4_ratio[r] = moment(last, 4.0) / moment(first, 4.0)

    names = ("px", "py", "pz", "energy")
    for idx, name in enumerate(names):
        se = drift[:, idx].std(ddof=1) / math.sqrt(args.replicas)
        sigmas = abs(drift[:, idx].mean()) / max(se, 1e-300)
        print(f"{name:7s} mean drift {drift[:, idx].mean():+.3e}  stderr {se:.3e}  |z| = {sigmas:.2f}")
    print(f"m4(T)/m4(0): max {m4_ratio.max():.3f}, mean {m4_ratio.mean():.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
