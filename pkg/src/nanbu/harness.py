"""Experiment runner: sweeps, replica aggregation and report emission.

Replica r of sweep point p always draws from the stream split
(seed, p + 1, r); path (0, 0) is reserved for reference runs. Results are
therefore independent of execution order, and reports are byte-identical
across reruns except for the wall-clock column.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
import time as _time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from .config import ExperimentConfig, KSweep, NSweep, config_to_mapping
from .errors import ConfigError
from .kernel import (
    SoftPotentialParams,
    angular_g,
    angular_h,
    cutoff_mass_ratios,
    frame_vectors,
    g_difference_ratio,
    g_envelope_constants,
    tanaka_phi0,
)
from .metrics import BlobSpec, EmpiricalMeasure, blob_lp_norm, conserved_stats, moment, wasserstein2
from .simulation import SimConfig, coupled_run, run, stream


@dataclass(frozen=True)
class ReportRow:
    """One aggregated sweep point."""

    sweep_value: float
    mean: float
    stderr: float
    replicas: int
    elapsed_seconds: float


def _mean_stderr(values: list[float]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    mean = float(arr.mean())
    stderr = float(arr.std(ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else 0.0
    return mean, stderr


def _with_horizon(base: SimConfig, **overrides) -> SimConfig:
    """Copy of base with the horizon appended to the diagnostic times."""
    times = tuple(sorted(set(base.diagnostic_times) | {base.horizon}))
    fields = dict(
        n=base.n,
        cutoff=base.cutoff,
        horizon=base.horizon,
        seed=base.seed,
        params=base.params,
        initial=base.initial,
        diagnostic_times=times,
    )
    fields.update(overrides)
    return SimConfig(**fields)


# ---------------------------------------------------------------------------
# coupled-cutoff sweep
# ---------------------------------------------------------------------------


def _ksweep_replica(args) -> float:
    config, k_lo, k_hi, point, replica = args
    rng = stream(config.seed, point + 1, replica)
    _, distances = coupled_run(config, k_lo, k_hi, rng=rng)
    return distances[-1][1]


def experiment_k_sweep(config: ExperimentConfig, threads: int = 1):
    """Mean terminal coupled distance D(T) per low cutoff level.

    Returns (rows, metadata); metadata carries the fitted log-log slope of
    mean D(T) against K_lo next to the theoretical exponent 1 - 2/nu (rows
    with zero mean are excluded from the fit).
    """
    if not isinstance(config.sweep, KSweep):
        raise ConfigError("ksweep requires sweep.k_lo and sweep.k_hi")
    sweep = config.sweep
    base = _with_horizon(config.base, diagnostic_times=(config.base.horizon,))
    rows = []
    for point, k_lo in enumerate(sweep.k_lo):
        start = _time.perf_counter()
        jobs = [(base, k_lo, sweep.k_hi, point, r) for r in range(config.replicas)]
        finals = _map_jobs(_ksweep_replica, jobs, threads)
        mean, stderr = _mean_stderr(finals)
        rows.append(
            ReportRow(
                sweep_value=float(k_lo),
                mean=mean,
                stderr=stderr,
                replicas=config.replicas,
                elapsed_seconds=_time.perf_counter() - start,
            )
        )
    positive = [(r.sweep_value, r.mean) for r in rows if r.mean > 0.0]
    slope = None
    if len(positive) >= 2:
        xs = np.log([v for v, _ in positive])
        ys = np.log([m for _, m in positive])
        slope = float(np.polyfit(xs, ys, 1)[0])
    nu = config.base.params.nu
    metadata = {
        "kind": "ksweep",
        "k_hi": sweep.k_hi,
        "fitted_loglog_slope": slope,
        "theoretical_slope": 1.0 - 2.0 / nu,
    }
    return rows, metadata


# ---------------------------------------------------------------------------
# particle-count sweep
# ---------------------------------------------------------------------------


def _nsweep_replica(args) -> float:
    config, n, ref_points, point, replica = args
    if n == ref_points.shape[0]:
        cloud = ref_points
    else:
        rng = stream(config.seed, point + 1, replica, 0)
        cfg = _with_horizon(config, n=n, diagnostic_times=(config.horizon,))
        snapshots, _ = run(cfg, rng=rng)
        cloud = snapshots[-1].velocities
    pick = stream(config.seed, point + 1, replica, 1)
    idx = pick.choice(ref_points.shape[0], size=n, replace=False)
    return wasserstein2(EmpiricalMeasure(cloud), EmpiricalMeasure(ref_points[idx])) ** 2


def experiment_n_sweep(config: ExperimentConfig, threads: int = 1):
    """Mean squared Wasserstein-2 distance to a high-resolution reference.

    One reference run at n_ref (stream path (0, 0)) stands in for the
    unknown limit law. Each replica at size n compares its terminal cloud
    with a fresh uniform subsample of the reference cloud of matching size;
    a sweep value equal to n_ref reuses the reference run itself, making
    that row an exact zero. Metadata reports whether the means decrease
    strictly.
    """
    if not isinstance(config.sweep, NSweep):
        raise ConfigError("nsweep requires sweep.n_values and sweep.n_ref")
    sweep = config.sweep
    ref_cfg = _with_horizon(config.base, n=sweep.n_ref, diagnostic_times=(config.base.horizon,))
    ref_snapshots, _ = run(ref_cfg, rng=stream(config.base.seed, 0, 0))
    ref_points = ref_snapshots[-1].velocities

    rows = []
    for point, n in enumerate(sweep.n_values):
        start = _time.perf_counter()
        jobs = [(config.base, n, ref_points, point, r) for r in range(config.replicas)]
        values = _map_jobs(_nsweep_replica, jobs, threads)
        mean, stderr = _mean_stderr(values)
        rows.append(
            ReportRow(
                sweep_value=float(n),
                mean=mean,
                stderr=stderr,
                replicas=config.replicas,
                elapsed_seconds=_time.perf_counter() - start,
            )
        )
    means = [r.mean for r in rows]
    metadata = {
        "kind": "nsweep",
        "n_ref": sweep.n_ref,
        "strictly_decreasing": all(a > b for a, b in zip(means, means[1:])),
    }
    return rows, metadata


# ---------------------------------------------------------------------------
# single runs
# ---------------------------------------------------------------------------


def couple_series(config: ExperimentConfig):
    """Distance time series (t, msd) of one coupled run at the first
    configured (k_lo, k_hi) pair."""
    if not isinstance(config.sweep, KSweep):
        raise ConfigError("couple requires sweep.k_lo and sweep.k_hi")
    base = _with_horizon(config.base)
    _, distances = coupled_run(base, config.sweep.k_lo[0], config.sweep.k_hi)
    return [(t, d) for t, d in distances], {
        "kind": "couple",
        "k_lo": config.sweep.k_lo[0],
        "k_hi": config.sweep.k_hi,
    }


def simulate_series(config: ExperimentConfig, grid_refine: int = 4):
    """Snapshot diagnostics of one run: moments, conserved statistics, the
    mollified L^p norm at radius N^(-(1-delta)/3) and the event counter."""
    base = _with_horizon(config.base)
    snapshots, log = run(base)
    eps = BlobSpec.radius_for(base.n, config.blob_delta)
    spec = BlobSpec(epsilon=min(eps, 1.0), p=config.blob_p, delta=config.blob_delta)
    rows = []
    for snap in snapshots:
        cloud = EmpiricalMeasure.from_state(snap)
        momentum, energy = conserved_stats(cloud)
        rows.append(
            (
                snap.time,
                moment(cloud, 2.0),
                moment(cloud, 4.0),
                momentum[0],
                momentum[1],
                momentum[2],
                energy,
                blob_lp_norm(cloud, spec, grid_refine=grid_refine),
                snap.event_count,
            )
        )
    metadata = {
        "kind": "simulate",
        "events": log.events,
        "blob_epsilon": spec.epsilon,
        "wall_seconds": log.elapsed_seconds,
    }
    return rows, metadata


# ---------------------------------------------------------------------------
# kernel certificates
# ---------------------------------------------------------------------------


def kernel_certificates(
    params: SoftPotentialParams,
    seed: int = 0,
    samples: int = 200,
    grid: int = 64,
) -> dict:
    """Numerical certificates for the kernel inequalities.

    Checks the inverse-map roundtrip and envelope, the phase-alignment
    bound on random vector pairs, the bounded ratio of the squared
    G-difference integral, and the cutoff jump-mass ratios. Each entry
    reports the measured quantity and a boolean verdict.
    """
    rng = stream(seed, 9)
    report: dict[str, dict] = {}

    zs = np.concatenate([[0.0], np.geomspace(1e-3, 1e6, 40)])
    round_err = max(
        abs(angular_h(angular_g(z, params), params) - z) / max(1.0, z) for z in zs
    )
    c2, c3 = g_envelope_constants(params)
    envelope = (1.0 + zs) ** (-1.0 / params.nu)
    gs = np.array([angular_g(z, params) for z in zs])
    env_ok = bool(
        np.all(gs >= c2 * envelope * (1 - 1e-12)) and np.all(gs <= c3 * envelope * (1 + 1e-12))
    )
    report["inverse_roundtrip"] = {"max_rel_error": round_err, "ok": round_err < 1e-12}
    report["g_envelope"] = {"c2": c2, "c3": c3, "ok": env_ok}

    xs = rng.normal(size=(samples, 3))
    ys = rng.normal(size=(samples, 3))
    phis = np.linspace(0.0, 2.0 * math.pi, grid, endpoint=False)
    ix, jx = frame_vectors(xs)
    iy, jy = frame_vectors(ys)
    worst = -math.inf
    for a in range(samples):
        phi0 = tanaka_phi0(xs[a], ys[a])
        gx = np.cos(phis)[:, None] * ix[a] + np.sin(phis)[:, None] * jx[a]
        shifted = phis + phi0
        gy = np.cos(shifted)[:, None] * iy[a] + np.sin(shifted)[:, None] * jy[a]
        gap = float(np.linalg.norm(gx - gy, axis=1).max() - np.linalg.norm(xs[a] - ys[a]))
        worst = max(worst, gap)
    report["phase_alignment"] = {"max_excess": worst, "ok": worst <= 1e-10}

    half = max(8, samples // 2)
    pairs = rng.uniform(1e-3, 10.0, size=(2 * half, 2))
    ratios = [g_difference_ratio(x, y, params) for x, y in pairs if x != y]
    m_half, m_full = max(ratios[:half]), max(ratios)
    report["g_difference_ratio"] = {
        "max_half_sample": m_half,
        "max_full_sample": m_full,
        "ok": m_full <= 1.1 * m_half,
    }

    speeds = np.abs(rng.normal(size=2 * half)) + 1e-3
    cut_ratios = []
    uncut_ratios = []
    for x in speeds:
        for k in (1.0, 10.0, 100.0):
            cut, uncut = cutoff_mass_ratios(float(x), k, params)
            cut_ratios.append(cut)
            uncut_ratios.append(uncut)
    per = 3
    c_half, c_full = max(cut_ratios[: half * per]), max(cut_ratios)
    u_half, u_full = max(uncut_ratios[: half * per]), max(uncut_ratios)
    report["cutoff_mass_ratio"] = {
        "max_half_sample": c_half,
        "max_full_sample": c_full,
        "ok": c_full <= 1.1 * c_half,
    }
    report["total_mass_ratio"] = {
        "max_half_sample": u_half,
        "max_full_sample": u_full,
        "ok": u_full <= 1.1 * u_half,
    }
    report["all_ok"] = all(entry["ok"] for entry in report.values() if isinstance(entry, dict))
    return report


# ---------------------------------------------------------------------------
# execution and reporting
# ---------------------------------------------------------------------------


def _map_jobs(fn, jobs, threads: int):
    if threads <= 1 or len(jobs) <= 1:
        return [fn(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, jobs))


def _format_cell(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit_report(rows, metadata: dict, output_path: str, config: ExperimentConfig | None = None):
    """Write <base>.csv and a JSON sidecar <base>.json atomically.

    metadata["columns"] names the CSV columns; rows are ReportRows or plain
    numeric tuples. Numeric cells use 17 significant digits so doubles
    round-trip exactly; rerunning an identical config reproduces every
    column byte for byte except wall-clock timings. The sidecar carries the
    full canonical config, seed, version and timing data, and parses back
    to an equal ExperimentConfig.
    """
    base, ext = os.path.splitext(output_path)
    if ext not in (".csv", ".json"):
        base = output_path
    columns = metadata["columns"]
    lines = [",".join(columns)]
    for row in rows:
        if isinstance(row, ReportRow):
            cells = (row.sweep_value, row.mean, row.stderr, row.replicas, row.elapsed_seconds)
        else:
            cells = tuple(row)
        if len(cells) != len(columns):
            raise ValueError(f"row width {len(cells)} != header width {len(columns)}")
        lines.append(",".join(_format_cell(c) for c in cells))
    _atomic_write(base + ".csv", "\n".join(lines) + "\n")

    sidecar = {
        "version": f"nanbu-{__version__}",
        "metadata": {k: v for k, v in metadata.items() if k != "columns"},
        "columns": columns,
    }
    if config is not None:
        sidecar["config"] = config_to_mapping(config)
        sidecar["seed"] = config.base.seed
    _atomic_write(base + ".json", json.dumps(sidecar, indent=2, sort_keys=True) + "\n")


SCHEMAS = {
    "nsweep": ["n", "mean_w2sq", "stderr", "replicas", "elapsed_s"],
    "ksweep": ["k_lo", "mean_msd", "stderr", "replicas", "elapsed_s"],
    "couple": ["t", "msd"],
    "simulate": ["t", "m2", "m4", "px", "py", "pz", "energy", "blob_lp", "events"],
}
