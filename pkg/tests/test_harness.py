import json
import math
import os

import numpy as np
import pytest

from nanbu.config import parse_config
from nanbu.errors import ConfigError
from nanbu.harness import (
    SCHEMAS,
    ReportRow,
    couple_series,
    emit_report,
    experiment_k_sweep,
    experiment_n_sweep,
    kernel_certificates,
    simulate_series,
)
from nanbu.kernel import SoftPotentialParams

SMALL = """
params.gamma = -0.5
params.nu = 0.7
sim.n = 24
sim.k = 2
sim.t = 0.2
sim.seed = 42
replicas = 4
"""


def read_csv(path):
    with open(path) as handle:
        lines = handle.read().strip().splitlines()
    return lines[0].split(","), [line.split(",") for line in lines[1:]]


# ---------------------------------------------------------------------------
# ksweep
# ---------------------------------------------------------------------------


def test_ksweep_rows_and_zero_at_equal_cutoffs():
    config = parse_config(SMALL + "\nsweep.k_lo = 2,3,4\nsweep.k_hi = 4")
    rows, metadata = experiment_k_sweep(config)
    assert [r.sweep_value for r in rows] == [2.0, 3.0, 4.0]
    assert all(r.replicas == 4 for r in rows)
    assert rows[-1].mean == 0.0 and rows[-1].stderr == 0.0
    assert rows[0].mean > 0.0
    assert metadata["theoretical_slope"] == pytest.approx(1.0 - 2.0 / 0.7)


def test_ksweep_requires_coupled_sweep():
    config = parse_config(SMALL)
    with pytest.raises(ConfigError):
        experiment_k_sweep(config)


def test_ksweep_deterministic():
    config = parse_config(SMALL + "\nsweep.k_lo = 2,4\nsweep.k_hi = 8")
    rows_a, _ = experiment_k_sweep(config)
    rows_b, _ = experiment_k_sweep(config)
    for a, b in zip(rows_a, rows_b):
        assert (a.sweep_value, a.mean, a.stderr) == (b.sweep_value, b.mean, b.stderr)


# ---------------------------------------------------------------------------
# nsweep
# ---------------------------------------------------------------------------


def test_nsweep_row_count_and_reference_identity():
    config = parse_config(SMALL + "\nsweep.n_values = 8,16,24\nsweep.n_ref = 24")
    rows, metadata = experiment_n_sweep(config)
    assert len(rows) == 3
    # sweep value equal to the reference size reuses the reference run: exact zero
    assert rows[-1].mean == 0.0
    assert metadata["kind"] == "nsweep"


def test_nsweep_stderr_scaling():
    base = SMALL.replace("sim.seed = 42", "sim.seed = 7") + "\nsweep.n_values = 10\nsweep.n_ref = 60"
    few = parse_config(base.replace("replicas = 4", "replicas = 10"))
    many = parse_config(base.replace("replicas = 4", "replicas = 40"))
    rows_few, _ = experiment_n_sweep(few)
    rows_many, _ = experiment_n_sweep(many)
    ratio = rows_few[0].stderr / rows_many[0].stderr
    assert ratio == pytest.approx(2.0, rel=0.3)


# ---------------------------------------------------------------------------
# couple / simulate
# ---------------------------------------------------------------------------


def test_couple_series_shape():
    config = parse_config(SMALL + "\nsweep.k_lo = 1\nsweep.k_hi = 4\ndiag.times = 0.1,0.2")
    rows, metadata = couple_series(config)
    assert [t for t, _ in rows] == [0.1, 0.2]
    assert metadata["k_lo"] == 1.0 and metadata["k_hi"] == 4.0


def test_simulate_series_columns():
    config = parse_config(SMALL + "\ndiag.times = 0.1,0.2")
    rows, metadata = simulate_series(config)
    assert len(rows) == 2
    t, m2, m4, px, py, pz, energy, blob, events = rows[-1]
    assert t == 0.2
    assert energy == m2
    assert blob > 0.0
    assert events == metadata["events"]


# ---------------------------------------------------------------------------
# report emission
# ---------------------------------------------------------------------------


def test_emit_report_header_only(tmp_path):
    out = str(tmp_path / "empty")
    emit_report([], {"columns": SCHEMAS["nsweep"]}, out)
    header, rows = read_csv(out + ".csv")
    assert header == SCHEMAS["nsweep"]
    assert rows == []


def test_emit_report_formats_and_sidecar(tmp_path):
    out = str(tmp_path / "rep")
    config = parse_config(SMALL + "\nsweep.k_lo = 2\nsweep.k_hi = 4")
    rows = [ReportRow(sweep_value=2.0, mean=1.0 / 3.0, stderr=0.01, replicas=4, elapsed_seconds=0.5)]
    emit_report(rows, {"columns": SCHEMAS["ksweep"], "kind": "ksweep"}, out, config=config)
    header, data = read_csv(out + ".csv")
    assert header == SCHEMAS["ksweep"]
    assert data[0][1] == format(1.0 / 3.0, ".17g")
    assert float(data[0][1]) == 1.0 / 3.0  # exact double round trip
    with open(out + ".json") as handle:
        sidecar = json.load(handle)
    assert sidecar["seed"] == 42
    assert parse_config(sidecar["config"]) == config


def test_emit_report_row_width_mismatch(tmp_path):
    with pytest.raises(ValueError):
        emit_report([(1.0, 2.0)], {"columns": SCHEMAS["ksweep"]}, str(tmp_path / "bad"))


def test_emit_report_atomic_overwrite(tmp_path):
    out = str(tmp_path / "atomic")
    emit_report([(0.0, 1.0)], {"columns": SCHEMAS["couple"]}, out)
    emit_report([(0.0, 2.0)], {"columns": SCHEMAS["couple"]}, out)
    _, data = read_csv(out + ".csv")
    assert data == [["0", "2"]]
    assert not [f for f in os.listdir(tmp_path) if f.endswith(".tmp")]


def test_reports_byte_identical_across_reruns(tmp_path):
    config = parse_config(SMALL + "\nsweep.k_lo = 2,4\nsweep.k_hi = 4")
    texts = []
    for tag in ("a", "b"):
        rows, metadata = experiment_k_sweep(config)
        metadata["columns"] = SCHEMAS["ksweep"]
        out = str(tmp_path / tag)
        emit_report(rows, metadata, out, config=config)
        with open(out + ".csv") as handle:
            lines = handle.read().splitlines()
        # wall-clock column excluded from the determinism contract
        texts.append([",".join(line.split(",")[:-1]) for line in lines])
    assert texts[0] == texts[1]


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------


def test_kernel_certificates_pass():
    report = kernel_certificates(SoftPotentialParams(-0.5, 0.7), seed=5, samples=40)
    assert report["all_ok"]
    assert report["phase_alignment"]["max_excess"] <= 1e-10
    assert report["inverse_roundtrip"]["max_rel_error"] < 1e-12
