import pytest

from nanbu.config import ExperimentConfig, KSweep, NSweep, config_to_mapping, parse_config
from nanbu.errors import ConfigError
from nanbu.simulation import Gaussian, GaussianMixture, UniformBall

MINIMAL = """
params.gamma = -0.5
params.nu = 0.7
sim.n = 500
sim.k = 8
sim.t = 1
sim.seed = 1
"""


def violations(text) -> str:
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    return str(err.value)


def test_minimal_document_fills_defaults():
    config = parse_config(MINIMAL)
    assert config.base.n == 500
    assert config.base.cutoff.k == 8.0
    assert config.base.params.gamma == -0.5
    assert config.base.initial == Gaussian(mean=(0.0, 0.0, 0.0), variance=1.0)
    assert config.replicas == 1
    assert config.blob_p == 1.2
    assert config.blob_delta == 0.75
    assert config.sweep is None
    assert config.output == "report"
    assert config.moment_order_q == pytest.approx(8.0)


def test_gamma_range_named():
    msg = violations(MINIMAL.replace("params.gamma = -0.5", "params.gamma = -1.2"))
    assert "gamma in (-1,0)" in msg


def test_gamma_nu_sum_named():
    msg = violations(MINIMAL.replace("params.nu = 0.7", "params.nu = 0.4"))
    assert "gamma+nu>0" in msg


def test_unknown_key_rejected():
    msg = violations(MINIMAL + "\nsim.bogus = 3")
    assert "unknown key: sim.bogus" in msg


def test_all_violations_reported_at_once():
    bad = """
    params.gamma = -1.2
    params.nu = 1.5
    sim.n = 1
    sim.k = 0.5
    sim.t = -1
    sim.seed = 1
    replicas = 0
    blob.p = 2.5
    """
    msg = violations(bad)
    for needle in ("gamma in (-1,0)", "nu in (0,1)", "n>=2", "K>=1", "t>=0", "replicas>=1", "p in (1,2)"):
        assert needle in msg, needle


def test_diag_times_window():
    msg = violations(MINIMAL + "\ndiag.times = 0.5,2.0")
    assert "diag.times" in msg
    config = parse_config(MINIMAL + "\ndiag.times = 0.25,0.5,1.0")
    assert config.base.diagnostic_times == (0.25, 0.5, 1.0)


def test_nsweep_parsing_and_reference_gate():
    config = parse_config(MINIMAL + "\nsweep.n_values = 100,400\nsweep.n_ref = 2000\nreplicas = 3")
    assert config.sweep == NSweep(n_values=(100, 400), n_ref=2000)
    msg = violations(MINIMAL + "\nsweep.n_values = 100,4000\nsweep.n_ref = 2000")
    assert "n_ref" in msg


def test_nsweep_moment_hypothesis_gate():
    # q = 6/delta = 6.67 falls short of gamma^2/(gamma+nu) = 16.2, so the
    # particle-count sweep must refuse the configuration by name
    bad = """
params.gamma = -0.9
params.nu = 0.95
sim.n = 100
sim.k = 2
sim.t = 0.5
sim.seed = 1
blob.delta = 0.9
sweep.n_values = 10,20
sweep.n_ref = 50
"""
    msg = violations(bad)
    assert "moment hypothesis" in msg and "gamma^2" in msg


def test_ksweep_parsing_and_ordering():
    config = parse_config(MINIMAL + "\nsweep.k_lo = 2,4,8\nsweep.k_hi = 64")
    assert config.sweep == KSweep(k_lo=(2.0, 4.0, 8.0), k_hi=64.0)
    msg = violations(MINIMAL + "\nsweep.k_lo = 2,128\nsweep.k_hi = 64")
    assert "k_hi" in msg
    # equality allowed: that row couples a system to itself
    config = parse_config(MINIMAL + "\nsweep.k_lo = 2,64\nsweep.k_hi = 64")
    assert config.sweep.k_hi == 64.0


def test_both_sweeps_rejected():
    msg = violations(MINIMAL + "\nsweep.k_lo = 2\nsweep.k_hi = 4\nsweep.n_values = 10\nsweep.n_ref = 20")
    assert "not both" in msg


def test_mixture_and_ball_laws_parse():
    config = parse_config(
        MINIMAL + "\ninit.kind = gaussian_mixture\ninit.components = 0.25:0,0,0:1; 0.75:2,0,0:0.5"
    )
    assert isinstance(config.base.initial, GaussianMixture)
    assert config.base.initial.components[1][0] == 0.75
    config = parse_config(MINIMAL + "\ninit.kind = uniform_ball\ninit.radius = 2.5")
    assert config.base.initial == UniformBall(center=(0.0, 0.0, 0.0), radius=2.5)


def test_duplicate_key_rejected():
    msg = violations(MINIMAL + "\nsim.n = 600")
    assert "duplicate key" in msg


def test_mapping_round_trip():
    for extra in ("", "\nsweep.k_lo = 2,4\nsweep.k_hi = 8", "\nsweep.n_values = 10,20\nsweep.n_ref = 40"):
        config = parse_config(MINIMAL + "\ndiag.times = 0.5,1.0" + extra)
        again = parse_config(config_to_mapping(config))
        assert again == config


def test_round_trip_with_mixture():
    config = parse_config(
        MINIMAL + "\ninit.kind = gaussian_mixture\ninit.components = 0.5:0,0,0:1;0.5:1,2,3:0.25"
    )
    assert parse_config(config_to_mapping(config)) == config
