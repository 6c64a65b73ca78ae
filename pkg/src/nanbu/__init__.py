"""Event-driven Nanbu particle simulator for the spatially homogeneous
Boltzmann equation with moderately soft potentials, plus the collision
kernel mathematics, a common-randomness cutoff coupling and
empirical-measure diagnostics."""

__version__ = "0.1.0"

from .errors import ConfigError, NumericalError
from .kernel import (
    CutoffLevel,
    Frame,
    SoftPotentialParams,
    angular_g,
    angular_h,
    angular_moments,
    cutoff_mass_ratios,
    deviation_a,
    deviation_c,
    deviation_phi_integral,
    deviation_sq_phi_integral,
    frame_vectors,
    g_difference_integral,
    g_difference_ratio,
    g_envelope_constants,
    gamma_vec,
    orthonormal_frame,
    tanaka_phi0,
)
from .metrics import (
    BlobSpec,
    EmpiricalMeasure,
    blob_lp_bound,
    blob_lp_norm,
    conserved_stats,
    moment,
    norm_constant_c,
    p_zero,
    wasserstein2,
)
from .simulation import (
    EventRecord,
    Gaussian,
    GaussianMixture,
    InitialLaw,
    ParticleState,
    RunLog,
    SimConfig,
    UniformBall,
    coupled_run,
    run,
    sample_initial,
    step,
    stream,
    total_jump_rate,
)
from .config import ExperimentConfig, KSweep, NSweep, config_to_mapping, parse_config
from .harness import (
    ReportRow,
    couple_series,
    emit_report,
    experiment_k_sweep,
    experiment_n_sweep,
    kernel_certificates,
    simulate_series,
)

__all__ = [name for name in dir() if not name.startswith("_")]
