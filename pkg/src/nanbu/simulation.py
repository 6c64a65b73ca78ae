"""Event-driven simulation of the cutoff Nanbu velocity jump process.

The cutoff makes the total jump rate constant, 2*pi*(N-1)*K, whatever the
configuration of velocities. Each event therefore advances an exponential
clock of that rate, picks an ordered pair (i, j) uniformly, draws z uniform
on [0, K] and an azimuth phi uniform on [0, 2*pi), and moves only particle
i by the deviation c(v_i, v_j, z, phi). No thinning and no time
discretization: the chain is simulated exactly.

Randomness comes from counter-based Philox streams split with SeedSequence
spawn keys, so replicas and sweep points get non-overlapping streams that
are reproducible from (seed, path) alone. A single run is strictly
sequential; distinct runs are independent and can execute concurrently.
"""

from __future__ import annotations

import math
import time as _time
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import ConfigError
from .kernel import (
    TWO_PI,
    CutoffLevel,
    SoftPotentialParams,
    _deviation_scalar,
    _phi0_scalar,
    cutoff_value,
)

# ---------------------------------------------------------------------------
# initial laws
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Gaussian:
    """Isotropic gaussian with the given mean and per-component variance.

    Finite entropy and moments of every order, as the convergence theory
    requires of the initial law.
    """

    mean: tuple[float, float, float] = (0.0, 0.0, 0.0)
    variance: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.variance) and self.variance > 0.0):
            raise ConfigError(f"init.variance must be > 0, got {self.variance!r}")
        if len(self.mean) != 3 or not all(math.isfinite(m) for m in self.mean):
            raise ConfigError(f"init.mean must be a finite 3-vector, got {self.mean!r}")


@dataclass(frozen=True)
class GaussianMixture:
    """Finite mixture of isotropic gaussians; weights must sum to one."""

    components: tuple[tuple[float, Gaussian], ...]

    def __post_init__(self):
        if not self.components:
            raise ConfigError("mixture needs at least one component")
        weights = [w for w, _ in self.components]
        if any(w <= 0.0 for w in weights):
            raise ConfigError(f"mixture weights must be positive, got {weights!r}")
        if abs(sum(weights) - 1.0) > 1e-12:
            raise ConfigError(f"mixture weights must sum to 1, got sum {sum(weights)!r}")


@dataclass(frozen=True)
class UniformBall:
    """Uniform law on the ball of the given center and radius."""

    center: tuple[float, float, float] = (0.0, 0.0, 0.0)
    radius: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.radius) and self.radius > 0.0):
            raise ConfigError(f"init.radius must be > 0, got {self.radius!r}")
        if len(self.center) != 3 or not all(math.isfinite(c) for c in self.center):
            raise ConfigError(f"init.mean must be a finite 3-vector, got {self.center!r}")


InitialLaw = Union[Gaussian, GaussianMixture, UniformBall]


# ---------------------------------------------------------------------------
# state and configuration
# ---------------------------------------------------------------------------


@dataclass
class ParticleState:
    """N velocities plus the simulation clock and a per-event counter."""

    velocities: np.ndarray  # (n, 3) float64
    time: float = 0.0
    event_count: int = 0

    @property
    def n(self) -> int:
        return self.velocities.shape[0]

    def copy(self) -> "ParticleState":
        return ParticleState(self.velocities.copy(), self.time, self.event_count)


@dataclass(frozen=True)
class EventRecord:
    """One collision event: clock time, ordered pair, jump coordinates and
    the deviation applied to particle i. |applied_deviation| never exceeds
    the pre-event |v_i - v_j|."""

    time: float
    i: int
    j: int
    z: float
    phi: float
    applied_deviation: np.ndarray


@dataclass(frozen=True)
class SimConfig:
    """Full description of one reproducible run."""

    n: int
    cutoff: CutoffLevel
    horizon: float
    seed: int
    params: SoftPotentialParams
    initial: InitialLaw = field(default_factory=Gaussian)
    diagnostic_times: tuple[float, ...] = ()

    def __post_init__(self):
        problems = []
        if self.n < 2:
            problems.append(f"sim.n >= 2 required, got {self.n}")
        if not (math.isfinite(self.horizon) and self.horizon >= 0.0):
            problems.append(f"sim.t >= 0 required, got {self.horizon!r}")
        times = tuple(float(t) for t in self.diagnostic_times)
        if list(times) != sorted(times):
            problems.append(f"diag.times must be sorted, got {times!r}")
        elif times and (times[0] < 0.0 or times[-1] > self.horizon):
            problems.append(f"diag.times must lie within [0, {self.horizon}], got {times!r}")
        if not (-(2**63) <= int(self.seed) < 2**64):
            problems.append(f"sim.seed must fit in 64 bits, got {self.seed!r}")
        if problems:
            raise ConfigError(problems)
        object.__setattr__(self, "diagnostic_times", times)


@dataclass(frozen=True)
class RunLog:
    """Summary statistics of a completed run."""

    events: int
    elapsed_seconds: float
    final_m2: float
    final_m4: float
    final_momentum: tuple[float, float, float]


# ---------------------------------------------------------------------------
# randomness
# ---------------------------------------------------------------------------


def stream(seed: int, *path: int) -> np.random.Generator:
    """Counter-based Philox stream for the given seed and split path.

    Streams with distinct paths never overlap; the same (seed, path) always
    reproduces the same stream. Replica r of sweep point p conventionally
    uses path (p + 1, r, ...), leaving path (0, ...) for reference runs.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=path)))


def sample_initial(law: InitialLaw, n: int, seed_or_rng) -> ParticleState:
    """Draw n i.i.d. velocities from the initial law.

    Accepts either a seed (int) or an already-split Generator, so callers
    embedding the draw in a longer stream can pass their own.
    """
    if n < 2:
        raise ConfigError(f"sim.n >= 2 required, got {n}")
    rng = seed_or_rng if isinstance(seed_or_rng, np.random.Generator) else stream(int(seed_or_rng))
    if isinstance(law, Gaussian):
        vel = rng.normal(size=(n, 3)) * math.sqrt(law.variance) + np.asarray(law.mean)
    elif isinstance(law, GaussianMixture):
        weights = np.array([w for w, _ in law.components])
        idx = rng.choice(len(law.components), size=n, p=weights)
        vel = np.empty((n, 3))
        for k, (_, comp) in enumerate(law.components):
            rows = idx == k
            vel[rows] = rng.normal(size=(int(rows.sum()), 3)) * math.sqrt(comp.variance) + np.asarray(comp.mean)
    elif isinstance(law, UniformBall):
        direction = rng.normal(size=(n, 3))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        radii = law.radius * rng.random(n) ** (1.0 / 3.0)
        vel = direction * radii[:, None] + np.asarray(law.center)
    else:
        raise ConfigError(f"unknown initial law {law!r}")
    return ParticleState(velocities=vel, time=0.0, event_count=0)


# ---------------------------------------------------------------------------
# dynamics
# ---------------------------------------------------------------------------


def total_jump_rate(n: int, cutoff) -> float:
    """Total event rate 2*pi*(n-1)*K; independent of the state, which is the
    property that makes exact event-driven simulation possible."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return TWO_PI * (n - 1) * cutoff_value(cutoff)


def _draw_event(rng: np.random.Generator, n: int, k: float, rate: float):
    """Holding time and event coordinates; the draw order (dt, pair, z, phi)
    is part of the replay contract."""
    dt = rng.exponential(1.0 / rate)
    code = int(rng.integers(0, n * (n - 1)))
    i, rem = divmod(code, n - 1)
    j = rem + (rem >= i)
    z = k * rng.random()
    phi = TWO_PI * rng.random()
    return dt, i, j, z, phi


def step(
    state: ParticleState,
    rng: np.random.Generator,
    params: SoftPotentialParams,
    cutoff,
) -> tuple[ParticleState, EventRecord]:
    """Advance the chain by exactly one collision event.

    Only particle i changes; time moves by an Exp(2*pi*(N-1)*K) holding
    time. The input state is left untouched.
    """
    n = state.n
    if n < 2:
        raise ValueError("stepping needs at least two particles")
    k = cutoff_value(cutoff)
    rate = total_jump_rate(n, k)
    dt, i, j, z, phi = _draw_event(rng, n, k, rate)
    vel = state.velocities
    dev = _deviation_scalar(
        float(vel[i, 0]) - float(vel[j, 0]),
        float(vel[i, 1]) - float(vel[j, 1]),
        float(vel[i, 2]) - float(vel[j, 2]),
        z,
        phi,
        -params.gamma,
        -1.0 / params.nu,
        params.nu,
        params.pow_half_pi,
    )
    out = vel.copy()
    out[i, 0] += dev[0]
    out[i, 1] += dev[1]
    out[i, 2] += dev[2]
    new_state = ParticleState(out, state.time + dt, state.event_count + 1)
    record = EventRecord(new_state.time, i, j, z, phi, np.array(dev))
    return new_state, record


def run(config: SimConfig, rng: np.random.Generator | None = None):
    """Simulate one trajectory over [0, horizon].

    Returns (snapshots, log): one ParticleState per diagnostic time holding
    the state after every event with event time <= t (cadlag convention),
    plus summary statistics. Bit-identical under identical config and seed;
    the event sequence coincides with repeated step() on the same stream.
    """
    if rng is None:
        rng = stream(config.seed)
    wall_start = _time.perf_counter()
    state = sample_initial(config.initial, config.n, rng)
    vel = state.velocities
    n = config.n
    k = cutoff_value(config.cutoff)
    rate = total_jump_rate(n, k)
    neg_gamma = -config.params.gamma
    inv_nu = -1.0 / config.params.nu
    nu = config.params.nu
    whp = config.params.pow_half_pi
    horizon = float(config.horizon)

    pending = list(config.diagnostic_times)
    pending.reverse()  # pop() yields ascending times
    snapshots: list[ParticleState] = []
    t = 0.0
    events = 0
    while True:
        t_event = t + rng.exponential(1.0 / rate)
        if t_event > horizon:
            break
        while pending and pending[-1] < t_event:
            snapshots.append(ParticleState(vel.copy(), pending.pop(), events))
        code = int(rng.integers(0, n * (n - 1)))
        i, rem = divmod(code, n - 1)
        j = rem + (rem >= i)
        z = k * rng.random()
        phi = TWO_PI * rng.random()
        dx, dy, dz = _deviation_scalar(
            float(vel[i, 0]) - float(vel[j, 0]),
            float(vel[i, 1]) - float(vel[j, 1]),
            float(vel[i, 2]) - float(vel[j, 2]),
            z,
            phi,
            neg_gamma,
            inv_nu,
            nu,
            whp,
        )
        vel[i, 0] += dx
        vel[i, 1] += dy
        vel[i, 2] += dz
        t = t_event
        events += 1
    while pending:
        snapshots.append(ParticleState(vel.copy(), pending.pop(), events))

    speeds_sq = np.einsum("ij,ij->i", vel, vel)
    log = RunLog(
        events=events,
        elapsed_seconds=_time.perf_counter() - wall_start,
        final_m2=float(speeds_sq.mean()),
        final_m4=float((speeds_sq**2).mean()),
        final_momentum=tuple(vel.mean(axis=0)),
    )
    return snapshots, log


def coupled_run(
    config: SimConfig,
    cutoff_lo,
    cutoff_hi,
    rng: np.random.Generator | None = None,
):
    """Common-randomness coupling of two systems at cutoff levels K_lo <= K_hi.

    Both systems share the initial draw and one event stream generated at
    the high rate 2*pi*(N-1)*K_hi. Every event updates the high system; the
    low system reacts only when z <= K_lo, applying the deviation at its own
    velocities with azimuth phi + phi0(rel_hi, rel_lo), the phase shift that
    keeps the two deviation vectors aligned. Thinning makes the low system
    an exact K_lo chain in law, while the shared randomness isolates the
    cutoff error.

    Returns (snapshots, distances): pairs (state_hi, state_lo) at the
    diagnostic times and the matching series of (t, D(t)) with
    D = mean_i |v_i_hi - v_i_lo|^2.
    """
    k_lo = cutoff_value(cutoff_lo)
    k_hi = cutoff_value(cutoff_hi)
    if k_lo > k_hi:
        raise ConfigError(f"cutoff ordering violated: k_lo={k_lo} > k_hi={k_hi}")
    if rng is None:
        rng = stream(config.seed)
    state = sample_initial(config.initial, config.n, rng)
    vel_hi = state.velocities
    vel_lo = vel_hi.copy()
    n = config.n
    rate = total_jump_rate(n, k_hi)
    neg_gamma = -config.params.gamma
    inv_nu = -1.0 / config.params.nu
    nu = config.params.nu
    whp = config.params.pow_half_pi
    horizon = float(config.horizon)

    def mean_sq_gap() -> float:
        diff = vel_hi - vel_lo
        return float(np.einsum("ij,ij->i", diff, diff).mean())

    pending = list(config.diagnostic_times)
    pending.reverse()
    snapshots: list[tuple[ParticleState, ParticleState]] = []
    distances: list[tuple[float, float]] = []
    t = 0.0
    events = 0

    def emit(at: float) -> None:
        snapshots.append(
            (ParticleState(vel_hi.copy(), at, events), ParticleState(vel_lo.copy(), at, events))
        )
        distances.append((at, mean_sq_gap()))

    while True:
        t_event = t + rng.exponential(1.0 / rate)
        if t_event > horizon:
            break
        while pending and pending[-1] < t_event:
            emit(pending.pop())
        code = int(rng.integers(0, n * (n - 1)))
        i, rem = divmod(code, n - 1)
        j = rem + (rem >= i)
        z = k_hi * rng.random()
        phi = TWO_PI * rng.random()
        hx = float(vel_hi[i, 0]) - float(vel_hi[j, 0])
        hy = float(vel_hi[i, 1]) - float(vel_hi[j, 1])
        hz = float(vel_hi[i, 2]) - float(vel_hi[j, 2])
        if z <= k_lo:
            lx = float(vel_lo[i, 0]) - float(vel_lo[j, 0])
            ly = float(vel_lo[i, 1]) - float(vel_lo[j, 1])
            lz = float(vel_lo[i, 2]) - float(vel_lo[j, 2])
            phi_lo = phi + _phi0_scalar(hx, hy, hz, lx, ly, lz)
            dx, dy, dz = _deviation_scalar(lx, ly, lz, z, phi_lo, neg_gamma, inv_nu, nu, whp)
            vel_lo[i, 0] += dx
            vel_lo[i, 1] += dy
            vel_lo[i, 2] += dz
        dx, dy, dz = _deviation_scalar(hx, hy, hz, z, phi, neg_gamma, inv_nu, nu, whp)
        vel_hi[i, 0] += dx
        vel_hi[i, 1] += dy
        vel_hi[i, 2] += dz
        t = t_event
        events += 1
    while pending:
        emit(pending.pop())
    return snapshots, distances
