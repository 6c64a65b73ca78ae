"""Experiment configuration: flat key=value documents, validation, round trip.

The document format is one dotted key per line, `#` starts a comment:

    params.gamma = -0.5
    params.nu    = 0.7
    sim.n        = 500
    sim.k        = 8
    sim.t        = 1.0
    sim.seed     = 1
    init.kind    = gaussian          # gaussian | gaussian_mixture | uniform_ball
    init.mean    = 0,0,0
    init.variance = 1.0
    diag.times   = 0.25,0.5,1.0

Sweeps add `sweep.n_values` + `sweep.n_ref` (particle-count sweep) or
`sweep.k_lo` + `sweep.k_hi` (coupled-cutoff sweep), plus `replicas`.
`blob.p` / `blob.delta` control the mollified-norm diagnostics
(delta doubles as 6/q for the moment hypothesis q = 6/delta), `init.radius`
configures uniform_ball, `init.components` a mixture as
`w:mx,my,mz:var;...`, and `output` the report base path.

Parsing is strict: unknown keys are rejected, and validation reports every
violated constraint at once, each naming the inequality it checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Union

from .errors import ConfigError
from .kernel import CutoffLevel, SoftPotentialParams
from .metrics import p_zero
from .simulation import Gaussian, GaussianMixture, InitialLaw, SimConfig, UniformBall

KNOWN_KEYS = (
    "params.gamma",
    "params.nu",
    "sim.n",
    "sim.k",
    "sim.t",
    "sim.seed",
    "init.kind",
    "init.mean",
    "init.variance",
    "init.radius",
    "init.components",
    "diag.times",
    "sweep.n_values",
    "sweep.k_lo",
    "sweep.k_hi",
    "sweep.n_ref",
    "replicas",
    "blob.p",
    "blob.delta",
    "output",
)

DEFAULTS = {
    "init.kind": "gaussian",
    "init.mean": "0,0,0",
    "init.variance": "1.0",
    "blob.p": "1.2",
    "blob.delta": "0.75",
    "replicas": "1",
    "output": "report",
}


@dataclass(frozen=True)
class NSweep:
    """Particle-count sweep against one high-resolution reference run."""

    n_values: tuple[int, ...]
    n_ref: int


@dataclass(frozen=True)
class KSweep:
    """Coupled-cutoff sweep: low levels against one shared high level."""

    k_lo: tuple[float, ...]
    k_hi: float


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce an experiment byte for byte."""

    base: SimConfig
    sweep: Union[NSweep, KSweep, None]
    replicas: int
    blob_p: float
    blob_delta: float
    output: str

    @property
    def moment_order_q(self) -> float:
        """Moment hypothesis order implied by delta = 6/q."""
        return 6.0 / self.blob_delta


def _parse_floats(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok.strip() != ""]


def _parse_vec3(text: str) -> tuple[float, float, float]:
    vals = _parse_floats(text)
    if len(vals) != 3:
        raise ValueError(f"expected 3 components, got {len(vals)}")
    return tuple(vals)


def _document_to_mapping(text: str) -> dict[str, str]:
    mapping: dict[str, str] = {}
    problems = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            problems.append(f"line {lineno}: expected key = value, got {raw.strip()!r}")
            continue
        key, value = (part.strip() for part in line.split("=", 1))
        if key in mapping:
            problems.append(f"line {lineno}: duplicate key {key!r}")
        mapping[key] = value
    if problems:
        raise ConfigError(problems)
    return mapping


def _build_initial(doc: Mapping[str, str], problems: list[str]) -> InitialLaw | None:
    kind = doc.get("init.kind", DEFAULTS["init.kind"])
    try:
        if kind == "gaussian":
            return Gaussian(
                mean=_parse_vec3(doc.get("init.mean", DEFAULTS["init.mean"])),
                variance=float(doc.get("init.variance", DEFAULTS["init.variance"])),
            )
        if kind == "uniform_ball":
            return UniformBall(
                center=_parse_vec3(doc.get("init.mean", DEFAULTS["init.mean"])),
                radius=float(doc.get("init.radius", "1.0")),
            )
        if kind == "gaussian_mixture":
            spec = doc.get("init.components", "")
            comps = []
            for part in spec.split(";"):
                part = part.strip()
                if not part:
                    continue
                w, mean, var = part.split(":")
                comps.append((float(w), Gaussian(mean=_parse_vec3(mean), variance=float(var))))
            return GaussianMixture(components=tuple(comps))
        problems.append(
            f"init.kind must be one of gaussian, gaussian_mixture, uniform_ball; got {kind!r}"
        )
    except ConfigError as exc:
        problems.extend(exc.violations)
    except ValueError as exc:
        problems.append(f"init.*: {exc}")
    return None


def parse_config(source: Union[str, Mapping[str, str]]) -> ExperimentConfig:
    """Parse and fully validate a configuration document or mapping.

    Raises ConfigError carrying every violated constraint; on success all
    defaults are filled in.
    """
    doc = dict(source) if isinstance(source, Mapping) else _document_to_mapping(source)
    problems: list[str] = []

    unknown = sorted(set(doc) - set(KNOWN_KEYS))
    for key in unknown:
        problems.append(f"unknown key: {key}")

    def grab(key: str, conv, required=True, default=None):
        raw = doc.get(key, DEFAULTS.get(key, default))
        if raw is None:
            if required:
                problems.append(f"missing required key: {key}")
            return None
        try:
            return conv(raw)
        except (TypeError, ValueError) as exc:
            problems.append(f"{key}: cannot parse {raw!r} ({exc})")
            return None

    gamma = grab("params.gamma", float)
    nu = grab("params.nu", float)
    n = grab("sim.n", lambda s: int(float(s)))
    k = grab("sim.k", float)
    horizon = grab("sim.t", float)
    seed = grab("sim.seed", lambda s: int(s, 0))
    replicas = grab("replicas", lambda s: int(float(s)))
    blob_p = grab("blob.p", float)
    blob_delta = grab("blob.delta", float)
    output = doc.get("output", DEFAULTS["output"])
    diag = grab("diag.times", _parse_floats, required=False)

    params = None
    if gamma is not None and nu is not None:
        if not -1.0 < gamma < 0.0:
            problems.append(f"params.gamma: gamma in (-1,0) violated (got {gamma})")
        if not 0.0 < nu < 1.0:
            problems.append(f"params.nu: nu in (0,1) violated (got {nu})")
        if -1.0 < gamma < 0.0 and 0.0 < nu < 1.0:
            if gamma + nu > 0.0:
                params = SoftPotentialParams(gamma=gamma, nu=nu)
            else:
                problems.append(f"params: gamma+nu>0 violated (got {gamma + nu})")

    cutoff = None
    if k is not None:
        if math.isfinite(k) and k >= 1.0:
            cutoff = CutoffLevel(k=k)
        else:
            problems.append(f"sim.k: K>=1 violated (got {k})")

    if n is not None and n < 2:
        problems.append(f"sim.n: n>=2 violated (got {n})")
    if horizon is not None and not (math.isfinite(horizon) and horizon >= 0.0):
        problems.append(f"sim.t: t>=0 violated (got {horizon})")
    if replicas is not None and replicas < 1:
        problems.append(f"replicas: replicas>=1 violated (got {replicas})")
    if blob_p is not None and not 1.0 < blob_p < 2.0:
        problems.append(f"blob.p: p in (1,2) violated (got {blob_p})")
    if blob_delta is not None and not 0.0 < blob_delta < 1.0:
        problems.append(f"blob.delta: delta in (0,1) violated (got {blob_delta})")

    initial = _build_initial(doc, problems)

    diag_times = tuple(diag) if diag else ()
    if diag and horizon is not None:
        if list(diag) != sorted(diag):
            problems.append(f"diag.times: must be sorted (got {diag})")
        elif diag[0] < 0.0 or diag[-1] > horizon:
            problems.append(f"diag.times: must lie within [0, {horizon}] (got {diag})")

    sweep: Union[NSweep, KSweep, None] = None
    has_n = "sweep.n_values" in doc or "sweep.n_ref" in doc
    has_k = "sweep.k_lo" in doc or "sweep.k_hi" in doc
    if has_n and has_k:
        problems.append("sweep: configure either n_values/n_ref or k_lo/k_hi, not both")
    elif has_n:
        n_values = grab("sweep.n_values", lambda s: tuple(int(float(v)) for v in _parse_floats(s)))
        n_ref = grab("sweep.n_ref", lambda s: int(float(s)))
        if n_values is not None and n_ref is not None:
            if not n_values:
                problems.append("sweep.n_values: nonempty list required")
            elif list(n_values) != sorted(set(n_values)):
                problems.append(f"sweep.n_values: strictly increasing list required (got {n_values})")
            elif n_ref < max(n_values):
                problems.append(
                    f"sweep.n_ref: n_ref >= max(n_values) violated (got {n_ref} < {max(n_values)})"
                )
            elif min(n_values) < 2:
                problems.append(f"sweep.n_values: n>=2 violated (got {min(n_values)})")
            else:
                sweep = NSweep(n_values=n_values, n_ref=n_ref)
            if gamma is not None and nu is not None and blob_delta and 0.0 < blob_delta < 1.0:
                try:
                    p_zero(gamma, nu, 6.0 / blob_delta)
                except ConfigError as exc:
                    problems.extend(f"moment hypothesis (q=6/delta): {v}" for v in exc.violations)
    elif has_k:
        k_lo = grab("sweep.k_lo", lambda s: tuple(_parse_floats(s)))
        k_hi = grab("sweep.k_hi", float)
        if k_lo is not None and k_hi is not None:
            if not k_lo:
                problems.append("sweep.k_lo: nonempty list required")
            elif list(k_lo) != sorted(set(k_lo)):
                problems.append(f"sweep.k_lo: strictly increasing list required (got {k_lo})")
            elif min(k_lo) < 1.0:
                problems.append(f"sweep.k_lo: K>=1 violated (got {min(k_lo)})")
            elif k_hi < max(k_lo):
                problems.append(
                    f"sweep.k_hi: k_hi >= max(k_lo) violated (got {k_hi} < {max(k_lo)})"
                )
            else:
                sweep = KSweep(k_lo=k_lo, k_hi=k_hi)

    if problems:
        raise ConfigError(problems)

    base = SimConfig(
        n=n,
        cutoff=cutoff,
        horizon=horizon,
        seed=seed,
        params=params,
        initial=initial,
        diagnostic_times=diag_times,
    )
    return ExperimentConfig(
        base=base,
        sweep=sweep,
        replicas=replicas,
        blob_p=blob_p,
        blob_delta=blob_delta,
        output=output,
    )


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def config_to_mapping(config: ExperimentConfig) -> dict[str, str]:
    """Canonical mapping representation; parse_config inverts it exactly."""
    base = config.base
    doc = {
        "params.gamma": _fmt(base.params.gamma),
        "params.nu": _fmt(base.params.nu),
        "sim.n": str(base.n),
        "sim.k": _fmt(base.cutoff.k),
        "sim.t": _fmt(base.horizon),
        "sim.seed": str(base.seed),
        "replicas": str(config.replicas),
        "blob.p": _fmt(config.blob_p),
        "blob.delta": _fmt(config.blob_delta),
        "output": config.output,
    }
    law = base.initial
    if isinstance(law, Gaussian):
        doc["init.kind"] = "gaussian"
        doc["init.mean"] = ",".join(_fmt(c) for c in law.mean)
        doc["init.variance"] = _fmt(law.variance)
    elif isinstance(law, UniformBall):
        doc["init.kind"] = "uniform_ball"
        doc["init.mean"] = ",".join(_fmt(c) for c in law.center)
        doc["init.radius"] = _fmt(law.radius)
    elif isinstance(law, GaussianMixture):
        doc["init.kind"] = "gaussian_mixture"
        doc["init.components"] = ";".join(
            f"{_fmt(w)}:{','.join(_fmt(c) for c in g.mean)}:{_fmt(g.variance)}"
            for w, g in law.components
        )
    if base.diagnostic_times:
        doc["diag.times"] = ",".join(_fmt(t) for t in base.diagnostic_times)
    if isinstance(config.sweep, NSweep):
        doc["sweep.n_values"] = ",".join(str(v) for v in config.sweep.n_values)
        doc["sweep.n_ref"] = str(config.sweep.n_ref)
    elif isinstance(config.sweep, KSweep):
        doc["sweep.k_lo"] = ",".join(_fmt(v) for v in config.sweep.k_lo)
        doc["sweep.k_hi"] = _fmt(config.sweep.k_hi)
    return doc
