"""Empirical-measure diagnostics.

Exact Wasserstein-2 between equal-size point clouds (optimal assignment),
plain moments, mollified "blob" L^p norms on a midpoint grid, the two-term
cube-occupancy upper bound for those norms, and two closed-form constants
used to validate parameter choices. Everything here is pure and
thread-safe; the assignment solver allocates per-call scratch only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from .errors import ConfigError, NumericalError

__all__ = [
    "EmpiricalMeasure",
    "BlobSpec",
    "wasserstein2",
    "moment",
    "conserved_stats",
    "blob_lp_norm",
    "blob_lp_bound",
    "norm_constant_c",
    "p_zero",
]


@dataclass(frozen=True)
class EmpiricalMeasure:
    """Point cloud carrying uniform weights 1/N."""

    points: np.ndarray  # (n, 3) float64

    def __post_init__(self):
        pts = np.ascontiguousarray(np.asarray(self.points, dtype=float))
        if pts.ndim != 2 or pts.shape[1] != 3 or pts.shape[0] < 1:
            raise ValueError(f"points must have shape (n>=1, 3), got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @classmethod
    def from_state(cls, state) -> "EmpiricalMeasure":
        return cls(state.velocities)


@dataclass(frozen=True)
class BlobSpec:
    """Mollification parameters: ball radius epsilon in (0, 1], norm order
    p in (1, 2) and the ball-growth exponent delta in (0, 1).

    The indicator mollifier is 3/(4*pi*eps^3) on the epsilon-ball; r denotes
    the conjugate exponent p/(p-1). For N points the standard radius choice
    is epsilon_N = N^(-(1-delta)/3).
    """

    epsilon: float
    p: float
    delta: float

    def __post_init__(self):
        problems = []
        if not (0.0 < self.epsilon <= 1.0):
            problems.append(f"blob epsilon must lie in (0, 1], got {self.epsilon!r}")
        if not (1.0 < self.p < 2.0):
            problems.append(f"blob.p must lie in (1, 2), got {self.p!r}")
        if not (0.0 < self.delta < 1.0):
            problems.append(f"blob.delta must lie in (0, 1), got {self.delta!r}")
        if problems:
            raise ConfigError(problems)

    @property
    def r(self) -> float:
        return self.p / (self.p - 1.0)

    @staticmethod
    def radius_for(n: int, delta: float) -> float:
        return float(n) ** (-(1.0 - delta) / 3.0)


# ---------------------------------------------------------------------------
# transport distance and moments
# ---------------------------------------------------------------------------


def wasserstein2(a: EmpiricalMeasure, b: EmpiricalMeasure) -> float:
    """Wasserstein-2 distance between equal-size uniform clouds.

    For equal sizes the optimal coupling is an assignment, solved exactly by
    the shortest-augmenting-path solver on squared euclidean costs. Matched
    costs are summed in sorted order so the value is exactly symmetric in
    its arguments. Zero iff the clouds agree as multisets.
    """
    if a.n != b.n:
        raise ValueError(f"cloud sizes differ: {a.n} != {b.n}")
    cost = cdist(a.points, b.points, "sqeuclidean")
    rows, cols = linear_sum_assignment(cost)
    matched = np.sort(cost[rows, cols])
    return math.sqrt(float(np.sum(matched)) / a.n)


def moment(m: EmpiricalMeasure, q: float) -> float:
    """q-th absolute moment N^-1 sum |v_i|^q for q > 0."""
    if not q > 0.0:
        raise ValueError(f"moment order must be positive, got {q!r}")
    speeds = np.linalg.norm(m.points, axis=1)
    return float(np.mean(speeds**q))


def conserved_stats(m: EmpiricalMeasure) -> tuple[np.ndarray, float]:
    """(momentum, energy) = (N^-1 sum v_i, N^-1 sum |v_i|^2); both are
    conserved in expectation by the collision dynamics. energy is computed
    as moment(m, 2), float for float."""
    momentum = m.points.mean(axis=0)
    return momentum, moment(m, 2.0)


# ---------------------------------------------------------------------------
# blob (mollified) L^p norms
# ---------------------------------------------------------------------------


def _grid_norm(points: np.ndarray, eps: float, p: float, refine: int) -> float:
    """Midpoint-grid L^p norm of the mollified density at cell side eps/refine.

    The density is piecewise constant on the arrangement of epsilon-balls,
    so it suffices to count, for every grid cell whose center lies within
    eps of some point, how many balls cover that center.
    """
    h = eps / refine
    n = points.shape[0]
    reach = int(math.floor(eps / h)) + 1
    offs = np.arange(-reach, reach + 1)
    lattice = np.stack(np.meshgrid(offs, offs, offs, indexing="ij"), axis=-1).reshape(-1, 3)

    base = np.floor(points / h - 0.5).astype(np.int64)  # cell whose center is nearest from below
    cells = base[:, None, :] + lattice[None, :, :]  # (n, m, 3)
    centers = (cells + 0.5) * h
    within = np.einsum("nmk,nmk->nm", centers - points[:, None, :], centers - points[:, None, :]) <= eps * eps
    occupied = cells[within]
    _, counts = np.unique(occupied, axis=0, return_counts=True)
    scale = 3.0 / (4.0 * math.pi * eps**3 * n)
    total = float(np.sum((counts * scale) ** p)) * h**3
    return total ** (1.0 / p)


def blob_lp_norm(m: EmpiricalMeasure, spec: BlobSpec, grid_refine: int = 4) -> float:
    """Numerical L^p norm of the cloud mollified by the epsilon-ball indicator.

    Midpoint quadrature on an origin-anchored cubic grid of cell side
    epsilon/grid_refine. Two successive refinements must agree to 2% before
    a value is accepted; the finer value is returned. If the pair at
    (grid_refine, 2*grid_refine) disagrees, refinement escalates by doubling
    (at most twice more) before raising NumericalError with diagnostics.
    """
    if grid_refine < 2:
        raise ValueError(f"grid_refine must be >= 2, got {grid_refine}")
    refine = int(grid_refine)
    coarse = _grid_norm(m.points, spec.epsilon, spec.p, refine)
    history = [(refine, coarse)]
    for _ in range(3):
        fine = _grid_norm(m.points, spec.epsilon, spec.p, 2 * refine)
        history.append((2 * refine, fine))
        if abs(fine - coarse) <= 0.02 * abs(fine):
            return fine
        refine *= 2
        coarse = fine
    raise NumericalError(
        "blob norm grid did not converge to 2%: "
        + ", ".join(f"refine {r}: {v:.6g}" for r, v in history)
    )


def blob_lp_bound(
    x_cloud: EmpiricalMeasure,
    y_cloud: EmpiricalMeasure,
    spec: BlobSpec,
) -> float:
    """Two-term upper bound for blob_lp_norm(y_cloud) via cube occupancies
    of the companion cloud x.

    Requires equal sizes and every point of both clouds inside the ball of
    radius N^(delta/3). With I = {i : |x_i - y_i| > eps} and counts over the
    origin-anchored partition into cubes of side eps (every occupied cube
    meets the ball since the points lie inside it), the bound is

        (3/(4 pi))^(1/r) * #I / (N eps^(3/r))
        + 3375 * (N^-p eps^(-3(p-1)) * sum_D count_D^p)^(1/p).
    """
    if x_cloud.n != y_cloud.n:
        raise ValueError(f"cloud sizes differ: {x_cloud.n} != {y_cloud.n}")
    n = x_cloud.n
    ball = float(n) ** (spec.delta / 3.0)
    for name, cloud in (("x", x_cloud), ("y", y_cloud)):
        radii = np.linalg.norm(cloud.points, axis=1)
        outside = np.nonzero(radii > ball)[0]
        if outside.size:
            idx = int(outside[0])
            raise ValueError(
                f"{name}[{idx}] lies outside B(0, N^(delta/3)={ball:.6g}): |v|={radii[idx]:.6g}"
            )
    eps = spec.epsilon
    p = spec.p
    mismatched = int(np.sum(np.linalg.norm(x_cloud.points - y_cloud.points, axis=1) > eps))
    term1 = (3.0 / (4.0 * math.pi)) ** (1.0 / spec.r) * mismatched / (n * eps ** (3.0 / spec.r))
    cubes = np.floor(x_cloud.points / eps).astype(np.int64)
    _, counts = np.unique(cubes, axis=0, return_counts=True)
    occupancy = float(np.sum(counts.astype(float) ** p))
    term2 = 3375.0 * (n ** (-p) * eps ** (-3.0 * (p - 1.0)) * occupancy) ** (1.0 / p)
    return term1 + term2


# ---------------------------------------------------------------------------
# closed-form constants
# ---------------------------------------------------------------------------


def norm_constant_c(gamma: float, p: float) -> float:
    """Constant relating the gamma-weighted potential to an L^p norm:
    the L^(p/(p-1)) norm over the unit ball of |u|^gamma.

    Closed form (4*pi/(s+3))^((p-1)/p) with s = p*gamma/(p-1); finite
    exactly when p > 3/(3+gamma).
    """
    if not -3.0 < gamma <= 0.0:
        raise ValueError(f"gamma must lie in (-3, 0], got {gamma!r}")
    if not p > 3.0 / (3.0 + gamma):
        raise ValueError(f"p > 3/(3+gamma) = {3.0 / (3.0 + gamma)!r} required, got p={p!r}")
    s = p * gamma / (p - 1.0)
    return (4.0 * math.pi / (s + 3.0)) ** ((p - 1.0) / p)


def p_zero(gamma: float, nu: float, q: float) -> float:
    """Upper end p0 of the admissible L^p integrability window for a
    q-moment initial law: (q - gamma) / (q(3-nu)/3 - gamma).

    Requires q >= 2 and q > gamma^2/(gamma+nu); the result then lies in
    (3/(3+gamma), 3/(3-nu)), which is asserted.
    """
    problems = []
    if not -1.0 < gamma < 0.0:
        problems.append(f"gamma in (-1,0) violated (got {gamma!r})")
    if not 0.0 < nu < 1.0:
        problems.append(f"nu in (0,1) violated (got {nu!r})")
    if not problems and not gamma + nu > 0.0:
        problems.append(f"gamma+nu>0 violated (got {gamma + nu!r})")
    if not q >= 2.0:
        problems.append(f"q>=2 violated (got {q!r})")
    if not problems:
        threshold = gamma**2 / (gamma + nu)
        if not q > threshold:
            problems.append(f"q>gamma^2/(gamma+nu)={threshold!r} violated (got q={q!r})")
    if problems:
        raise ConfigError(problems)
    p0 = (q - gamma) / (q * (3.0 - nu) / 3.0 - gamma)
    lo, hi = 3.0 / (3.0 + gamma), 3.0 / (3.0 - nu)
    if not lo < p0 < hi:
        raise NumericalError(f"p0={p0!r} escaped ({lo!r}, {hi!r})")
    return p0
