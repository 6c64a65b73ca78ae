"""Collision geometry for moderately soft potentials with an angular cutoff.

The angular collision density is the concrete power law
beta(theta) = theta^(-1-nu) on (0, pi/2] and 0 beyond, which gives closed
forms for its tail integral H and the inverse map G. Deviation vectors are
built from a deterministic orthonormal frame attached to the relative
velocity; the z-parameterized form G(z / |v-v*|^gamma) removes the velocity
dependence from the jump rate, which is what makes the cutoff particle
system exactly simulable. The module also provides the azimuthal phase
alignment used to couple two systems, the angular moment integrals of the
cutoff/tail jump mass, and quadrature certificates for the integral bounds
the simulation relies on.

All functions are pure and safe to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .quadrature import adaptive_simpson, integrate_with_tail

TWO_PI = 2.0 * math.pi
HALF_PI = 0.5 * math.pi

Vec3 = np.ndarray  # shape (3,), float64, all components finite


@dataclass(frozen=True)
class SoftPotentialParams:
    """Exponent pair of the kernel |v-v*|^gamma * theta^(-1-nu).

    gamma in (-1, 0), nu in (0, 1) and gamma + nu > 0; construction rejects
    anything else. The derived tail integral H and its inverse G are then
    strictly monotone and available in closed form.
    """

    gamma: float
    nu: float

    def __post_init__(self):
        g, n = self.gamma, self.nu
        if not (math.isfinite(g) and -1.0 < g < 0.0):
            raise ValueError(f"gamma must lie in (-1, 0), got {g!r}")
        if not (math.isfinite(n) and 0.0 < n < 1.0):
            raise ValueError(f"nu must lie in (0, 1), got {n!r}")
        if not g + n > 0.0:
            raise ValueError(f"gamma+nu>0 required, got gamma+nu={g + n!r}")

    @property
    def pow_half_pi(self) -> float:
        """(pi/2)^(-nu), the integration constant of H and G."""
        return HALF_PI ** (-self.nu)


@dataclass(frozen=True)
class CutoffLevel:
    """Truncation level K >= 1 of the z-parameterized jump measure."""

    k: float

    def __post_init__(self):
        if not (math.isfinite(self.k) and self.k >= 1.0):
            raise ValueError(f"cutoff level must be finite and >= 1, got {self.k!r}")


def cutoff_value(cutoff) -> float:
    """Coerce a CutoffLevel or bare positive number to a float level.

    Bare numbers below 1 are accepted here so the angular moment integrals
    can be probed in the K -> 0 limit; simulation configs always go through
    CutoffLevel and keep the K >= 1 contract.
    """
    if isinstance(cutoff, CutoffLevel):
        return cutoff.k
    k = float(cutoff)
    if not (math.isfinite(k) and k > 0.0):
        raise ValueError(f"cutoff must be finite and positive, got {cutoff!r}")
    return k


@dataclass(frozen=True)
class Frame:
    """Orthogonal pair (i_vec, j_vec), each perpendicular to the source
    vector and of the same length, so that (x/|x|, i_vec/|x|, j_vec/|x|)
    is a right-handed orthonormal basis."""

    i_vec: Vec3
    j_vec: Vec3


# ---------------------------------------------------------------------------
# angular law
# ---------------------------------------------------------------------------


def angular_h(theta: float, params: SoftPotentialParams) -> float:
    """Tail mass of the angular density: integral of beta over [theta, pi/2].

    Closed form (theta^(-nu) - (pi/2)^(-nu)) / nu; strictly decreasing with
    angular_h(pi/2) == 0.
    """
    theta = float(theta)
    if not (0.0 < theta <= HALF_PI):
        raise ValueError(f"theta must lie in (0, pi/2], got {theta!r}")
    return (theta ** (-params.nu) - params.pow_half_pi) / params.nu


def angular_g(z: float, params: SoftPotentialParams) -> float:
    """Inverse of angular_h: the deviation angle whose tail mass is z.

    Closed form (nu*z + (pi/2)^(-nu))^(-1/nu), decreasing from pi/2 at z=0.
    """
    z = float(z)
    if not z >= 0.0:
        raise ValueError(f"z must be >= 0, got {z!r}")
    return (params.nu * z + params.pow_half_pi) ** (-1.0 / params.nu)


def g_envelope_constants(params: SoftPotentialParams) -> tuple[float, float]:
    """Constants (c2, c3) with c2*(1+z)^(-1/nu) <= G(z) <= c3*(1+z)^(-1/nu).

    The ratio G(z)*(1+z)^(1/nu) = ((1+z)/(nu*z + (pi/2)^(-nu)))^(1/nu) is
    monotone in z, so its range is pinned by the endpoints pi/2 (at z=0) and
    nu^(-1/nu) (as z -> infinity). Both bounds are attained.
    """
    limit = params.nu ** (-1.0 / params.nu)
    return min(HALF_PI, limit), max(HALF_PI, limit)


# ---------------------------------------------------------------------------
# frames and deviation vectors
# ---------------------------------------------------------------------------


def frame_vectors(xs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Batched frame construction for nonzero vectors of shape (..., 3).

    Pick the coordinate axis e along which x/|x| has the smallest absolute
    component (lowest index on ties), set i = |x| * (x cross e)/|x cross e|
    and j = (x/|x|) cross i. Deterministic and well conditioned: the chosen
    axis keeps |x cross e| >= sqrt(2/3) * |x|.
    """
    xs = np.asarray(xs, dtype=float)
    norms = np.linalg.norm(xs, axis=-1, keepdims=True)
    if not np.all(norms > 0.0):
        raise ValueError("zero vector has no frame")
    axis = np.argmin(np.abs(xs), axis=-1)
    e = np.zeros_like(xs)
    np.put_along_axis(e, axis[..., None], 1.0, axis=-1)
    u = np.cross(xs, e)
    i_vec = u * (norms / np.linalg.norm(u, axis=-1, keepdims=True))
    j_vec = np.cross(xs / norms, i_vec)
    return i_vec, j_vec


def orthonormal_frame(x: Vec3) -> Frame:
    """Frame of a single nonzero vector; same x always yields the same frame."""
    x = np.asarray(x, dtype=float)
    if x.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {x.shape}")
    norm_sq = float(x @ x)
    if norm_sq == 0.0:
        raise ValueError("zero vector has no frame")
    ix, iy, iz, jx, jy, jz = _frame_scalar(
        float(x[0]), float(x[1]), float(x[2]), math.sqrt(norm_sq)
    )
    return Frame(i_vec=np.array([ix, iy, iz]), j_vec=np.array([jx, jy, jz]))


def gamma_vec(x: Vec3, phi) -> np.ndarray:
    """cos(phi)*i_vec + sin(phi)*j_vec: the azimuth-phi vector perpendicular
    to x with |result| = |x|. phi may be a scalar or an array; the result
    broadcasts accordingly and is 2*pi-periodic in phi."""
    x = np.asarray(x, dtype=float)
    frame = orthonormal_frame(x)
    phi = np.asarray(phi, dtype=float)
    c = np.expand_dims(np.cos(phi), -1)
    s = np.expand_dims(np.sin(phi), -1)
    return c * frame.i_vec + s * frame.j_vec


def deviation_a(v: Vec3, v_star: Vec3, theta: float, phi: float) -> Vec3:
    """Post-collisional velocity change of the first particle.

    Equals -(1-cos theta)/2 * (v - v*) + (sin theta)/2 * Gamma(v - v*, phi),
    with magnitude sqrt((1-cos theta)/2) * |v - v*|. Returns exact zero when
    v == v* or theta == 0.
    """
    v = np.asarray(v, dtype=float)
    v_star = np.asarray(v_star, dtype=float)
    rel = v - v_star
    if theta == 0.0 or not np.any(rel):
        return np.zeros(3)
    g = gamma_vec(rel, float(phi))
    return -0.5 * (1.0 - math.cos(theta)) * rel + 0.5 * math.sin(theta) * g


def deviation_c(
    v: Vec3,
    v_star: Vec3,
    z: float,
    phi: float,
    params: SoftPotentialParams,
    cutoff=None,
) -> Vec3:
    """Deviation in the z-parameterization: deviation_a at angle
    G(z / |v-v*|^gamma).

    With a cutoff the deviation is zeroed for z > K (z == K still collides).
    The degenerate pair v == v* maps to the zero deviation, and
    |result| <= |v - v*| always.
    """
    z = float(z)
    if not z >= 0.0:
        raise ValueError(f"z must be >= 0, got {z!r}")
    if cutoff is not None and z > cutoff_value(cutoff):
        return np.zeros(3)
    v = np.asarray(v, dtype=float)
    v_star = np.asarray(v_star, dtype=float)
    rel = v - v_star
    x = math.sqrt(float(rel @ rel))
    if x == 0.0:
        return np.zeros(3)
    theta = angular_g(z * x ** (-params.gamma), params)
    return deviation_a(v, v_star, theta, phi)


def tanaka_phi0(x_vec: Vec3, y_vec: Vec3) -> float:
    """Azimuthal shift phi0 in [0, 2*pi) aligning the frames of two nonzero
    vectors so that |Gamma(X, phi) - Gamma(Y, phi + phi0)| <= |X - Y| for
    every phi.

    The shift maximizes the phi-averaged alignment of the two circle maps:
    phi0 = atan2(B, A) with A = i_X.i_Y + j_X.j_Y and B = i_X.j_Y - j_X.i_Y.
    At that shift the minimum over phi of Gamma(X,phi).Gamma(Y,phi+phi0)
    equals X.Y, so the displayed bound holds with equality at the worst phi.
    """
    x_vec = np.asarray(x_vec, dtype=float)
    y_vec = np.asarray(y_vec, dtype=float)
    if x_vec.shape != (3,) or y_vec.shape != (3,):
        raise ValueError("expected 3-vectors")
    if not (np.any(x_vec) and np.any(y_vec)):
        raise ValueError("zero vector has no frame")
    return _phi0_scalar(
        float(x_vec[0]), float(x_vec[1]), float(x_vec[2]),
        float(y_vec[0]), float(y_vec[1]), float(y_vec[2]),
    )


# ---------------------------------------------------------------------------
# scalar fast paths for the event loop
# ---------------------------------------------------------------------------


def _frame_scalar(dx: float, dy: float, dz: float, x: float):
    """Frame of (dx, dy, dz) with |.| = x > 0, as two float triples."""
    ax, ay, az = abs(dx), abs(dy), abs(dz)
    if ax <= ay and ax <= az:
        ux, uy, uz = 0.0, dz, -dy
    elif ay <= az:
        ux, uy, uz = -dz, 0.0, dx
    else:
        ux, uy, uz = dy, -dx, 0.0
    s = x / math.sqrt(ux * ux + uy * uy + uz * uz)
    ix, iy, iz = ux * s, uy * s, uz * s
    jx = (dy * iz - dz * iy) / x
    jy = (dz * ix - dx * iz) / x
    jz = (dx * iy - dy * ix) / x
    return ix, iy, iz, jx, jy, jz


def _deviation_scalar(
    dx: float,
    dy: float,
    dz: float,
    z: float,
    phi: float,
    neg_gamma: float,
    inv_nu: float,
    nu: float,
    pow_half_pi: float,
):
    """c(v, v*, z, phi) for the relative velocity (dx, dy, dz), as a triple.

    Float-for-float the same construction as deviation_c; kept free of array
    overhead for the per-event hot path.
    """
    x2 = dx * dx + dy * dy + dz * dz
    if x2 == 0.0:
        return 0.0, 0.0, 0.0
    x = math.sqrt(x2)
    theta = (nu * z * x**neg_gamma + pow_half_pi) ** inv_nu
    ix, iy, iz, jx, jy, jz = _frame_scalar(dx, dy, dz, x)
    cp, sp = math.cos(phi), math.sin(phi)
    half_st = 0.5 * math.sin(theta)
    f = -0.5 * (1.0 - math.cos(theta))
    return (
        f * dx + half_st * (cp * ix + sp * jx),
        f * dy + half_st * (cp * iy + sp * jy),
        f * dz + half_st * (cp * iz + sp * jz),
    )


def _phi0_scalar(ax, ay, az, bx, by, bz) -> float:
    """tanaka_phi0 on float triples; returns 0 for degenerate inputs."""
    na2 = ax * ax + ay * ay + az * az
    nb2 = bx * bx + by * by + bz * bz
    if na2 == 0.0 or nb2 == 0.0:
        return 0.0
    ixa, iya, iza, jxa, jya, jza = _frame_scalar(ax, ay, az, math.sqrt(na2))
    ixb, iyb, izb, jxb, jyb, jzb = _frame_scalar(bx, by, bz, math.sqrt(nb2))
    a = ixa * ixb + iya * iyb + iza * izb + jxa * jxb + jya * jyb + jza * jzb
    b = ixa * jxb + iya * jyb + iza * jzb - (jxa * ixb + jya * iyb + jza * izb)
    return math.atan2(b, a) % TWO_PI


# ---------------------------------------------------------------------------
# angular moment integrals and certificates
# ---------------------------------------------------------------------------


def _tail_mass(u: float, params: SoftPotentialParams) -> float:
    """Closed form of the integral of G^2 over [u, infinity)."""
    return (params.nu * u + params.pow_half_pi) ** (1.0 - 2.0 / params.nu) / (2.0 - params.nu)


def angular_moments(
    x: float,
    cutoff,
    params: SoftPotentialParams,
    rel_tol: float = 1e-9,
) -> tuple[float, float]:
    """Jump-mass integrals (phi_k, psi_k) at relative speed x > 0.

    phi_k = pi * integral over [0, K] of 1 - cos G(z / x^gamma) dz and psi_k
    the matching tail integral over [K, infinity). Both are computed by
    adaptive quadrature; the infinite tail is cut where the closed-form
    bound via 1 - cos G <= G^2 falls below the absolute floor. They satisfy
    the drift identity: the (z, phi)-integral of the cutoff deviation over
    [0, K] x [0, 2*pi) equals -(v - v*) * phi_k(|v - v*|).
    """
    x = float(x)
    if not x > 0.0:
        raise ValueError(f"relative speed must be positive, got {x!r}")
    k = cutoff_value(cutoff)
    scale = x ** (-params.gamma)

    def integrand(z: float) -> float:
        return 1.0 - math.cos(angular_g(z * scale, params))

    def tail(t: float) -> float:
        return _tail_mass(t * scale, params) / scale

    phi_k = math.pi * adaptive_simpson(integrand, 0.0, k, rel_tol)
    psi_k = math.pi * integrate_with_tail(integrand, k, tail, rel_tol)
    return phi_k, psi_k


def deviation_phi_integral(v: Vec3, v_star: Vec3, theta: float) -> Vec3:
    """Closed-form integral of deviation_a over phi in [0, 2*pi): the frame
    average drops and only -pi*(1-cos theta)*(v-v*) survives."""
    rel = np.asarray(v, dtype=float) - np.asarray(v_star, dtype=float)
    return -math.pi * (1.0 - math.cos(theta)) * rel


def deviation_sq_phi_integral(v: Vec3, v_star: Vec3, theta: float) -> float:
    """Closed-form integral of |deviation_a|^2 over phi in [0, 2*pi):
    pi*(1-cos theta)*|v-v*|^2."""
    rel = np.asarray(v, dtype=float) - np.asarray(v_star, dtype=float)
    return math.pi * (1.0 - math.cos(theta)) * float(rel @ rel)


def g_difference_integral(
    x: float,
    y: float,
    params: SoftPotentialParams,
    rel_tol: float = 1e-9,
) -> float:
    """Quadrature value of the integral of (G(z/x) - G(z/y))^2 over z >= 0.

    x, y > 0 are rate scales. The tail beyond the quadrature window is
    bounded by |integral G^2(z/x) - integral G^2(z/y)| in closed form, valid
    since G is monotone in its scale argument.
    """
    x = float(x)
    y = float(y)
    if not (x > 0.0 and y > 0.0):
        raise ValueError("scales must be positive")

    def integrand(z: float) -> float:
        d = angular_g(z / x, params) - angular_g(z / y, params)
        return d * d

    def tail(t: float) -> float:
        return abs(x * _tail_mass(t / x, params) - y * _tail_mass(t / y, params))

    return integrate_with_tail(integrand, 0.0, tail, rel_tol)


def g_difference_ratio(x: float, y: float, params: SoftPotentialParams) -> float:
    """Integral of (G(z/x)-G(z/y))^2 dz normalized by (x-y)^2/(x+y).

    The normalizer is the claimed envelope; a bounded empirical maximum of
    this ratio over samples certifies the squared-difference bound.
    """
    if x == y:
        raise ValueError("ratio undefined at x == y")
    return g_difference_integral(x, y, params) * (x + y) / (x - y) ** 2


def cutoff_mass_ratios(x: float, cutoff, params: SoftPotentialParams) -> tuple[float, float]:
    """Normalized jump-mass ratios at relative speed x.

    Returns (phi_k / x^gamma, (phi_k + psi_k) / x^gamma). The first
    normalizes both cutoff integrals: the squared-deviation mass
    x^2 * phi_k(x) against x^(gamma+2) and the drift mass x * phi_k(x)
    against x^(gamma+1). The second does the same for the uncut integrals.
    Bounded empirical maxima of these ratios certify the corresponding
    integral bounds.
    """
    phi_k, psi_k = angular_moments(x, cutoff, params)
    scale = x ** float(params.gamma)
    return phi_k / scale, (phi_k + psi_k) / scale
