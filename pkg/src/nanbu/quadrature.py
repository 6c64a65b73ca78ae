"""Adaptive Simpson quadrature and a helper for integrals with decaying tails."""

from __future__ import annotations

import math
from typing import Callable

from .errors import NumericalError

REL_TOL = 1e-9
ABS_FLOOR = 1e-14
_MAX_DEPTH = 48


def _recurse(f, a, fa, m, fm, b, fb, whole, tol, depth):
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm = f(lm)
    frm = f(rm)
    left = (m - a) * (fa + 4.0 * flm + fm) / 6.0
    right = (b - m) * (fm + 4.0 * frm + fb) / 6.0
    delta = left + right - whole
    if depth <= 0 or abs(delta) <= 15.0 * tol:
        return left + right + delta / 15.0
    half = 0.5 * tol
    return _recurse(f, a, fa, lm, flm, m, fm, left, half, depth - 1) + _recurse(
        f, m, fm, rm, frm, b, fb, right, half, depth - 1
    )


def _pass(f, a, b, tol):
    h = (b - a) / 8.0
    xs = [a + i * h for i in range(9)]
    fs = [f(x) for x in xs]
    total = 0.0
    for k in range(0, 8, 2):
        fa, fm, fb = fs[k], fs[k + 1], fs[k + 2]
        whole = 2.0 * h * (fa + 4.0 * fm + fb) / 6.0
        total += _recurse(f, xs[k], fa, xs[k + 1], fm, xs[k + 2], fb, whole, tol / 4.0, _MAX_DEPTH)
    return total


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    rel_tol: float = REL_TOL,
    abs_floor: float = ABS_FLOOR,
) -> float:
    """Integrate f over the finite interval [a, b].

    The error target is max(rel_tol * |integral|, abs_floor); a second pass
    re-runs with a tightened budget when the first estimate was too rough.
    """
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError("integration bounds must be finite")
    if a == b:
        return 0.0
    if b < a:
        return -adaptive_simpson(f, b, a, rel_tol, abs_floor)
    rough = _pass(f, a, b, max(abs_floor, 1e-6))
    tol = max(abs_floor, rel_tol * abs(rough))
    value = _pass(f, a, b, tol)
    tighter = max(abs_floor, rel_tol * abs(value))
    if tighter < 0.5 * tol:
        value = _pass(f, a, b, tighter)
    return value


def integrate_with_tail(
    f: Callable[[float], float],
    a: float,
    tail_bound: Callable[[float], float],
    rel_tol: float = REL_TOL,
    abs_floor: float = ABS_FLOOR,
    max_segments: int = 256,
) -> float:
    """Integrate f over [a, infinity) given a closed-form tail bound.

    tail_bound(t) must dominate |integral of f over [t, infinity)| and decay
    to zero. The quadrature walks geometric segments until the remaining
    tail is below the accuracy target and drops the remainder. Each segment
    runs one adaptive pass against an absolute budget derived from the
    overall scale (tail_bound(a) dominates the whole integral), which keeps
    the many small far-tail segments from being refined pointlessly.
    """
    total = 0.0
    left = a
    width = max(abs(a), 1.0)
    scale = max(tail_bound(a), abs_floor)
    for _ in range(max_segments):
        scale = max(scale, abs(total))
        if tail_bound(left) <= max(abs_floor, rel_tol * scale):
            return total
        right = left + width
        seg_tol = max(abs_floor, rel_tol * scale / 32.0)
        total += _pass(f, left, right, seg_tol)
        left = right
        width *= 2.0
    raise NumericalError(
        f"tail integral did not reach its target below t={left:.3g}; "
        f"remaining bound {tail_bound(left):.3g}"
    )
