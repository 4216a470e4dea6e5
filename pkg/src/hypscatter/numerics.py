"""Shared numerical machinery: compensated summation, continuous phase
tracking along curves, winding numbers on rectangles, and adaptive
quadrature (plain panels and panels with a known logarithmic endpoint
singularity).

Everything here is pure: no global state, deterministic output for a
given callable and arguments.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

TWO_PI = 2.0 * math.pi


class NumericsError(Exception):
    """Base class for failures in the shared numerical routines."""


class PhaseTrackingError(NumericsError):
    """Phase refinement hit the depth limit, typically a zero on the path."""


class QuadratureError(NumericsError):
    """Adaptive quadrature failed to converge within its budget."""


def compensated_sum(values: Sequence[float]) -> float:
    """Exactly rounded sum of a finite float sequence."""
    return math.fsum(values)


def compensated_csum(values: Sequence[complex]) -> complex:
    re = math.fsum(v.real for v in values)
    im = math.fsum(v.imag for v in values)
    return complex(re, im)


class KahanAccumulator:
    """Streaming compensated accumulator (Kahan-Babuska variant)."""

    __slots__ = ("total", "_comp")

    def __init__(self) -> None:
        self.total = 0.0
        self._comp = 0.0

    def add(self, x: float) -> None:
        t = self.total + x
        if abs(self.total) >= abs(x):
            self._comp += (self.total - t) + x
        else:
            self._comp += (x - t) + self.total
        self.total = t

    def value(self) -> float:
        return self.total + self._comp


def bernoulli_over_factorial(count: int) -> list[float]:
    """[B_2/2!, B_4/4!, ..., B_{2*count}/(2*count)!] as floats.

    Computed once from the exact recurrence for the Bernoulli numbers so no
    table has to be trusted.
    """
    n_max = 2 * count
    b = [Fraction(0)] * (n_max + 1)
    b[0] = Fraction(1)
    for m in range(1, n_max + 1):
        acc = Fraction(0)
        for k in range(m):
            acc += Fraction(math.comb(m + 1, k)) * b[k]
        b[m] = -acc / (m + 1)
    out = []
    fact = Fraction(1)
    for n in range(1, n_max + 1):
        fact *= n
        if n % 2 == 0:
            out.append(float(b[n] / fact))
    return out


# ---------------------------------------------------------------------------
# Continuous phase tracking
# ---------------------------------------------------------------------------


def _phase_step(fa: complex, fb: complex) -> float:
    """Principal argument of fb/fa, in (-pi, pi]."""
    return cmath.phase(fb / fa)


def tracked_phase_path(
    f: Callable[[complex], complex],
    za: complex,
    zb: complex,
    initial_samples: int = 17,
    max_step: float = math.pi / 2,
    max_depth: int = 48,
) -> tuple[list[complex], list[complex], list[float]]:
    """Follow f along the segment [za, zb], refining until the phase jump
    between adjacent samples stays below max_step.

    Returns (points, values, continuous_args) where continuous_args[0] is
    the principal argument of f(za) and later entries accumulate the
    tracked phase increments.
    """
    if initial_samples < 2:
        initial_samples = 2
    ts = np.linspace(0.0, 1.0, initial_samples)
    pts = [za + (zb - za) * t for t in ts]
    vals = [f(z) for z in pts]
    for v, z in zip(vals, pts):
        if v == 0 or not (abs(v) > 0):
            raise PhaseTrackingError(f"function vanishes on the path at {z}")

    out_pts = [pts[0]]
    out_vals = [vals[0]]

    def refine(z0: complex, f0: complex, z1: complex, f1: complex, depth: int) -> None:
        # a large rotation between samples can alias to a small principal
        # step, so acceptance also demands that the midpoint splits the
        # step consistently; otherwise bisect
        zm = 0.5 * (z0 + z1)
        fm = f(zm)
        if fm == 0 or not (abs(fm) > 0):
            raise PhaseTrackingError(f"function vanishes on the path at {zm}")
        step = _phase_step(f0, f1)
        s_left = _phase_step(f0, fm)
        s_right = _phase_step(fm, f1)
        if (abs(step) <= max_step and abs(s_left) <= max_step
                and abs(s_right) <= max_step
                and abs(s_left + s_right - step) < 1e-9):
            out_pts.append(zm)
            out_vals.append(fm)
            out_pts.append(z1)
            out_vals.append(f1)
            return
        if depth >= max_depth:
            raise PhaseTrackingError(
                f"phase refinement depth exceeded between {z0} and {z1}"
            )
        refine(z0, f0, zm, fm, depth + 1)
        refine(zm, fm, z1, f1, depth + 1)

    for k in range(len(pts) - 1):
        refine(pts[k], vals[k], pts[k + 1], vals[k + 1], 0)

    args = [cmath.phase(out_vals[0])]
    for k in range(len(out_vals) - 1):
        args.append(args[-1] + _phase_step(out_vals[k], out_vals[k + 1]))
    return out_pts, out_vals, args


def phase_change(
    f: Callable[[complex], complex],
    za: complex,
    zb: complex,
    initial_samples: int = 17,
    max_step: float = math.pi / 2,
    max_depth: int = 48,
) -> float:
    """Total continuous change of arg f along the segment [za, zb]."""
    _, _, args = tracked_phase_path(f, za, zb, initial_samples, max_step, max_depth)
    return args[-1] - args[0]


def winding_rectangle(
    f: Callable[[complex], complex],
    re_min: float,
    re_max: float,
    im_min: float,
    im_max: float,
    samples_per_unit: float = 4.0,
    max_step: float = math.pi / 2,
    max_depth: int = 48,
    integrality_tol: float = 0.05,
) -> int:
    """Winding number of f around the closed rectangle boundary
    (counter-clockwise), i.e. zeros minus poles inside, by the argument
    principle with adaptive phase tracking.
    """
    if not (re_max > re_min and im_max > im_min):
        raise NumericsError("degenerate rectangle")
    corners = [
        complex(re_min, im_min),
        complex(re_max, im_min),
        complex(re_max, im_max),
        complex(re_min, im_max),
        complex(re_min, im_min),
    ]
    total = 0.0
    for a, b in zip(corners[:-1], corners[1:]):
        n0 = max(5, int(math.ceil(abs(b - a) * samples_per_unit)) + 1)
        total += phase_change(f, a, b, n0, max_step, max_depth)
    w = total / TWO_PI
    wi = round(w)
    if abs(w - wi) > integrality_tol:
        raise PhaseTrackingError(
            f"winding {w:.6f} not close to an integer; zero near the boundary?"
        )
    return int(wi)


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gl_nodes(n: int) -> tuple[np.ndarray, np.ndarray]:
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GL_CACHE[n]


def _gl_panel(g: Callable[[float], float], a: float, b: float, n: int) -> float:
    x, w = _gl_nodes(n)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    return half * math.fsum(wi * g(mid + half * xi) for xi, wi in zip(x, w))


def adaptive_quad(
    g: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-9,
    order: int = 16,
    max_depth: int = 24,
) -> float:
    """Adaptive Gauss-Legendre quadrature of a real integrand on [a, b].

    Panels are accepted when doubling the order changes the panel value by
    less than the local tolerance share.
    """
    if b <= a:
        if b == a:
            return 0.0
        return -adaptive_quad(g, b, a, tol, order, max_depth)

    def panel(lo: float, hi: float, tol_here: float, depth: int) -> float:
        coarse = _gl_panel(g, lo, hi, order)
        fine = _gl_panel(g, lo, hi, 2 * order)
        if abs(fine - coarse) <= max(tol_here, 1e-15 * (1.0 + abs(fine))):
            return fine
        if depth >= max_depth:
            raise QuadratureError(
                f"quadrature did not converge on [{lo}, {hi}] "
                f"(delta {abs(fine - coarse):.3e})"
            )
        mid = 0.5 * (lo + hi)
        return panel(lo, mid, tol_here / 2, depth + 1) + panel(
            mid, hi, tol_here / 2, depth + 1
        )

    return panel(a, b, tol, 0)


def integral_log_abs(a: float, b: float, t0: float) -> float:
    """Closed form of the integral of log|t - t0| over [a, b]."""

    def anti(u: float) -> float:
        if u == 0.0:
            return 0.0
        return u * math.log(abs(u)) - u

    return anti(b - t0) - anti(a - t0)


def _refine_singularity(
    g: Callable[[float], float], t0: float, half_width: float
) -> float:
    """Sharpen a log-singularity location by golden-section minimization
    of g near t0; supplied locations are often only good to ~1e-9, which
    is far too coarse for the closed-form subtraction."""
    inv_phi = 0.5 * (math.sqrt(5.0) - 1.0)
    lo, hi = t0 - half_width, t0 + half_width
    c = hi - inv_phi * (hi - lo)
    d = lo + inv_phi * (hi - lo)
    gc, gd = g(c), g(d)
    target = 5e-14 * (1.0 + abs(t0))
    while hi - lo > target:
        if gc < gd:
            hi, d, gd = d, c, gc
            c = hi - inv_phi * (hi - lo)
            gc = g(c)
        else:
            lo, c, gc = c, d, gd
            d = lo + inv_phi * (hi - lo)
            gd = g(d)
    return 0.5 * (lo + hi)


def quad_with_log_singularities(
    g: Callable[[float], float],
    a: float,
    b: float,
    singularities: Sequence[tuple[float, float]],
    tol: float = 1e-9,
    order: int = 16,
    refine: bool = True,
) -> float:
    """Integrate g over [a, b] where g(t) = smooth(t) + sum m*log|t - t0|
    for the supplied (t0, m) pairs inside the interval.

    The log parts are integrated in closed form; the smooth remainder goes
    through adaptive panels split at every singular point.  Interior
    singular locations are re-refined against g itself first (endpoint
    ones are taken as exact).
    """
    sing = [(t0, m) for (t0, m) in singularities if a - 1e-12 <= t0 <= b + 1e-12]
    if refine:
        w = 2e-6
        sing = [
            (_refine_singularity(g, t0, w), m)
            if a + w < t0 < b - w else (t0, m)
            for t0, m in sing
        ]

    def smooth(t: float) -> float:
        val = g(t)
        for t0, m in sing:
            d = abs(t - t0)
            if d == 0.0:
                raise QuadratureError("quadrature node hit a singular point")
            val -= m * math.log(d)
        return val

    cuts = sorted({a, b, *[t0 for t0, _ in sing]})
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if hi - lo < 1e-14:
            continue
        total += adaptive_quad(smooth, lo, hi, tol / max(1, len(cuts)), order)
    for t0, m in sing:
        total += m * integral_log_abs(a, b, t0)
    return total


def fit_linear_model(
    design: np.ndarray, target: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Least squares fit; returns (coefficients, residual vector)."""
    design = np.asarray(design, dtype=float)
    target = np.asarray(target, dtype=float)
    coeffs, *_ = np.linalg.lstsq(design, target, rcond=None)
    resid = target - design @ coeffs
    return coeffs, resid
