"""Dirichlet series with positive coefficients, normalized to abscissa of
absolute convergence 1: evaluation with rigorous tail bounds, summatory
function and its linear asymptotics, smoothed truncation windows, and
mean-square diagnostics on vertical lines.

A series carries a summatory envelope K certifying A_f(x) <= K*x; the tail
of the series beyond a cutoff is then bounded by Abel summation, which is
what makes the evaluation error flag trustworthy rather than heuristic.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import numerics, specfun


class DirichletError(Exception):
    pass


@dataclass(frozen=True)
class PositiveDirichletSeries:
    """Finite stored stretch of a Dirichlet series sum a_n lambda_n^{-s}.

    lambdas are strictly ascending and positive, coefficients strictly
    positive.  residue_at_1 is the residue of the continued function at
    s = 1; real_poles lists further real poles in (0,1) as (location,
    polynomial degree).  growth_exponent is the vertical-line exponent r
    with |f(sigma+it)| = O(|t|^r).  summatory_envelope K certifies
    A_f(x) <= K*x for ALL x (not just the stored range).
    """

    lambdas: np.ndarray
    coefficients: np.ndarray
    residue_at_1: float
    growth_exponent: float = 0.5
    real_poles: tuple[tuple[float, int], ...] = ()
    summatory_envelope: float = 1.0
    label: str = "series"

    def __post_init__(self) -> None:
        lam = np.asarray(self.lambdas, dtype=float)
        a = np.asarray(self.coefficients, dtype=float)
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "coefficients", a)
        if lam.shape != a.shape or lam.ndim != 1:
            raise DirichletError("lambdas and coefficients must be 1d, same length")
        if lam.size and (np.any(np.diff(lam) <= 0) or lam[0] <= 0):
            raise DirichletError("lambdas must be strictly ascending and positive")
        if np.any(a <= 0):
            raise DirichletError("coefficients must be positive")
        if self.growth_exponent < 0.5:
            raise DirichletError("growth exponent below 1/2 is not meaningful here")
        for rho, deg in self.real_poles:
            if not (0.0 < rho < 1.0) or deg < 0:
                raise DirichletError(f"bad real pole ({rho}, {deg})")

    @property
    def coverage(self) -> float:
        """Largest x for which the stored terms are known complete."""
        return float(self.lambdas[-1]) if self.lambdas.size else 0.0


@dataclass(frozen=True)
class TruncationWindow:
    """Smoothing window (x, k) for the truncated series with weight
    (1 - lambda/x)^k; the lemma hypothesis requires k above the growth
    exponent, checked at use site against the series."""

    x: float
    k: int

    def __post_init__(self) -> None:
        if self.x < 1.0:
            raise DirichletError("window x must be >= 1")
        if self.k < 1:
            raise DirichletError("window k must be a positive integer")


@dataclass(frozen=True)
class EvaluationResult:
    value: complex
    tail_bound: float
    within_tolerance: bool


def sigma1(r: float, convention: str = "formula") -> float:
    """Mean-square validity threshold.

    "formula" returns (4r-1)/(4r); "remark" returns 3/4 for r < 1 (the
    stronger stated variant for small growth), else the formula.  Both are
    exposed because the source statements differ; quantitative gates in this
    package use "formula".
    """
    if r < 0.5:
        raise DirichletError("r must be >= 1/2")
    base = (4.0 * r - 1.0) / (4.0 * r)
    if convention == "formula":
        return base
    if convention == "remark":
        return base if r >= 1.0 else 0.75
    raise DirichletError(f"unknown sigma1 convention {convention!r}")


def evaluate(
    f: PositiveDirichletSeries,
    s: complex,
    cutoff: int | None = None,
    tolerance: float = 1e-9,
) -> EvaluationResult:
    """Partial sum over the first `cutoff` stored terms plus a rigorous
    Abel-summation tail bound K*sigma*Lambda^(1-sigma)/(sigma-1)."""
    s = complex(s)
    sigma = s.real
    if sigma <= 1.0:
        raise DirichletError(f"evaluate requires Re s > 1, got {sigma}")
    n = f.lambdas.size if cutoff is None else min(int(cutoff), f.lambdas.size)
    if n == 0:
        lam_edge = 1.0
        value = complex(0.0)
    else:
        lam = f.lambdas[:n]
        terms = f.coefficients[:n] * np.exp(-s * np.log(lam))
        value = complex(
            math.fsum(terms.real.tolist()), math.fsum(terms.imag.tolist())
        )
        lam_edge = float(lam[-1])
    tail = f.summatory_envelope * sigma * lam_edge ** (1.0 - sigma) / (sigma - 1.0)
    return EvaluationResult(value, tail, tail <= tolerance)


def summatory(f: PositiveDirichletSeries, x: float) -> float:
    """A_f(x) = sum of coefficients with lambda_n <= x, exact partial sum."""
    if x > f.coverage:
        raise DirichletError(
            f"summatory at x={x} beyond stored coverage {f.coverage}"
        )
    n = int(np.searchsorted(f.lambdas, x, side="right"))
    return math.fsum(f.coefficients[:n].tolist())


def summatory_asymptotic_fit(
    f: PositiveDirichletSeries, x_grid: Sequence[float]
) -> dict:
    """Least-squares fit of A_f(x) to a*x plus the lower-order real-pole
    terms x^rho * log(x)^j; reports the fitted residue and the sup of
    |A_f(x) - model| / (x^{1-1/(2r)} * log x) over the grid."""
    xs = np.asarray(sorted(x_grid), dtype=float)
    if xs.size < 2:
        raise DirichletError("need at least two grid points")
    if xs[-1] < 1e3:
        raise DirichletError("grid must extend to at least 10^3")
    target = np.array([summatory(f, x) for x in xs])
    columns = [xs]
    for rho, deg in f.real_poles:
        for j in range(deg + 1):
            columns.append(xs ** rho * np.log(xs) ** j)
    design = np.column_stack(columns)
    coeffs, _ = numerics.fit_linear_model(design, target)
    model = design @ coeffs
    expo = 1.0 - 1.0 / (2.0 * f.growth_exponent)
    scale = xs ** expo * np.log(np.maximum(xs, math.e))
    deviation = float(np.max(np.abs(target - model) / scale))
    return {
        "fitted_residue": float(coeffs[0]),
        "max_deviation": deviation,
        "coefficients": [float(c) for c in coeffs],
    }


def smoothed_truncation(
    f: PositiveDirichletSeries, w: TruncationWindow, s: complex
) -> complex:
    """f*_{x,k}(s): the finite sum with weights (1 - lambda/x)^k."""
    if w.k <= f.growth_exponent:
        raise DirichletError(
            f"window k={w.k} must exceed growth exponent r={f.growth_exponent}"
        )
    s = complex(s)
    n = int(np.searchsorted(f.lambdas, w.x, side="right"))
    if n == 0:
        return complex(0.0)
    lam = f.lambdas[:n]
    terms = (
        f.coefficients[:n]
        * (1.0 - lam / w.x) ** w.k
        * np.exp(-s * np.log(lam))
    )
    return complex(math.fsum(terms.real.tolist()), math.fsum(terms.imag.tolist()))


def mean_square(
    evaluator: Callable[[complex], complex],
    sigma: float,
    T: float,
    quad_points: int = 24,
    tol: float = 1e-8,
    sigma1_threshold: float | None = None,
) -> tuple[float, float]:
    """(1/T) integral_1^T |f(sigma+it)|^2 dt by adaptive quadrature.

    Returns (value, error_estimate).  The evaluator must be valid on the
    whole segment; pass sigma1_threshold to enforce the validity strip.
    """
    if T <= 1.0:
        raise DirichletError("T must exceed 1")
    if sigma1_threshold is not None and sigma < sigma1_threshold:
        raise DirichletError(
            f"sigma={sigma} below mean-square threshold {sigma1_threshold}"
        )

    def g(t: float) -> float:
        return abs(evaluator(complex(sigma, t))) ** 2

    value = numerics.adaptive_quad(g, 1.0, T, tol=tol * T, order=quad_points)
    return value / T, tol


# ---------------------------------------------------------------------------
# Stock series
# ---------------------------------------------------------------------------

def zeta_series(n_terms: int) -> PositiveDirichletSeries:
    """The plain zeta series a_n = 1, lambda_n = n; A(x) = floor(x) <= x."""
    lam = np.arange(1, n_terms + 1, dtype=float)
    return PositiveDirichletSeries(
        lam, np.ones(n_terms), residue_at_1=1.0,
        growth_exponent=0.5, summatory_envelope=1.0, label="zeta",
    )


def sl2z_scaled_series(n_terms: int) -> PositiveDirichletSeries:
    """The critical-strip rescaled scattering series of the modular group:
    a_n = phi(n)/n at lambda_n = n, so f(s) = zeta(s)/zeta(s+1).

    The residue at 1 is 1/zeta(2) = 6/pi^2; A(x) <= x since each
    coefficient is at most 1.
    """
    from .lattices import totient_table
    phi = totient_table(n_terms)
    lam = np.arange(1, n_terms + 1, dtype=float)
    coeffs = np.array([phi[n] / n for n in range(1, n_terms + 1)])
    return PositiveDirichletSeries(
        lam, coeffs, residue_at_1=6.0 / math.pi ** 2,
        growth_exponent=0.5, summatory_envelope=1.0, label="sl2z_scaled",
    )


def sl2z_scaled_closed_form(s: complex) -> complex:
    """Analytic continuation of the rescaled modular scattering series:
    zeta(s)/zeta(s+1)."""
    return specfun.riemann_zeta(s) / specfun.riemann_zeta(s + 1.0)


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------

def save_series(f: PositiveDirichletSeries, path: str) -> None:
    """CSV of (lambda, coefficient) plus a JSON sidecar with the metadata."""
    tmp = path + ".tmp"
    with open(tmp, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["lambda", "coefficient"])
        for lam, a in zip(f.lambdas, f.coefficients):
            w.writerow([f"{lam:.12g}", f"{a:.17g}"])
    os.replace(tmp, path)
    meta = {
        "residue_at_1": f.residue_at_1,
        "growth_exponent": f.growth_exponent,
        "real_poles": [[rho, deg] for rho, deg in f.real_poles],
        "summatory_envelope": f.summatory_envelope,
        "label": f.label,
    }
    mtmp = path + ".meta.json.tmp"
    with open(mtmp, "w") as fh:
        json.dump(meta, fh, indent=1, sort_keys=True)
    os.replace(mtmp, path + ".meta.json")


def load_series(path: str) -> PositiveDirichletSeries:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["lambda", "coefficient"]:
        raise DirichletError(f"malformed series file {path}")
    lam = np.array([float(r[0]) for r in rows[1:]])
    coeffs = np.array([float(r[1]) for r in rows[1:]])
    with open(path + ".meta.json") as fh:
        meta = json.load(fh)
    return PositiveDirichletSeries(
        lam, coeffs,
        residue_at_1=meta["residue_at_1"],
        growth_exponent=meta["growth_exponent"],
        real_poles=tuple((rho, int(deg)) for rho, deg in meta["real_poles"]),
        summatory_envelope=meta["summatory_envelope"],
        label=meta.get("label", "series"),
    )
