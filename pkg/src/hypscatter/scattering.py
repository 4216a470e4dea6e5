"""Scattering matrices, their determinants, and the normalized determinant
function L*(s).

Each lattice model gets two builds:

* a closed-form model, entries assembled from gamma and zeta quotients
  (modular group: sqrt(pi) G(s-1/2) zeta(2s-1) / (G(s) zeta(2s)); level-p
  group: the 2x2 matrix with p-adic corrections; Gaussian group: the
  Dedekind-zeta quotient), and
* a series model, entries built as truncated Dirichlet series straight from
  the double-coset spectra with the cusp constants c_j = pi^{(d-1)/2}/v_j.

The determinant factors as (Gamma(s-(d-1)/2)/Gamma(s))^kappa * L(s) with
L(s) = sign * a * b^{d-1-2s} * L*(s) and L*(sigma) -> 1 as sigma -> +inf.
The leading coefficient of the level-p determinant is negative, so the sign
is carried separately to keep a > 0.  On the critical line
|L*((d-1)/2+it)| = a_Gamma * |Gamma(s)/Gamma(s-(d-1)/2)|^kappa with
a_Gamma = 1/a; the constant is also measured numerically as a check.
"""

from __future__ import annotations

import cmath
import json
import math
import os
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import dirichlet, specfun
from .lattices import LatticeModel, enumerate_double_cosets


class ScatteringError(Exception):
    pass


@dataclass(frozen=True)
class GammaFactor:
    """(Gamma(s - (d-1)/2) / Gamma(s))^exponent."""

    d: int
    exponent: int

    @property
    def shift(self) -> float:
        return 0.5 * (self.d - 1)

    def ratio(self, s: complex) -> complex:
        return specfun.gamma_ratio(complex(s), -self.shift) ** self.exponent


@dataclass(frozen=True)
class Normalization:
    a: float
    b: float
    sign: float

    def __post_init__(self) -> None:
        if self.a <= 0 or self.b <= 0:
            raise ScatteringError("normalization constants must be positive")
        if self.sign not in (-1.0, 1.0):
            raise ScatteringError("sign must be +-1")

    @property
    def a_gamma(self) -> float:
        return 1.0 / self.a


@dataclass(frozen=True)
class ScatteringModel:
    lattice: LatticeModel
    kind: str  # "closed_form" | "series"
    gamma_factor: GammaFactor
    normalization: Normalization
    # closed-form: callables L_ij(s) covering the whole plane minus poles;
    # series: PositiveDirichletSeries in the abscissa-1 rescaling
    entries_closed: tuple | None = None
    entries_series: tuple | None = None
    cusp_constants: tuple[float, ...] = ()
    det_closed: Callable[[complex], complex] | None = None
    empty_entries: tuple[tuple[int, int], ...] = ()
    lambda_max: float = 0.0

    @property
    def d(self) -> int:
        return self.lattice.d

    @property
    def kappa(self) -> int:
        return self.lattice.kappa

    @property
    def critical(self) -> float:
        return 0.5 * (self.d - 1)


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------

def _zeta_quotient(s: complex) -> complex:
    # zeta(2s-1)/zeta(2s), the modular-group Dirichlet factor
    return specfun.riemann_zeta(2.0 * s - 1.0) / specfun.riemann_zeta(2.0 * s)


def closed_form_model(lattice: LatticeModel) -> ScatteringModel:
    """Ground-truth scattering model from special-function quotients.

    The constants were fixed once by matching the double-coset series
    term by term (see the series builder); the determinant shapes are:
      modular:   sqrt(pi) * Z(s)                      (a = sqrt(pi))
      level p:   -pi/p * Z(s)^2 (u-p^2)/(u-1), u=p^2s (a = pi/p, sign -1)
      Gaussian:  pi * zeta_K(s-1)/zeta_K(s)           (a = pi)
    """
    d, kappa = lattice.d, lattice.kappa
    gf = GammaFactor(d, kappa)

    if lattice.id == "SL2Z":
        entries = ((lambda s: math.sqrt(math.pi) * _zeta_quotient(s),),)
        det = entries[0][0]
        norm = Normalization(a=math.sqrt(math.pi), b=1.0, sign=1.0)
    elif lattice.d == 2:
        p = float(lattice.level)
        sp = math.sqrt(math.pi)

        def u_of(s: complex) -> complex:
            return cmath.exp(2.0 * s * math.log(p))

        def e00(s: complex) -> complex:
            return sp * _zeta_quotient(s) * (p - 1.0) / (u_of(s) - 1.0)

        def e01(s: complex) -> complex:
            return sp * _zeta_quotient(s) * (u_of(s) - p) / (p * (u_of(s) - 1.0))

        def e10(s: complex) -> complex:
            return sp * _zeta_quotient(s) * (u_of(s) - p) / (u_of(s) - 1.0)

        def e11(s: complex) -> complex:
            u = u_of(s)
            return sp * _zeta_quotient(s) * (u / p) * (p - 1.0) / (u - 1.0)

        def det(s: complex) -> complex:
            u = u_of(s)
            z = _zeta_quotient(s)
            return -(math.pi / p) * z * z * (u - p * p) / (u - 1.0)

        entries = ((e00, e01), (e10, e11))
        norm = Normalization(a=math.pi / p, b=1.0, sign=-1.0)
    else:
        def zk_quotient(s: complex) -> complex:
            return specfun.dedekind_zeta_Qi(s - 1.0) / specfun.dedekind_zeta_Qi(s)

        entries = ((lambda s: math.pi * zk_quotient(s),),)
        det = entries[0][0]
        norm = Normalization(a=math.pi, b=1.0, sign=1.0)

    return ScatteringModel(
        lattice=lattice, kind="closed_form", gamma_factor=gf,
        normalization=norm, entries_closed=entries, det_closed=det,
    )


# ---------------------------------------------------------------------------
# Series build from double cosets
# ---------------------------------------------------------------------------

def cusp_constant(d: int, volume: float) -> float:
    """c_j = pi^{(d-1)/2} / v_j, the horospherical integral constant."""
    return math.pi ** (0.5 * (d - 1)) / volume


def build_from_double_cosets(
    lattice: LatticeModel, lambda_max: float
) -> ScatteringModel:
    """Scattering model whose entries are truncated Dirichlet series with
    the exact double-coset multiplicities as coefficients.

    Entries are stored in the abscissa-1 rescaling f(s') = L((d-1)(s'+1)/2),
    i.e. frequencies lambda^{(d-1)/2} and coefficients count/lambda^{(d-1)/2}.
    Off-diagonal entries whose minimal frequency exceeds lambda_max come out
    empty and are flagged in empty_entries.
    """
    d, kappa = lattice.d, lattice.kappa
    gf = GammaFactor(d, kappa)
    half = 0.5 * (d - 1)
    series_rows = []
    empty = []
    min_classes = 5
    for i in range(kappa):
        row = []
        for j in range(kappa):
            spec = enumerate_double_cosets(lattice, i, j, lambda_max)
            if not spec.entries:
                empty.append((i, j))
                row.append(None)
                continue
            if len(spec.entries) < min_classes:
                raise ScatteringError(
                    f"lambda_max={lambda_max} yields only "
                    f"{len(spec.entries)} classes for entry ({i},{j}); "
                    f"need at least {min_classes}"
                )
            mus = np.array([lam ** half for lam, _ in spec.entries])
            coeffs = np.array(
                [cnt / lam ** half for lam, cnt in spec.entries]
            )
            # A(x) = sum count/mu over mu <= x; envelope proved per model:
            # totient sums give K=1 for d=2, Gaussian lattice points K=2
            envelope = 1.0 if d == 2 else 2.0
            row.append(dirichlet.PositiveDirichletSeries(
                mus, coeffs, residue_at_1=0.0,
                growth_exponent=max(0.5, half),
                summatory_envelope=envelope,
                label=f"{lattice.id}_L{i}{j}",
            ))
        series_rows.append(tuple(row))

    closed = closed_form_model(lattice)
    return ScatteringModel(
        lattice=lattice, kind="series", gamma_factor=gf,
        normalization=closed.normalization,
        entries_series=tuple(series_rows),
        cusp_constants=tuple(
            cusp_constant(d, c.volume) for c in lattice.cusps
        ),
        empty_entries=tuple(empty),
        lambda_max=float(lambda_max),
    )


def _series_entry_value(
    m: ScatteringModel, i: int, j: int, s: complex
) -> tuple[complex, float]:
    f = m.entries_series[i][j]
    if f is None:
        return complex(0.0), 0.0
    d = m.d
    s_resc = 2.0 * complex(s) / (d - 1.0) - 1.0
    if s_resc.real <= 1.0:
        raise ScatteringError(
            f"series entries converge only for Re s > {d - 1}, got {s}"
        )
    res = dirichlet.evaluate(f, s_resc)
    c_j = m.cusp_constants[j]
    return c_j * res.value, c_j * res.tail_bound


def _limit_safe(func: Callable[[complex], complex], s: complex,
                critical: float) -> complex:
    """Evaluate func(s); at the indeterminate point s = (d-1)/2 (gamma pole
    against zeta pole) take the symmetric two-sided limit instead."""
    s = complex(s)
    if abs(s - critical) < 1e-9:
        eps = 1e-6
        return 0.5 * (func(critical - eps) + func(critical + eps))
    return func(s)


def phi_entry_with_bound(
    m: ScatteringModel, i: int, j: int, s: complex
) -> tuple[complex, float]:
    """phi_ij(s) and an error bound (0 for closed forms, the series tail
    bound times the prefactors otherwise)."""
    s = complex(s)
    g = m.gamma_factor
    if m.kind == "closed_form":
        entry = m.entries_closed[i][j]
        val = _limit_safe(
            lambda w: specfun.gamma_ratio(w, -g.shift) * entry(w),
            s, m.critical,
        )
        return val, 0.0
    val, bound = _series_entry_value(m, i, j, s)
    ratio = specfun.gamma_ratio(s, -g.shift)
    return ratio * val, abs(ratio) * bound


def phi_matrix(m: ScatteringModel, s: complex) -> np.ndarray:
    out = np.empty((m.kappa, m.kappa), dtype=complex)
    for i in range(m.kappa):
        for j in range(m.kappa):
            out[i, j], _ = phi_entry_with_bound(m, i, j, s)
    return out


def scattering_determinant(m: ScatteringModel, s: complex) -> complex:
    s = complex(s)
    if m.kind == "closed_form" and m.det_closed is not None:
        return _limit_safe(
            lambda w: m.gamma_factor.ratio(w) * m.det_closed(w),
            s, m.critical,
        )
    return complex(np.linalg.det(phi_matrix(m, s)))


def determinant_with_bound(
    m: ScatteringModel, s: complex
) -> tuple[complex, float]:
    """det phi(s) with a propagated truncation bound (series models).

    For kappa = 2 the bound is first order in the entry bounds plus the
    quadratic cross terms, so it majorizes the exact error.
    """
    if m.kind == "closed_form":
        return scattering_determinant(m, s), 0.0
    if m.kappa == 1:
        return phi_entry_with_bound(m, 0, 0, s)
    if m.kappa != 2:
        raise ScatteringError("bound propagation implemented for kappa <= 2")
    (v00, b00) = phi_entry_with_bound(m, 0, 0, s)
    (v01, b01) = phi_entry_with_bound(m, 0, 1, s)
    (v10, b10) = phi_entry_with_bound(m, 1, 0, s)
    (v11, b11) = phi_entry_with_bound(m, 1, 1, s)
    det = v00 * v11 - v01 * v10
    bound = (abs(v00) * b11 + abs(v11) * b00 + b00 * b11
             + abs(v01) * b10 + abs(v10) * b01 + b01 * b10)
    return det, bound


def L_star(m: ScatteringModel, s: complex) -> complex:
    """Normalized determinant: det phi stripped of the gamma factor, the
    leading constant, and the b-power, so L*(sigma) -> 1 for large sigma."""
    s = complex(s)
    n = m.normalization
    if m.kind == "closed_form" and m.det_closed is not None:
        core = _limit_safe(m.det_closed, s, m.critical)
    else:
        core = scattering_determinant(m, s) / m.gamma_factor.ratio(s)
    scale = n.sign * n.a * n.b ** (m.d - 1 - 2 * s.real)
    if n.b != 1.0:
        scale = n.sign * n.a * cmath.exp(
            (m.d - 1.0 - 2.0 * s) * math.log(n.b)
        )
    return core / scale


def functional_equation_residual(m: ScatteringModel, s: complex) -> float:
    """inf-norm of phi(s) phi(d-1-s) - I."""
    if m.kind != "closed_form":
        raise ScatteringError(
            "functional equation requires the closed-form model; series "
            "entries are not valid at d-1-s"
        )
    s = complex(s)
    prod = phi_matrix(m, s) @ phi_matrix(m, (m.d - 1.0) - s)
    return float(np.max(np.abs(prod - np.eye(m.kappa))))


def measure_a_gamma(
    m: ScatteringModel, t_samples: tuple[float, ...] = (2.0, 5.0, 10.0, 20.0)
) -> tuple[float, float]:
    """Numerical (mean, relative spread) of |L*| / |gamma-ratio|^{-kappa}
    on the critical line; the mean estimates a_Gamma = 1/a."""
    vals = []
    for t in t_samples:
        s = complex(m.critical, t)
        ratio = m.gamma_factor.ratio(s)
        vals.append(abs(L_star(m, s)) * abs(ratio))
    mean = math.fsum(vals) / len(vals)
    spread = max(abs(v - mean) for v in vals) / mean
    return mean, spread


def maass_selberg_bound_check(
    m: ScatteringModel, sigma: float, t: float, constant: float = 1.0
) -> dict:
    """Largest |phi_ij(sigma+it)| against C*(sqrt(1+w^2)+w) with
    w = (2 sigma + 1 - d)/(2t), valid on (d-1)/2 <= sigma <= d, |t| >= 1."""
    d = m.d
    if not (0.5 * (d - 1) <= sigma <= d):
        raise ScatteringError(f"sigma={sigma} outside [{0.5*(d-1)}, {d}]")
    if abs(t) < 1.0:
        raise ScatteringError("bound valid only for |t| >= 1")
    mat = phi_matrix(m, complex(sigma, t))
    lhs = float(np.max(np.abs(mat)))
    w = (2.0 * sigma + 1.0 - d) / (2.0 * abs(t))
    rhs = constant * (math.sqrt(1.0 + w * w) + w)
    return {"lhs": lhs, "rhs": rhs, "ok": lhs <= rhs}


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------

def export_model(m: ScatteringModel, out_dir: str) -> list[str]:
    """JSON descriptor plus one CSV per series entry; returns paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    desc = {
        "lattice": m.lattice.id,
        "kind": m.kind,
        "d": m.d,
        "kappa": m.kappa,
        "a": m.normalization.a,
        "b": m.normalization.b,
        "sign": m.normalization.sign,
        "a_gamma": m.normalization.a_gamma,
        "lambda_max": m.lambda_max,
        "empty_entries": [list(e) for e in m.empty_entries],
    }
    desc_path = os.path.join(out_dir, "model.json")
    tmp = desc_path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(desc, fh, indent=1, sort_keys=True)
    os.replace(tmp, desc_path)
    paths.append(desc_path)
    if m.entries_series is not None:
        for i in range(m.kappa):
            for j in range(m.kappa):
                f = m.entries_series[i][j]
                if f is None:
                    continue
                p = os.path.join(out_dir, f"entry_{i}{j}.csv")
                dirichlet.save_series(f, p)
                paths.append(p)
    return paths
