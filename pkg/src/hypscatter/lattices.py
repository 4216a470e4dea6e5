"""Arithmetic lattice models with cusp data, embeddings into the Lorentz
group, and exact double-coset enumeration.

Three models: the modular group (d=2, one cusp), the Hecke congruence group
of prime level p (d=2, cusps at infinity and 0), and the Gaussian-integer
modular group (d=3, one cusp).  All enumeration is exact integer arithmetic
in the defining 2x2 model; floats appear only when embedding to matrices.

The double-coset spectra recorded here are the frequencies lambda and
multiplicities of the scattering Dirichlet series: for the modular group
the classes for the single cusp pair are (c, d mod c) with gcd(c,d)=1 and
lambda = c^2, so the multiplicity of c^2 is the totient phi(c).
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass

import numpy as np

from .hypgeom import IsometryMatrix, identity_isometry


class LatticeError(Exception):
    pass


class EnumerationBudgetError(LatticeError):
    """Requested enumeration exceeds the desk-scale budget."""


# caps keeping a full enumeration under a few seconds of integer work
_MAX_LAMBDA_REAL = 4.1e6
_MAX_LAMBDA_GAUSSIAN = 4.1e4
_MAX_ENTRY_BOUND_REAL = 60
_MAX_ENTRY_BOUND_GAUSSIAN = 3


# ---------------------------------------------------------------------------
# Embeddings of the 2x2 models into Lorentz matrices
# ---------------------------------------------------------------------------

def _sym_from_xi(xi: np.ndarray) -> np.ndarray:
    # (xi0, xi1, xi2) <-> [[p, q], [q, r]] with p = 2(xi2-xi0),
    # q = xi1, r = (xi2+xi0)/2; det = xi2^2 - xi0^2 - xi1^2
    p = 2.0 * (xi[2] - xi[0])
    r = 0.5 * (xi[2] + xi[0])
    return np.array([[p, xi[1]], [xi[1], r]])


def embed_sl2r(m: np.ndarray) -> IsometryMatrix:
    """Real 2x2 matrix of determinant 1 -> 3x3 Lorentz matrix acting on the
    hyperboloid, equivariant with the Moebius action on the half-plane."""
    M = np.asarray(m, dtype=float)
    if M.shape != (2, 2):
        raise LatticeError(f"expected 2x2 matrix, got {M.shape}")
    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    if abs(det - 1.0) > 1e-9 * (1.0 + float(np.max(np.abs(M))) ** 2):
        raise LatticeError(f"determinant must be 1, got {det}")
    cols = []
    for k in range(3):
        e = np.zeros(3)
        e[k] = 1.0
        X = M @ _sym_from_xi(e) @ M.T
        p, q, r = X[0, 0], X[0, 1], X[1, 1]
        cols.append((r - 0.25 * p, q, r + 0.25 * p))
    return IsometryMatrix(np.array(cols).T)


def _herm_from_xi(xi: np.ndarray) -> np.ndarray:
    p = 2.0 * (xi[3] - xi[0])
    r = 0.5 * (xi[3] + xi[0])
    q = xi[1] + 1j * xi[2]
    return np.array([[p, q], [q.conjugate(), r]], dtype=complex)


def embed_sl2c(m: np.ndarray) -> IsometryMatrix:
    """Complex 2x2 matrix of determinant 1 -> 4x4 Lorentz matrix; the
    boundary action is the Moebius action on C and the height transforms by
    y' = y/(|cx+d|^2 + |c|^2 y^2)."""
    M = np.asarray(m, dtype=complex)
    if M.shape != (2, 2):
        raise LatticeError(f"expected 2x2 matrix, got {M.shape}")
    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    if abs(det - 1.0) > 1e-9 * (1.0 + float(np.max(np.abs(M))) ** 2):
        raise LatticeError(f"determinant must be 1, got {det}")
    cols = []
    for k in range(4):
        e = np.zeros(4)
        e[k] = 1.0
        X = M @ _herm_from_xi(e) @ M.conj().T
        p, q, r = X[0, 0].real, X[0, 1], X[1, 1].real
        cols.append((r - 0.25 * p, q.real, q.imag, r + 0.25 * p))
    return IsometryMatrix(np.array(cols).T)


# ---------------------------------------------------------------------------
# Model and cusp data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CuspDatum:
    """Cusp with its scaling isometry, translation lattice basis (rows) in
    R^{d-1}, and the covolume of that lattice."""

    scaling_element: IsometryMatrix
    translation_lattice: tuple[tuple[float, ...], ...]
    volume: float

    def __post_init__(self) -> None:
        basis = np.array(self.translation_lattice, dtype=float)
        cov = abs(float(np.linalg.det(basis)))
        if cov <= 0.0:
            raise LatticeError("degenerate translation lattice")
        if abs(cov - self.volume) > 1e-9 * (1.0 + cov):
            raise LatticeError(
                f"volume {self.volume} does not match basis covolume {cov}"
            )


@dataclass(frozen=True)
class DoubleCosetSpectrum:
    """Ascending (lambda, multiplicity) pairs for one cusp pair."""

    cusp_pair: tuple[int, int]
    entries: tuple[tuple[float, int], ...]
    lambda_max: float

    def __post_init__(self) -> None:
        lams = [lam for lam, _ in self.entries]
        if any(b <= a for a, b in zip(lams, lams[1:])):
            raise LatticeError("lambdas must be strictly ascending")
        if any(cnt < 1 for _, cnt in self.entries):
            raise LatticeError("multiplicities must be positive")

    def save_csv(self, path: str) -> None:
        tmp = path + ".tmp"
        with open(tmp, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["lambda", "count"])
            for lam, cnt in self.entries:
                w.writerow([f"{lam:.12g}", cnt])
        os.replace(tmp, path)

    @staticmethod
    def load_csv(path: str, cusp_pair: tuple[int, int], lambda_max: float
                 ) -> "DoubleCosetSpectrum":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or rows[0] != ["lambda", "count"]:
            raise LatticeError(f"malformed spectrum file {path}")
        entries = tuple((float(r[0]), int(r[1])) for r in rows[1:])
        return DoubleCosetSpectrum(cusp_pair, entries, lambda_max)


@dataclass(frozen=True)
class LatticeModel:
    id: str
    d: int
    kappa: int
    cusps: tuple[CuspDatum, ...]
    level: int = 1  # p for the Hecke groups, 1 otherwise

    def __post_init__(self) -> None:
        if len(self.cusps) != self.kappa:
            raise LatticeError("cusp list does not match kappa")


_S_MATRIX = np.array([[0, -1], [1, 0]], dtype=float)


def sl2z() -> LatticeModel:
    cusp = CuspDatum(identity_isometry(2), ((1.0,),), 1.0)
    return LatticeModel("SL2Z", 2, 1, (cusp,))


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    for q in range(2, math.isqrt(p) + 1):
        if p % q == 0:
            return False
    return True


def gamma0(p: int) -> LatticeModel:
    """Hecke congruence group of prime level: matrices with c = 0 mod p.
    Cusps at infinity (width 1) and 0 (width p, scaling element the
    inversion)."""
    if not _is_prime(p):
        raise LatticeError(f"level must be prime, got {p}")
    cusp_inf = CuspDatum(identity_isometry(2), ((1.0,),), 1.0)
    cusp_zero = CuspDatum(embed_sl2r(_S_MATRIX), ((float(p),),), float(p))
    return LatticeModel(f"Gamma0({p})", 2, 2, (cusp_inf, cusp_zero), level=p)


def sl2zi_gaussian() -> LatticeModel:
    cusp = CuspDatum(
        identity_isometry(3), ((1.0, 0.0), (0.0, 1.0)), 1.0
    )
    return LatticeModel("SL2ZiGaussian", 3, 1, (cusp,))


def from_id(name: str) -> LatticeModel:
    key = name.strip().lower().replace("(", "_").replace(")", "")
    if key in ("sl2z", "modular"):
        return sl2z()
    if key.startswith("gamma0_"):
        return gamma0(int(key.split("_", 1)[1]))
    if key in ("gaussian", "sl2zi", "sl2zigaussian"):
        return sl2zi_gaussian()
    raise LatticeError(f"unknown lattice id {name!r}")


# ---------------------------------------------------------------------------
# Totients and Gaussian integer arithmetic
# ---------------------------------------------------------------------------

def totient_table(n: int) -> list[int]:
    """phi(0..n) by sieve; phi(0) = 0 by convention."""
    phi = list(range(n + 1))
    for q in range(2, n + 1):
        if phi[q] == q:  # q prime
            for mult in range(q, n + 1, q):
                phi[mult] -= phi[mult] // q
    return phi


def _factorize(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    m = n
    q = 2
    while q * q <= m:
        while m % q == 0:
            out[q] = out.get(q, 0) + 1
            m //= q
        q += 1
    if m > 1:
        out[m] = out.get(m, 0) + 1
    return out


def gaussian_totient(x: int, y: int) -> int:
    """Number of units of Z[i]/(c) for c = x+iy != 0.

    Multiplicative over the Gaussian prime factorization of c, but computable
    from the rational factorization of the norm: a split rational prime
    contributes two distinct Gaussian primes exactly when it divides both
    coordinates.
    """
    n = x * x + y * y
    if n == 0:
        raise LatticeError("totient of zero")
    phi = n
    g = math.gcd(abs(x), abs(y))
    for p in _factorize(n):
        if p == 2:
            phi = phi // 2  # ramified: single prime of norm 2
        elif p % 4 == 3:
            phi = phi // (p * p) * (p * p - 1)  # inert: norm p^2
        else:
            if g % p == 0:
                phi = phi // (p * p) * (p - 1) * (p - 1)  # both conjugates
            else:
                phi = phi // p * (p - 1)
    return phi


def canonical_associate(x: int, y: int) -> tuple[int, int]:
    """The unit multiple of x+iy in the half-open first quadrant
    (Re > 0, Im >= 0)."""
    if x == 0 and y == 0:
        raise LatticeError("zero has no canonical associate")
    for _ in range(4):
        if x > 0 and y >= 0:
            return x, y
        x, y = -y, x  # multiply by i
    raise AssertionError("unreachable")


def gaussian_ext_gcd(a: complex, b: complex) -> tuple[complex, complex, complex]:
    """(g, u, v) with u*a + v*b = g, g a gcd of a, b in Z[i].

    Inputs and outputs are complex numbers with integer parts; the division
    step rounds each coordinate of the exact quotient to the nearest integer.
    """
    def iround(z: complex) -> complex:
        return complex(round(z.real), round(z.imag))

    r0, r1 = complex(a), complex(b)
    u0, u1 = complex(1), complex(0)
    v0, v1 = complex(0), complex(1)
    while r1 != 0:
        q = iround(r0 / r1)
        r0, r1 = r1, r0 - q * r1
        u0, u1 = u1, u0 - q * u1
        v0, v1 = v1, v0 - q * v1
    return r0, u0, v0


# ---------------------------------------------------------------------------
# Double-coset enumeration
# ---------------------------------------------------------------------------

def _check_lambda_budget(model: LatticeModel, lambda_max: float) -> None:
    cap = _MAX_LAMBDA_GAUSSIAN if model.d == 3 else _MAX_LAMBDA_REAL
    if lambda_max > cap:
        raise EnumerationBudgetError(
            f"lambda_max {lambda_max} exceeds budget {cap} for {model.id}"
        )


def enumerate_double_cosets(
    model: LatticeModel, i: int, j: int, lambda_max: float
) -> DoubleCosetSpectrum:
    """Complete (lambda, multiplicity) spectrum for cusp pair (i, j) with
    lambda <= lambda_max.

    Class counts per frequency, all exact:
      modular group:            lambda = c^2, count phi(c)
      level p, pair (inf,inf):  lambda = c^2 over p | c, count phi(c)
      level p, pair (inf,0):    lambda = d^2 over p∤d, count phi(d)
      level p, pair (0,inf):    lambda = a^2 over p∤a, count phi(a)
      level p, pair (0,0):      lambda = b^2, count phi(p b)
      Gaussian group:           lambda = N(c) over canonical c, count
                                sum of Gaussian totients at that norm
    """
    if not (0 <= i < model.kappa and 0 <= j < model.kappa):
        raise LatticeError(f"cusp indices ({i},{j}) out of range")
    if lambda_max < 0:
        raise LatticeError("lambda_max must be nonnegative")
    _check_lambda_budget(model, lambda_max)

    entries: list[tuple[float, int]] = []
    if model.d == 2:
        cmax = math.isqrt(int(lambda_max))
        phi = totient_table(max(cmax, 1))
        p = model.level
        if model.id == "SL2Z":
            gen = ((c, phi[c]) for c in range(1, cmax + 1))
        elif (i, j) == (0, 0):
            gen = ((c, phi[c]) for c in range(p, cmax + 1, p))
        elif (i, j) in ((0, 1), (1, 0)):
            gen = ((n, phi[n]) for n in range(1, cmax + 1) if n % p != 0)
        else:  # (0-cusp, 0-cusp) pair of the level-p model, lambda = b^2
            tail = totient_table(p * cmax) if cmax >= 1 else [0]
            gen = ((b, tail[p * b]) for b in range(1, cmax + 1))
        entries = [(float(n * n), cnt) for n, cnt in gen if cnt > 0]
    else:
        by_norm: dict[int, int] = {}
        xmax = math.isqrt(int(lambda_max))
        for x in range(1, xmax + 1):
            ymax = math.isqrt(int(lambda_max) - x * x)
            for y in range(0, ymax + 1):
                n = x * x + y * y
                by_norm[n] = by_norm.get(n, 0) + gaussian_totient(x, y)
        entries = [(float(n), by_norm[n]) for n in sorted(by_norm)]
    return DoubleCosetSpectrum((i, j), tuple(entries), float(lambda_max))


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    """(g, u, v) with u*a + v*b = g = gcd(a, b)."""
    r0, r1, u0, u1, v0, v1 = a, b, 1, 0, 0, 1
    while r1:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        u0, u1 = u1, u0 - q * u1
        v0, v1 = v1, v0 - q * v1
    return r0, u0, v0


def _complete_bottom_row(c: int, dd: int) -> np.ndarray:
    # matrix [[a, b], [c, dd]] of det 1; needs gcd(c, dd) = 1
    g, a, v = _ext_gcd(dd, c)  # a*dd + v*c = 1
    if g != 1:
        raise LatticeError("bottom row not coprime")
    return np.array([[a, -v], [c, dd]], dtype=float)


def _complete_top_row(a: int, b: int, p: int) -> np.ndarray:
    # matrix [[a, b], [c, dd]] of det 1 with p | c; needs gcd(a, p*b) = 1
    # (b = 0 forces a = 1); solve a*dd + (p*b)*u = 1, set c = -p*u
    g, dd, u = _ext_gcd(a, p * b)
    if g != 1:
        raise LatticeError("no completion with level-divisible corner")
    return np.array([[a, b], [-p * u, dd]], dtype=float)


def _gaussian_reduce(dd: complex, c: complex) -> complex:
    # canonical representative of dd mod c*Z[i], exact integer arithmetic
    # with half-open rounding cells
    n = int(c.real) ** 2 + int(c.imag) ** 2
    t = dd * c.conjugate()
    qr = (2 * int(t.real) + n) // (2 * n)
    qi = (2 * int(t.imag) + n) // (2 * n)
    return dd - complex(qr, qi) * c


def double_coset_representatives(
    model: LatticeModel, i: int, j: int, lambda_max: float
) -> list[np.ndarray]:
    """One explicit group element per double-coset class with
    lambda <= lambda_max, as exact 2x2 matrices in the defining model.

    Intended for small lambda_max cross-checks; counts must agree with
    enumerate_double_cosets.
    """
    if not (0 <= i < model.kappa and 0 <= j < model.kappa):
        raise LatticeError(f"cusp indices ({i},{j}) out of range")
    if lambda_max > 1e4:
        raise EnumerationBudgetError("representative listing capped at lambda 1e4")

    reps: list[np.ndarray] = []
    if model.d == 2:
        nmax = math.isqrt(int(lambda_max))
        p = model.level
        if model.id == "SL2Z" or (i, j) == (0, 0):
            # classes (c; d mod c), gcd = 1, level | c
            step = 1 if model.id == "SL2Z" else p
            for c in range(step, nmax + 1, step):
                for dd in range(c):
                    if math.gcd(c, dd) == 1:
                        reps.append(_complete_bottom_row(c, dd))
        elif (i, j) == (0, 1):
            # classes (d; p*c'' with c'' mod d), gcd(c'', d) = 1, p does not
            # divide d; lambda = d^2
            for dd in range(1, nmax + 1):
                if dd % p == 0:
                    continue
                for cpp in range(dd) if dd > 1 else [0]:
                    if math.gcd(cpp, dd) == 1:
                        reps.append(_complete_bottom_row(p * cpp, dd))
        elif (i, j) == (1, 0):
            # classes (a; b mod a), gcd(a, b) = 1, p does not divide a
            for a in range(1, nmax + 1):
                if a % p == 0:
                    continue
                for b in range(a) if a > 1 else [0]:
                    if math.gcd(a, b) == 1 or (a == 1 and b == 0):
                        reps.append(_complete_top_row(a, b, p))
        else:
            # (0-cusp, 0-cusp): classes (b; a mod p*b), gcd(a, p*b) = 1
            for b in range(1, nmax + 1):
                for a in range(p * b):
                    if math.gcd(a, p * b) == 1:
                        reps.append(_complete_top_row(a, b, p))
    else:
        xmax = math.isqrt(int(lambda_max))
        for x in range(1, xmax + 1):
            ymax = math.isqrt(int(lambda_max) - x * x)
            for y in range(0, ymax + 1):
                c = complex(x, y)
                n = x * x + y * y
                residues: set[complex] = set()
                for re in range(-n, n + 1):
                    for im in range(-n, n + 1):
                        residues.add(_gaussian_reduce(complex(re, im), c))
                for dd in sorted(residues, key=lambda z: (z.real, z.imag)):
                    g, u, v = gaussian_ext_gcd(dd, c)
                    if g.real ** 2 + g.imag ** 2 != 1.0:
                        continue
                    # u*dd + v*c = g with g a unit; divide through
                    a, mb = u / g, v / g
                    reps.append(np.array([[a, -mb], [c, dd]], dtype=complex))
    return reps


# ---------------------------------------------------------------------------
# Bounded element enumeration (oracle feeder)
# ---------------------------------------------------------------------------

def enumerate_group_elements(
    model: LatticeModel, height_bound: int
) -> list[np.ndarray]:
    """All group elements with entries bounded by height_bound in the 2x2
    model, one representative per +-pair, in deterministic order.

    Real models: integer entries in [-B, B]; Gaussian: both coordinates of
    every entry in [-B, B].  The returned list is closed under inverse.
    Loops run over (a, b, c) and solve the determinant for d, so the cost is
    cubic in the bound.
    """
    B = int(height_bound)
    if B < 0:
        raise LatticeError("height_bound must be nonnegative")
    if model.d == 2:
        if B > _MAX_ENTRY_BOUND_REAL:
            raise EnumerationBudgetError(
                f"entry bound {B} exceeds budget {_MAX_ENTRY_BOUND_REAL}"
            )
        p = model.level
        seen: set[tuple[int, ...]] = set()

        def keep(a: int, b: int, c: int, dd: int) -> None:
            key = (a, b, c, dd)
            neg = (-a, -b, -c, -dd)
            seen.add(max(key, neg))

        rng = range(-B, B + 1)
        for a in rng:
            for b in rng:
                for c in rng:
                    if c % p != 0:
                        continue
                    if a == 0:
                        if b * c == -1:
                            for dd in rng:
                                keep(a, b, c, dd)
                        continue
                    num = 1 + b * c
                    if num % a == 0 and abs(num // a) <= B:
                        keep(a, b, c, num // a)
        return [
            np.array([[k[0], k[1]], [k[2], k[3]]], dtype=float)
            for k in sorted(seen)
        ]
    if B > _MAX_ENTRY_BOUND_GAUSSIAN:
        raise EnumerationBudgetError(
            f"entry bound {B} exceeds budget {_MAX_ENTRY_BOUND_GAUSSIAN}"
        )
    vals = [
        (re, im) for re in range(-B, B + 1) for im in range(-B, B + 1)
    ]
    seen_c: set[tuple[int, ...]] = set()

    def keep_c(a, b, c, dd) -> None:
        key = a + b + c + dd  # concatenated coordinate tuples
        neg = tuple(-v for v in key)
        seen_c.add(max(key, neg))

    for ar, ai in vals:
        for br, bi in vals:
            for cr, ci in vals:
                # 1 + b*c with exact integer coordinates
                nr = 1 + br * cr - bi * ci
                ni = br * ci + bi * cr
                na = ar * ar + ai * ai
                if na == 0:
                    if (nr, ni) == (0, 0):
                        for dr, di in vals:
                            keep_c((ar, ai), (br, bi), (cr, ci), (dr, di))
                    continue
                # d = (1 + b*c)/a in Z[i]: multiply by conjugate
                dr_num = nr * ar + ni * ai
                di_num = ni * ar - nr * ai
                if dr_num % na or di_num % na:
                    continue
                dr, di = dr_num // na, di_num // na
                if abs(dr) <= B and abs(di) <= B:
                    keep_c((ar, ai), (br, bi), (cr, ci), (dr, di))
    out = []
    for k in sorted(seen_c):
        out.append(np.array(
            [[complex(k[0], k[1]), complex(k[2], k[3])],
             [complex(k[4], k[5]), complex(k[6], k[7])]],
        ))
    return out
