"""Hyperbolic d-space in two models and the isometry group action.

Points live on the upper sheet of the hyperboloid q(xi) = -1 in R^{d+1}
with quadratic form xi_0^2 + ... + xi_{d-1}^2 - xi_d^2, or equivalently in
the upper half-space R^{d-1} x R+.  Isometries are Lorentz matrices acting
linearly on the hyperboloid; the half-space picture is only an interface.

The central computational fact: for a Lorentz matrix A the height of the
image point satisfies y(z)/y(A.z) = lambda * (y^2 + |x + eta|^2) with
lambda > 0, or is the constant alpha when the first row+last row combination
degenerates (parabolic-at-infinity case).  action_params extracts
(lambda, eta) or alpha directly from the matrix entries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


class GeometryError(Exception):
    pass


@lru_cache(maxsize=None)
def minkowski_form(d: int) -> np.ndarray:
    J = np.eye(d + 1)
    J[d, d] = -1.0
    J.flags.writeable = False
    return J


def lorentz_residual(entries: np.ndarray) -> float:
    """inf-norm of A^T J A - J, the defect from the Lorentz condition."""
    A = np.asarray(entries, dtype=float)
    n = A.shape[0]
    J = minkowski_form(n - 1)
    return float(np.max(np.abs(A.T @ J @ A - J)))


def lorentz_check(entries: np.ndarray, tol: float = 1e-9) -> bool:
    """True iff A^T J A = J within tol (scaled by entry size squared, since
    the residual is quadratic in the entries) and A keeps the upper sheet."""
    A = np.asarray(entries, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 3:
        raise GeometryError(f"expected square matrix of size >= 3, got {A.shape}")
    scale = 1.0 + float(np.max(np.abs(A))) ** 2
    if lorentz_residual(A) >= tol * scale:
        return False
    return A[-1, -1] > 0.0


@dataclass(frozen=True)
class UpperHalfSpacePoint:
    """Point (x, y) with x in R^{d-1} and height y > 0."""

    x: tuple[float, ...]
    y: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))
        object.__setattr__(self, "y", float(self.y))
        if not self.y > 0.0:
            raise GeometryError(f"height must be positive, got {self.y}")

    @property
    def d(self) -> int:
        return len(self.x) + 1


class IsometryMatrix:
    """Validated Lorentz matrix of determinant one preserving the upper sheet."""

    __slots__ = ("entries", "d")

    def __init__(self, entries: np.ndarray, tol: float = 1e-9):
        A = np.array(entries, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise GeometryError(f"expected square matrix, got shape {A.shape}")
        d = A.shape[0] - 1
        if d < 2:
            raise GeometryError("dimension must be at least 2")
        if not lorentz_check(A, tol):
            raise GeometryError("matrix is not Lorentz or flips the sheet")
        scale = 1.0 + float(np.max(np.abs(A)))
        if abs(np.linalg.det(A) - 1.0) > tol * scale ** (d + 1):
            raise GeometryError("determinant must be 1")
        A.flags.writeable = False
        self.entries = A
        self.d = d

    def __matmul__(self, other: "IsometryMatrix") -> "IsometryMatrix":
        return IsometryMatrix(self.entries @ other.entries)

    def inverse(self) -> "IsometryMatrix":
        # for Lorentz A the inverse is J A^T J, cheaper and more stable
        # than generic inversion
        J = minkowski_form(self.d)
        return IsometryMatrix(J @ self.entries.T @ J)

    def __repr__(self) -> str:
        return f"IsometryMatrix(d={self.d})"


def identity_isometry(d: int) -> IsometryMatrix:
    return IsometryMatrix(np.eye(d + 1))


def iota(xi: np.ndarray) -> UpperHalfSpacePoint:
    """Hyperboloid -> upper half-space: x = 2 xi_mid/(xi_0+xi_d),
    y = 2/(xi_0+xi_d).  On the upper sheet xi_0+xi_d > 0 always."""
    v = np.asarray(xi, dtype=float)
    d = v.shape[0] - 1
    q = float(np.dot(v[:d], v[:d]) - v[d] * v[d])
    if abs(q + 1.0) > 1e-8 * (1.0 + float(np.dot(v, v))):
        raise GeometryError(f"point not on hyperboloid (q={q})")
    if v[d] <= 0.0:
        raise GeometryError("point on lower sheet")
    denom = v[0] + v[d]
    return UpperHalfSpacePoint(tuple(2.0 * v[1:d] / denom), 2.0 / denom)


def iota_inv(z: UpperHalfSpacePoint) -> np.ndarray:
    """Upper half-space -> hyperboloid, inverse of iota."""
    x = np.asarray(z.x, dtype=float)
    y = z.y
    quarter = 0.25 * (y * y + float(np.dot(x, x)))
    xi = np.empty(z.d + 1)
    xi[0] = (1.0 - quarter) / y
    xi[1 : z.d] = x / y
    xi[z.d] = (1.0 + quarter) / y
    return xi


@dataclass(frozen=True)
class ActionParams:
    """Height-action data: either lam > 0 with a shift eta, or the constant
    ratio alpha > 0 when the action fixes infinity."""

    lam: float
    eta: tuple[float, ...] | None
    alpha: float | None

    def __post_init__(self) -> None:
        if self.lam > 0.0:
            if self.eta is None or self.alpha is not None:
                raise GeometryError("lam > 0 requires eta and excludes alpha")
        else:
            if self.alpha is None or self.eta is not None:
                raise GeometryError("lam = 0 requires alpha and excludes eta")

    def height_ratio(self, z: UpperHalfSpacePoint) -> float:
        """Predicted y(z)/y(A.z)."""
        if self.lam > 0.0:
            shifted = [xv + ev for xv, ev in zip(z.x, self.eta)]
            return self.lam * (z.y * z.y + math.fsum(v * v for v in shifted))
        return self.alpha


def action_params(A: IsometryMatrix) -> ActionParams:
    """Extract (lambda, eta) or alpha from the matrix: with
    alpha_j = a_{0j} + a_{dj}, lambda = (alpha_d - alpha_0)/8 and
    eta_j = 2 alpha_j/(alpha_d - alpha_0); the degenerate branch
    alpha_0 = alpha_d forces alpha_j = 0 for the middle indices and a
    constant height ratio."""
    d = A.d
    M = A.entries
    alpha = M[0, :] + M[d, :]
    norm = float(np.max(np.abs(M)))
    gap = alpha[d] - alpha[0]
    if abs(gap) < 1e-12 * (1.0 + norm):
        mid = alpha[1:d]
        if np.max(np.abs(mid), initial=0.0) > 1e-9 * (1.0 + norm):
            raise GeometryError(
                "degenerate branch with nonzero middle coefficients; "
                "input is not a Lorentz matrix"
            )
        const = 0.5 * (alpha[0] + alpha[d])
        if const <= 0.0:
            raise GeometryError("nonpositive constant height ratio")
        return ActionParams(lam=0.0, eta=None, alpha=const)
    lam = gap / 8.0
    if lam <= 0.0:
        raise GeometryError("negative lambda: matrix does not preserve heights")
    # consistency identity forced by the Lorentz condition
    lhs = alpha[d] + alpha[0]
    rhs = float(np.dot(alpha[1:d], alpha[1:d])) / gap
    if abs(lhs - rhs) > 1e-9 * (1.0 + norm) ** 2:
        raise GeometryError(
            f"action identity violated ({lhs} vs {rhs}); non-Lorentz input"
        )
    eta = tuple(2.0 * alpha[j] / gap for j in range(1, d))
    return ActionParams(lam=float(lam), eta=eta, alpha=None)


def apply_isometry(A: IsometryMatrix, z: UpperHalfSpacePoint) -> UpperHalfSpacePoint:
    if A.d != z.d:
        raise GeometryError(f"dimension mismatch: matrix d={A.d}, point d={z.d}")
    return iota(A.entries @ iota_inv(z))


def hyperbolic_distance(z1: UpperHalfSpacePoint, z2: UpperHalfSpacePoint) -> float:
    if z1.d != z2.d:
        raise GeometryError("dimension mismatch")
    dx = math.fsum((a - b) ** 2 for a, b in zip(z1.x, z2.x))
    dy = (z1.y - z2.y) ** 2
    return math.acosh(1.0 + (dx + dy) / (2.0 * z1.y * z2.y))
