"""Dense complex matrix primitives: determinants, Pfaffians, Schur splits.

All routines accept anything ``numpy.asarray`` understands and work in
complex double precision.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import DimensionMismatch, NotAntisymmetric, SingularBlock

SINGULAR_COND = 1e12


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def _require_square(a: np.ndarray) -> None:
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"matrix is not square: {a.shape}")


def determinant(m) -> complex:
    """Determinant by row-pivoted LU with explicit sign tracking."""
    a = as_matrix(m)
    _require_square(a)
    n = a.shape[0]
    if n == 0:
        return 1.0 + 0j
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(a, check_finite=False)
    swaps = int(np.count_nonzero(piv != np.arange(n)))
    sign = -1.0 if swaps % 2 else 1.0
    return complex(sign * np.prod(np.diag(lu)))


def determinant_extended(m) -> complex:
    """Determinant by partial-pivoted elimination in long double.

    For small, badly conditioned structured matrices whose entries are
    themselves formed in long double (a few extra digits over LAPACK).
    """
    a = np.array(m, dtype=np.clongdouble)
    if a.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got shape {a.shape}")
    _require_square(a)
    n = a.shape[0]
    det = np.clongdouble(1)
    for j in range(n):
        piv = j + int(np.argmax(np.abs(a[j:, j])))
        if a[piv, j] == 0:
            return 0j
        if piv != j:
            a[[j, piv]] = a[[piv, j]]
            det = -det
        det = det * a[j, j]
        if j + 1 < n:
            f = a[j + 1:, j] / a[j, j]
            a[j + 1:, j + 1:] -= f[:, None] * a[j, j + 1:][None, :]
    return complex(det)


def antisymmetry_error(m) -> float:
    """Relative max-norm of m + m^T."""
    a = as_matrix(m)
    if a.size == 0:
        return 0.0
    scale = max(1.0, float(np.max(np.abs(a))))
    return float(np.max(np.abs(a + a.T))) / scale


def pfaffian(m, tol: float = 1e-12) -> complex:
    """Pfaffian via Parlett-Reid skew tridiagonalization with pivoting.

    Convention: Pf([[0, a], [-a, 0]]) = a.
    """
    a = as_matrix(m).copy()
    _require_square(a)
    n = a.shape[0]
    if n % 2:
        raise DimensionMismatch("Pfaffian needs an even dimension")
    if antisymmetry_error(a) > tol:
        raise NotAntisymmetric(f"|m + m^T| = {antisymmetry_error(a):.3e} exceeds {tol}")
    if n == 0:
        return 1.0 + 0j
    pf = 1.0 + 0j
    for k in range(0, n - 1, 2):
        kp = k + 1 + int(np.argmax(np.abs(a[k + 1:, k])))
        if kp != k + 1:
            a[[k + 1, kp], :] = a[[kp, k + 1], :]
            a[:, [k + 1, kp]] = a[:, [kp, k + 1]]
            pf = -pf
        if a[k + 1, k] == 0:
            return 0j
        pf *= a[k, k + 1]
        if k + 2 < n:
            tau = a[k, k + 2:] / a[k, k + 1]
            col = a[k + 2:, k + 1].copy()
            a[k + 2:, k + 2:] += np.outer(tau, col) - np.outer(col, tau)
    return complex(pf)


@dataclass(frozen=True)
class ConditionedSolve:
    solution: np.ndarray
    condition_estimate: float


def condition_number(m) -> float:
    a = as_matrix(m)
    if a.size == 0:
        return 1.0
    with np.errstate(all="ignore"):
        c = float(np.linalg.cond(a))
    return c if np.isfinite(c) else math.inf


def solve(m, rhs, max_cond: float = SINGULAR_COND) -> ConditionedSolve:
    """Solve m x = rhs, refusing matrices with condition >= max_cond."""
    a = as_matrix(m)
    _require_square(a)
    b = np.asarray(rhs, dtype=complex)
    cond = condition_number(a)
    if cond >= max_cond:
        raise SingularBlock(f"condition estimate {cond:.3e} >= {max_cond:.0e}")
    if a.shape[0] == 0:
        return ConditionedSolve(np.zeros(b.shape, dtype=complex), 1.0)
    return ConditionedSolve(np.linalg.solve(a, b), cond)


def schur_det_split(a, b, c, d) -> complex:
    """det([[a, b], [c, d]]) = det(d) det(a - b d^-1 c)."""
    a = np.asarray(a, dtype=complex)
    d = as_matrix(d)
    _require_square(d)
    p, q = a.shape[0], d.shape[0]
    b = np.asarray(b, dtype=complex).reshape(p, q)
    c = np.asarray(c, dtype=complex).reshape(q, p)
    if a.shape != (p, p):
        raise DimensionMismatch("upper-left block must be square")
    try:
        x = solve(d, c).solution
    except SingularBlock as exc:
        raise SingularBlock(f"lower-right block is singular: {exc}") from None
    return determinant(d) * determinant(a - b @ x)


def compensated_dot(u, v) -> complex:
    """Inner product sum(u*v) with exactly rounded real/imag accumulation."""
    prod = np.asarray(u, dtype=complex).ravel() * np.asarray(v, dtype=complex).ravel()
    return complex(math.fsum(prod.real), math.fsum(prod.imag))


def bilinear(left, mat, right) -> complex:
    """left @ mat^-1 @ right with a conditioned solve and compensated sum."""
    x = solve(mat, right).solution
    return compensated_dot(left, x)


def permutation_sign(perm) -> int:
    perm = list(perm)
    sign, seen = 1, [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


@dataclass
class CorrelationResult:
    """A computed value (scalar or grid) with method tag and error estimate."""

    value: complex | np.ndarray
    error_estimate: float = 0.0
    method: str = ""
    meta: dict = None

    def __post_init__(self):
        if self.meta is None:
            self.meta = {}

    def __complex__(self) -> complex:
        return complex(self.value)
