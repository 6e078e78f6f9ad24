"""k-point correlation functions of Hermitian ensembles in an external field
and of intermediate ensembles (random H plus random H0 of another class).

Conventions.  The random matrix has a characteristic function that
factorizes over eigenvalues, Phi(r) = E[exp(i r x)] per eigenvalue slot:
Gaussian Phi(r) = exp(-r^2/(4c)) (density sqrt(c/pi) exp(-c x^2)) and
Laguerre Phi(r) = (1 - i r/c)^(-(N+nu)) (Gamma density of shape N+nu).  With
w(x) the corresponding density and w^(n) its derivatives,

    r1(xa, xb) = 2 pi (N-1)! sum_{n<N} w^(n)(xa) p_n(xb) / n!
    r2(t, xa)  = 2 pi i [w(xa - t) - sum_{n<N} (-t)^n w^(n)(xa) / n!]
    r3(a, xb)  = 2 pi p_{a-1}(xb)

where p_n are the monic polynomials biorthogonal to w^(n) up to sign.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from .core_numerics import CorrelationResult, antisymmetry_error, determinant, pfaffian
from .errors import (DegenerateField, InvalidParameter, KExceedsN, NotAntisymmetric, SeriesNonConvergent,
                     SingularMomentMatrix, UnsupportedEnsemble)
from .weights_moments import WeightFunction, ordered_pair_matrix, rule_1d

SERIES_MAX_TERMS = 400


# ------------------------------------------------------------ polynomials

def monic_laguerre(n: int, a: float, y) -> np.ndarray:
    """Monic associated Laguerre polynomial pi_n^(a)(y) by its recurrence."""
    y = np.asarray(y, dtype=float)
    p0 = np.ones_like(y)
    if n == 0:
        return p0
    p1 = y - (a + 1.0)
    for j in range(1, n):
        p0, p1 = p1, (y - (2 * j + a + 1.0)) * p1 - j * (j + a) * p0
    return p1


def monic_hermite(n: int, c: float, x) -> np.ndarray:
    """Monic polynomials orthogonal to exp(-c x^2)."""
    x = np.asarray(x, dtype=float)
    p0 = np.ones_like(x)
    if n == 0:
        return p0
    p1 = x.copy()
    for j in range(1, n):
        p0, p1 = p1, x * p1 - j / (2.0 * c) * p0
    return p1


# --------------------------------------------------- characteristic factor

@dataclass(frozen=True)
class CharacteristicFactor:
    """Factorizing characteristic function of the random-matrix ensemble.

    ``wick_angle`` records the rotation of the integration ray used in the
    derivation; none of the closed forms depend on it.
    """
    kind: str
    c: float = 1.0
    nu: float = 0.0
    wick_angle: float = 0.0

    def __post_init__(self):
        if self.kind not in ("gaussian", "laguerre"):
            raise UnsupportedEnsemble(f"no closed-form entries for ensemble {self.kind!r}")
        if not self.c > 0:
            raise InvalidParameter("c must be positive")
        if self.kind == "laguerre" and self.nu < 0:
            raise InvalidParameter("nu must be nonnegative")

    def shape(self, n: int) -> float:
        return n + self.nu

    def phi(self, r, n: int) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if self.kind == "gaussian":
            return np.exp(-r * r / (4.0 * self.c)).astype(complex)
        return (1.0 - 1j * r / self.c) ** (-self.shape(n))

    def density_derivative(self, order: int, x, n: int) -> np.ndarray:
        """d^order/dx^order of the one-slot density (Rodrigues form)."""
        x = np.asarray(x, dtype=float)
        c = self.c
        if self.kind == "gaussian":
            base = math.sqrt(c / math.pi) * np.exp(-c * x * x)
            return (-2.0 * c) ** order * monic_hermite(order, c, x) * base
        m = self.shape(n)
        out = np.zeros_like(x)
        # right-continuous at the hard edge when the power there is zero
        pos = x >= 0 if m - 1 - order == 0 else x > 0
        y = c * x[pos]
        logc = m * math.log(c) - gammaln(m) + (order + 1 - m) * math.log(c)
        out[pos] = ((-1.0) ** order * math.exp(logc) * monic_laguerre(order, m - 1 - order, y)
                    * y ** (m - 1 - order) * np.exp(-y))
        return out

    def polynomial(self, order: int, x, n: int) -> np.ndarray:
        """p_order(x), normalized so that int w^(j) p_l / j! = (-1)^j delta_jl up to the r1 prefactor."""
        x = np.asarray(x, dtype=float)
        if self.kind == "gaussian":
            return (-1.0) ** order * monic_hermite(order, self.c, x)
        m = self.shape(n)
        return (-1.0) ** order * self.c ** (-order) * monic_laguerre(order, m - order, self.c * x)

    @property
    def label(self) -> str:
        return "gaussian" if self.kind == "gaussian" else "laguerre"


def characteristic_factor(kind: str, params: dict | None = None) -> CharacteristicFactor:
    params = dict(params or {})
    name = kind.lower()
    aliases = {"gue": "gaussian", "gaussian": "gaussian", "hermite": "gaussian",
               "laguerre": "laguerre", "lue": "laguerre", "chiral": "laguerre", "wishart": "laguerre"}
    if name not in aliases:
        raise UnsupportedEnsemble(f"no closed-form entries for ensemble {kind!r}")
    return CharacteristicFactor(aliases[name], float(params.get("c", 1.0)), float(params.get("nu", 0.0)),
                                float(params.get("wick_angle", 0.0)))


@dataclass(frozen=True)
class ExternalFieldSpec:
    N: int
    alpha: float
    field_eigenvalues: tuple
    ensemble: CharacteristicFactor = field(default_factory=lambda: CharacteristicFactor("gaussian"))

    def __post_init__(self):
        if self.N < 1:
            raise InvalidParameter("N must be positive")
        e = tuple(float(v) for v in self.field_eigenvalues)
        if self.alpha != 0 and len(e) != self.N:
            raise InvalidParameter(f"need {self.N} field eigenvalues, got {len(e)}")
        object.__setattr__(self, "field_eigenvalues", e)
        object.__setattr__(self, "alpha", float(self.alpha))

    @property
    def E(self) -> np.ndarray:
        return np.asarray(self.field_eigenvalues, dtype=float)

    def check_field(self, tol: float = 1e-12):
        if self.alpha == 0:
            return
        e = self.E
        scale = max(1.0, float(np.max(np.abs(e))))
        for i in range(self.N):
            for j in range(i + 1, self.N):
                if abs(e[i] - e[j]) <= tol * scale:
                    raise DegenerateField(f"field eigenvalues {i} and {j} coincide")

    @classmethod
    def from_dict(cls, data: dict) -> "ExternalFieldSpec":
        try:
            n = int(data["N"])
            ens = dict(data.get("ensemble", {"kind": "gaussian"}))
            kind = ens.pop("kind")
            return cls(n, float(data.get("alpha", 0.0)), tuple(data.get("field", ())), characteristic_factor(kind, ens))
        except KeyError as exc:
            raise InvalidParameter(f"field spec misses key {exc}") from None


# ----------------------------------------------------------------- entries

def r1_entry(spec: ExternalFieldSpec, x_a, x_b) -> np.ndarray:
    f, n = spec.ensemble, spec.N
    x_a, x_b = np.asarray(x_a, dtype=float), np.asarray(x_b, dtype=float)
    tot = np.zeros(np.broadcast(x_a, x_b).shape)
    for j in range(n):
        tot = tot + f.density_derivative(j, x_a, n) * f.polynomial(j, x_b, n) / math.factorial(j)
    return 2 * math.pi * math.factorial(n - 1) * tot


def _derivatives_at(spec: ExternalFieldSpec, x: float, upto: int) -> np.ndarray:
    f, n = spec.ensemble, spec.N
    xs = np.array([x])
    return np.array([float(f.density_derivative(j, xs, n)[0]) for j in range(upto)])


def _remainder_series(spec: ExternalFieldSpec, t: np.ndarray, x: float, deriv: int) -> np.ndarray:
    """(-1)^deriv sum_{n>=N} (-t)^(n-deriv) w^(n)(x) / (n-deriv)!, vectorized in t."""
    n = spec.N
    f = spec.ensemble
    xs = np.array([x])
    tot = np.zeros_like(t)
    power = (-t) ** (n - deriv) / math.factorial(n - deriv)
    small = 0
    for j in range(n, n + SERIES_MAX_TERMS):
        term = power * float(f.density_derivative(j, xs, n)[0])
        tot = tot + term
        if not np.all(np.isfinite(tot)):
            break
        tiny = np.all(np.abs(term) <= 1e-17 * np.maximum(np.abs(tot), 1e-300))
        small = small + 1 if tiny else 0
        if small >= 3:
            return (-1) ** deriv * tot
        power = power * (-t) / (j + 1 - deriv)
    raise SeriesNonConvergent(f"remainder series at x={x} did not converge")


def _series_mask(spec: ExternalFieldSpec, t: np.ndarray, x: float) -> np.ndarray:
    f = spec.ensemble
    if f.kind == "gaussian":
        return np.abs(t) * math.sqrt(f.c) < 0.25
    if x <= 0:
        return np.zeros(t.shape, dtype=bool)
    return np.abs(t) < min(0.5 * x, 0.25 / f.c)


def r2_values(spec: ExternalFieldSpec, field_values, x_a: float, deriv: int = 0) -> np.ndarray:
    """r2(t, x_a) for an array of t = alpha E (d/dt of it for ``deriv=1``).

    Near t = 0 the truncated Taylor difference cancels; the remainder series
    is summed there instead.
    """
    f, n = spec.ensemble, spec.N
    t = np.atleast_1d(np.asarray(field_values, dtype=float))
    x = float(x_a)
    out = np.zeros(t.shape)
    if f.kind == "laguerre" and x < 0:
        # every derivative at x vanishes; only the shifted term survives
        sign = 1.0 if deriv == 0 else -1.0
        return 2j * math.pi * sign * f.density_derivative(deriv, x - t, n)
    # r2 vanishes to order N at t = 0 (its t-derivative to order N-1)
    zero = (t == 0.0) if (deriv == 0 or n > 1) else np.zeros(t.shape, dtype=bool)
    mask = _series_mask(spec, t, x) & ~zero
    rest = ~mask & ~zero
    if np.any(mask):
        out[mask] = _remainder_series(spec, t[mask], x, deriv)
    if np.any(rest):
        tr = t[rest]
        d = _derivatives_at(spec, x, n)
        if deriv == 0:
            val = f.density_derivative(0, x - tr, n)
            for j in range(n):
                val = val - (-tr) ** j / math.factorial(j) * d[j]
        else:
            val = -f.density_derivative(1, x - tr, n)
            for j in range(1, n):
                val = val + (-tr) ** (j - 1) / math.factorial(j - 1) * d[j]
        out[rest] = val
    return 2j * math.pi * out


def r2_entry(spec: ExternalFieldSpec, field_value: float, x_a: float, deriv: int = 0) -> complex:
    """r2(t, x_a) at t = field_value (already multiplied by alpha)."""
    return complex(r2_values(spec, [field_value], x_a, deriv)[0])


def r3_entry(spec: ExternalFieldSpec, a: int, x_b) -> np.ndarray:
    if not 1 <= a <= spec.N:
        raise InvalidParameter(f"row index a={a} outside 1..{spec.N}")
    return 2 * math.pi * spec.ensemble.polynomial(a - 1, x_b, spec.N)


def _prefactor(k: int) -> complex:
    return 1j ** k / (2 * math.pi) ** (2 * k)


def _r1_block(spec: ExternalFieldSpec, xs: np.ndarray) -> np.ndarray:
    return r1_entry(spec, xs[:, None], xs[None, :]).astype(complex)


# ------------------------------------------------------------ fixed field

def rk_correlation(spec: ExternalFieldSpec, points: Sequence[float]) -> CorrelationResult:
    """k-point correlation function R_k(x_1..x_k) for a fixed external field."""
    xs = np.asarray(points, dtype=float).ravel()
    k, n = xs.size, spec.N
    if k > n:
        raise KExceedsN(f"k={k} exceeds N={n}")
    if k == 0:
        return CorrelationResult(1.0 + 0j, 0.0, "external-field")
    if spec.alpha == 0.0:
        val = determinant(_r1_block(spec, xs) / (2 * math.pi * math.factorial(n - 1)))
        return CorrelationResult(complex(val), 0.0, "external-field:alpha0")
    spec.check_field()
    e, alpha = spec.E, spec.alpha
    rho = -2j * math.pi / math.factorial(n - 1)
    m = np.zeros((k + n, k + n), dtype=complex)
    m[:k, :k] = rho * _r1_block(spec, xs)
    for a in range(k):
        m[a, k:] = r2_values(spec, alpha * e, xs[a])
    # the field rows are divided by alpha^j, which turns Delta(alpha E) into Delta(E)
    for j in range(n):
        m[k + j, :k] = r3_entry(spec, j + 1, xs) / alpha ** j
        m[k + j, k:] = (-e) ** j
    vdm = math.prod(e[i] - e[j] for i in range(n) for j in range(i + 1, n))
    val = _prefactor(k) * determinant(m) / vdm
    return CorrelationResult(complex(val), 0.0, "external-field", {"k": k, "N": n})


def christoffel_darboux_laguerre(spec: ExternalFieldSpec, x, y) -> np.ndarray:
    """Closed CD form of the alpha=0 Laguerre kernel (diagonal by the derivative form)."""
    f, n = spec.ensemble, spec.N
    if f.kind != "laguerre":
        raise UnsupportedEnsemble("CD closed form implemented for Laguerre")
    c, nu = f.c, f.nu
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    pn = lambda j, v: monic_laguerre(j, nu, c * v)
    norm = math.exp(-gammaln(n) - gammaln(n + nu))
    pref = np.where(x > 0, np.abs(c * x) ** nu * np.exp(-c * x), 0.0)
    diff = x - y
    near = np.abs(diff) < 1e-9 * (1 + np.abs(x))
    safe = np.where(near, 1.0, diff)
    num = pn(n, x) * pn(n - 1, y) - pn(n - 1, x) * pn(n, y)
    # derivative form: (pi_N' pi_{N-1} - pi_{N-1}' pi_N)(x) with pi' from d/dy pi_j(cy)
    dpn = lambda j, v: c * j * monic_laguerre(j - 1, nu + 1, c * v) if j > 0 else np.zeros_like(v)
    dnum = dpn(n, x) * pn(n - 1, x) - dpn(n - 1, x) * pn(n, x)
    core = np.where(near, dnum, num / safe)
    return pref * core * norm


# -------------------------------------------------- intermediate ensembles

@dataclass(frozen=True)
class IntermediateSpec:
    """H = A + alpha H0 with A from ``ensemble`` and H0 distributed with
    eigenvalue weight ``h0_weight`` in the symmetry class ``h0_kind``."""
    N: int
    alpha: float
    ensemble: CharacteristicFactor
    h0_weight: WeightFunction
    h0_kind: str = "unitary"

    def __post_init__(self):
        if self.h0_kind not in ("unitary", "quaternion", "real"):
            raise InvalidParameter(f"unknown H0 class {self.h0_kind!r}")
        if self.alpha == 0:
            raise InvalidParameter("intermediate ensembles need alpha != 0")
        if self.h0_kind == "quaternion" and self.N % 2:
            raise InvalidParameter("quaternion H0 needs even N = 2Q")
        if not self.h0_weight.real_support:
            raise UnsupportedEnsemble("H0 weight must live on a real 1-D support")

    @property
    def chi(self) -> int:
        return self.N % 2 if self.h0_kind == "real" else 0

    def entry_spec(self) -> ExternalFieldSpec:
        # the entries depend on the field only through their explicit argument
        return ExternalFieldSpec(self.N, 0.0, (), self.ensemble)


@dataclass
class IntermediateBlocks:
    C: np.ndarray          # (k+N or k+N+chi) x k border
    A: np.ndarray          # antisymmetric or unitary moment block
    error: float
    kind: str


def _field_funcs(spec: IntermediateSpec, xs: np.ndarray, deriv: int = 0):
    fs, n, k, alpha = spec.entry_spec(), spec.N, xs.size, spec.alpha

    def funcs(e):
        e = np.asarray(e, dtype=float)
        out = np.zeros((k + n, e.size), dtype=complex)
        for a in range(k):
            out[a] = r2_values(fs, alpha * e, xs[a], deriv) * (alpha if deriv else 1.0)
        for j in range(n):
            if deriv == 0:
                out[k + j] = (-e) ** j
            elif j > 0:
                out[k + j] = -j * (-e) ** (j - 1)
        return out
    return funcs


def _e_integral(w: WeightFunction, integrand, breaks: Sequence[float], rtol: float = 1e-11):
    """int w(E) integrand(E) dE with composite rules refined until stable."""
    width, order, prev = 1.0, 16, None
    for _ in range(6):
        z, wt, _ = rule_1d(w, width, order, x_breaks=breaks)
        cur = integrand(np.real(z)) @ wt
        if prev is not None:
            err = float(np.max(np.abs(cur - prev)))
            if err <= rtol * max(1.0, float(np.max(np.abs(cur)))):
                return cur, err
        prev, width, order = cur, width / 2, order + 4
    return cur, err


def assemble_intermediate(spec: IntermediateSpec, points: Sequence[float]) -> IntermediateBlocks:
    xs = np.asarray(points, dtype=float).ravel()
    k, n, alpha = xs.size, spec.N, spec.alpha
    fs = spec.entry_spec()
    rho = -2j * math.pi / math.factorial(n - 1)
    c = np.zeros((k + n, k), dtype=complex)
    c[:k] = rho * _r1_block(fs, xs)
    for j in range(n):
        c[k + j] = r3_entry(fs, j + 1, xs) / alpha ** j
    breaks = [x / alpha for x in xs]
    f0 = _field_funcs(spec, xs)
    if spec.h0_kind == "unitary":
        x, err = _e_integral(spec.h0_weight, lambda e: np.einsum("ae,je->aje", f0(e), f0(e)[k:]).reshape((k + n) * n, -1),
                             breaks)
        return IntermediateBlocks(c, x.reshape(k + n, n), err, "unitary")
    if spec.h0_kind == "quaternion":
        f1 = _field_funcs(spec, xs, deriv=1)

        def integrand(e):
            v, d = f0(e), f1(e)
            return (np.einsum("ae,be->abe", v, d) - np.einsum("ae,be->abe", d, v)).reshape((k + n) ** 2, -1)
        a, err = _e_integral(spec.h0_weight, integrand, breaks)
        return IntermediateBlocks(c, a.reshape(k + n, k + n), err, "quaternion")
    a, err = ordered_pair_matrix(spec.h0_weight, f0, breaks)
    if spec.chi:
        u, err_u = _e_integral(spec.h0_weight, f0, breaks)
        full = np.zeros((k + n + 1, k + n + 1), dtype=complex)
        full[:-1, :-1] = a
        full[:-1, -1] = u
        full[-1, :-1] = -u
        a, err = full, max(err, err_u)
        c = np.vstack([c, np.zeros((1, k))])
    return IntermediateBlocks(c, a, err, "real")


def pfaffian_kernel_matrix(blocks: IntermediateBlocks) -> np.ndarray:
    """[[A, C], [-C^T, 0]] for the Pfaffian classes."""
    a, c = blocks.A, blocks.C
    n, k = a.shape[0], c.shape[1]
    full = np.zeros((n + k, n + k), dtype=complex)
    full[:n, :n] = a
    full[:n, n:] = c
    full[n:, :n] = -c.T
    return full


def rk_intermediate(spec: IntermediateSpec, points: Sequence[float]) -> CorrelationResult:
    xs = np.asarray(points, dtype=float).ravel()
    k, n = xs.size, spec.N
    if k > n:
        raise KExceedsN(f"k={k} exceeds N={n}")
    if k == 0:
        return CorrelationResult(1.0 + 0j, 0.0, f"intermediate:{spec.h0_kind}")
    blocks = assemble_intermediate(spec, xs)
    if blocks.kind == "unitary":
        x = blocks.A
        mom = x[k:]
        if np.linalg.cond(mom) > 1e12:
            raise SingularMomentMatrix("H0 moment matrix is singular")
        kern = blocks.C[:k] - x[:k] @ np.linalg.solve(mom, blocks.C[k:])
        val = _prefactor(k) * determinant(kern)
        return CorrelationResult(complex(val), blocks.error, "intermediate:unitary", {"kernel": kern})
    full = pfaffian_kernel_matrix(blocks)
    if antisymmetry_error(full) > 1e-10:
        raise NotAntisymmetric("assembled Pfaffian matrix is not antisymmetric")
    app = blocks.A[k:, k:]
    if np.linalg.cond(app) > 1e12:
        raise SingularMomentMatrix("H0 skew moment matrix is singular")
    val = _prefactor(k) * pfaffian(full) / pfaffian(app)
    return CorrelationResult(complex(val), blocks.error, f"intermediate:{blocks.kind}", {"matrix": full})
