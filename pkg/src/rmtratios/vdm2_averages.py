"""Determinantal evaluation of averages with a squared Vandermonde.

Ztilde(kappa, lambda) = int prod g(z_j) [holomorphic ratio in kappa]
    * [antiholomorphic ratio in lambda] |Delta_N(z)|^2 d[z]
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .berezinians import SpectralParameters, sqrt_ber2_product
from .core_numerics import CorrelationResult, determinant, solve
from .errors import DimensionMismatch, InvalidParameter, SingularBlock, SingularMomentMatrix
from .sqrtber_averages import SqrtBerSpec, z_average
from .weights_moments import WeightFunction, build_moment_matrix, cauchy_vector, two_pole_transform


@dataclass(frozen=True)
class Vdm2Spec:
    N: int
    g: WeightFunction
    kappa: SpectralParameters
    lam: SpectralParameters

    def __post_init__(self):
        if self.N < 0:
            raise InvalidParameter("N must be nonnegative")

    @property
    def k1(self) -> int:
        return self.kappa.p

    @property
    def k2(self) -> int:
        return self.kappa.q

    @property
    def l1(self) -> int:
        return self.lam.p

    @property
    def l2(self) -> int:
        return self.lam.q

    @property
    def d(self) -> int:
        return self.k2 + self.N - self.k1

    @property
    def d_lambda(self) -> int:
        return self.l2 + self.N - self.l1

    @property
    def d_kappa_degenerate(self) -> int:
        return self.k1 - self.k2 - self.N

    @property
    def d_lambda_degenerate(self) -> int:
        return self.l1 - self.l2 - self.N


class TildeBlocks:
    """Cauchy-moment vectors, bimoment matrix and the kernels built from them."""

    def __init__(self, g: WeightFunction, d: int):
        self.g = g
        self.d = d
        self.mm = build_moment_matrix("Mtilde", g, d)
        self.M = self.mm.entries
        if d:
            self.mm.require_regular()
        self.det_M = determinant(self.M)

    def Z1010(self, kappa, lam) -> complex:
        return two_pole_transform(self.g, kappa, lam)

    def F(self, kappa) -> np.ndarray:
        return cauchy_vector(self.g, kappa, [(1, b) for b in range(1, self.d + 1)]) if self.d else np.zeros(0, complex)

    def Fs(self, lam) -> np.ndarray:
        return (cauchy_vector(self.g, lam, [(a, 1) for a in range(1, self.d + 1)], conjugate=True)
                if self.d else np.zeros(0, complex))

    def Lam(self, lam) -> np.ndarray:
        return complex(lam) ** np.arange(self.d)

    def K(self, kappa) -> np.ndarray:
        return complex(kappa) ** np.arange(self.d)

    def _bil(self, left, right) -> complex:
        if self.d == 0:
            return 0j
        try:
            return complex(left @ solve(self.M, right).solution)
        except SingularBlock as exc:
            raise SingularMomentMatrix(str(exc)) from None

    def K11(self, kb2, la2) -> complex:
        return -self._bil(self.Lam(la2), self.K(kb2))

    def K12(self, lb1, la2) -> complex:
        return 1.0 / (lb1 - la2) - self._bil(self.Lam(la2), self.Fs(lb1))

    def K21(self, ka1, kb2) -> complex:
        return 1.0 / (ka1 - kb2) - self._bil(self.F(ka1), self.K(kb2))

    def K22(self, ka1, lb1) -> complex:
        return self.Z1010(ka1, lb1) - self._bil(self.F(ka1), self.Fs(lb1))


def assemble_tilde_blocks(spec: Vdm2Spec) -> TildeBlocks:
    return TildeBlocks(spec.g, spec.d)


def _sqrt_bers(spec: Vdm2Spec) -> complex:
    return sqrt_ber2_product(spec.kappa) * sqrt_ber2_product(spec.lam)


def z_tilde(spec: Vdm2Spec) -> CorrelationResult:
    """Main path: requires d = k2 + N - k1 = l2 + N - l1 >= 0."""
    if spec.d != spec.d_lambda:
        raise DimensionMismatch(f"d mismatch: kappa gives {spec.d}, lambda gives {spec.d_lambda}")
    if spec.d < 0:
        raise DimensionMismatch("d must be nonnegative on the main path")
    spec.kappa.check()
    spec.lam.check()
    blk = assemble_tilde_blocks(spec)
    k1, k2 = spec.kappa.k1, spec.kappa.k2
    l1, l2 = spec.lam.k1, spec.lam.k2
    top = [[blk.K11(kb, la) for kb in k2] + [blk.K12(lb, la) for lb in l1] for la in l2]
    bottom = [[blk.K21(ka, kb) for kb in k2] + [blk.K22(ka, lb) for lb in l1] for ka in k1]
    mat = np.array(top + bottom, dtype=complex).reshape(len(l2) + len(k1), len(k2) + len(l1))
    sign = (-1) ** ((spec.l2 + spec.k2) * (spec.l1 + spec.k1 - 1) // 2)
    value = sign * math.factorial(spec.N) * blk.det_M / _sqrt_bers(spec) * determinant(mat)
    meta = {"d": spec.d, "condition_Mtilde": blk.mm.condition_estimate, "normalization": math.factorial(spec.N) * blk.det_M}
    return CorrelationResult(value, 0.0, "vdm2:kernel-determinant", meta)


def z_tilde_degenerate(spec: Vdm2Spec) -> CorrelationResult:
    """Bordered determinant valid when k1 - k2 - N >= 0 and l1 - l2 - N >= 0."""
    dk, dl = spec.d_kappa_degenerate, spec.d_lambda_degenerate
    if dk < 0 or dl < 0:
        raise DimensionMismatch("degenerate path needs k1-k2-N >= 0 and l1-l2-N >= 0")
    spec.kappa.check()
    spec.lam.check()
    k1, k2 = spec.kappa.k1, spec.kappa.k2
    l1, l2 = spec.lam.k1, spec.lam.k2
    nr = len(l2) + dl + len(k1)
    mat = np.zeros((nr, nr), dtype=complex)
    c0 = len(k2) + dk
    for a, la in enumerate(l2):
        for b, lb in enumerate(l1):
            mat[a, c0 + b] = 1.0 / (lb - la)
    for a in range(dl):
        for b, lb in enumerate(l1):
            mat[len(l2) + a, c0 + b] = lb ** a
    r0 = len(l2) + dl
    for a, ka in enumerate(k1):
        for b, kb in enumerate(k2):
            mat[r0 + a, b] = 1.0 / (ka - kb)
        for b in range(dk):
            mat[r0 + a, len(k2) + b] = ka ** b
        for b, lb in enumerate(l1):
            mat[r0 + a, c0 + b] = two_pole_transform(spec.g, ka, lb)
    n = spec.N
    expo = (spec.l1 + spec.k1) * (spec.l1 + spec.k1 - 1) // 2 + n * (spec.k2 + spec.l2 + 1)
    value = (-1) ** expo * math.factorial(n) / _sqrt_bers(spec) * determinant(mat)
    return CorrelationResult(value, 0.0, "vdm2:degenerate-determinant", {"d_kappa": dk, "d_lambda": dl})


def z_tilde_auto(spec: Vdm2Spec) -> CorrelationResult:
    if spec.d == spec.d_lambda and spec.d >= 0:
        return z_tilde(spec)
    if spec.d_kappa_degenerate >= 0 and spec.d_lambda_degenerate >= 0:
        return z_tilde_degenerate(spec)
    raise DimensionMismatch("neither the main nor the degenerate path applies to these counts")


def hermitian_measure_constant(n: int) -> float:
    """N! prod_{j<=N} (j-1)!/pi^{j-1}: eigenvalue integral / matrix integral."""
    return math.factorial(n) * math.prod(math.factorial(j - 1) / math.pi ** (j - 1) for j in range(1, n + 1))


def admissible_splits(n: int, kt1: int, kt2: int) -> list[tuple[int, int, int, int]]:
    """All (k1, k2, l1, l2) with k1+l1 = kt1, k2+l2 = kt2 and a valid path."""
    out = []
    for k1 in range(kt1 + 1):
        for k2 in range(kt2 + 1):
            l1, l2 = kt1 - k1, kt2 - k2
            d, dl = k2 + n - k1, l2 + n - l1
            if (d == dl and d >= 0) or (k1 - k2 - n >= 0 and l1 - l2 - n >= 0):
                out.append((k1, k2, l1, l2))
    return out


def _default_split(n: int, kt1: int, kt2: int) -> tuple[int, int, int, int]:
    splits = admissible_splits(n, kt1, kt2)
    if not splits:
        raise DimensionMismatch("no admissible split of the characteristic polynomials")
    # prefer the smallest bimoment matrix on the main path
    return min(splits, key=lambda s: (s[1] + n - s[0] < 0, abs(s[1] + n - s[0]), -s[0]))


def hermitian_ratio_average(weight: WeightFunction, n: int, kappa1: Sequence[complex], kappa2: Sequence[complex],
                            split: tuple[int, int, int, int] | None = None, route: str = "vdm2") -> CorrelationResult:
    """Average of prod det(H - kappa_j2) / prod det(H - kappa_j1) over P(H) d[H].

    route "vdm2" splits the characteristic polynomials into kappa and lambda
    sets; route "sqrtber" writes one Vandermonde as a product of powers.
    """
    kappa1 = [complex(v) for v in kappa1]
    kappa2 = [complex(v) for v in kappa2]
    kt1, kt2 = len(kappa1), len(kappa2)
    if not weight.real_support:
        raise InvalidParameter("Hermitian averages need a real 1-D weight")
    if route == "vdm2" and split is None and not admissible_splits(n, kt1, kt2):
        # odd kt2 - kt1 admits no split; the power route has no such restriction
        route = "sqrtber"
    if route == "vdm2":
        k1, k2, l1, l2 = split if split is not None else _default_split(n, kt1, kt2)
        if k1 + l1 != kt1 or k2 + l2 != kt2:
            raise InvalidParameter("split does not match the numbers of characteristic polynomials")
        spec = Vdm2Spec(n, weight, SpectralParameters(kappa1[:k1], kappa2[:k2]),
                        SpectralParameters(kappa1[k1:], kappa2[k2:]))
        res = z_tilde_auto(spec)
        value = res.value / ((-1) ** ((kt1 + kt2) * n) * hermitian_measure_constant(n))
        meta = dict(res.meta, split=[k1, k2, l1, l2], z_tilde=res.value)
        return CorrelationResult(value, res.error_estimate, f"hermitian:{res.method}", meta)
    if route == "sqrtber":
        f_weights = [weight.times_monomial(j) for j in range(n)]
        spec = SqrtBerSpec.build([], f_weights, kappa1, kappa2)
        res = z_average(spec)
        const = (-1) ** (kt1 * n) * math.prod(math.factorial(j - 1) / (-math.pi) ** (j - 1) for j in range(1, n + 1))
        return CorrelationResult(res.value / const, res.error_estimate, f"hermitian:{res.method}", dict(res.meta))
    raise InvalidParameter(f"unknown route {route!r}")
