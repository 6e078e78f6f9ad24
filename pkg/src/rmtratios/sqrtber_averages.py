"""Determinantal evaluation of averages carrying a square-root Berezinian.

Z^{(N1/N2)}_{k1/k2}(kappa) = int prod g_j(z_j1) prod f_j(z_j2)
    * [char. polynomial ratio] * sqrtBer_{N1/N2}(z) d[z]
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .berezinians import SpectralParameters, sqrt_ber2_product
from .core_numerics import CorrelationResult, determinant, solve
from .errors import InvalidParameter, SingularBlock, SingularMomentMatrix
from .weights_moments import (MomentMatrix, WeightFunction, build_moment_matrix, cauchy_transform, moment)


@dataclass(frozen=True)
class SqrtBerSpec:
    g_weights: tuple
    f_weights: tuple
    sp: SpectralParameters
    swapped: bool = False
    sign: int = 1

    @classmethod
    def build(cls, g_weights: Sequence[WeightFunction], f_weights: Sequence[WeightFunction],
              bosonic: Sequence[complex] = (), fermionic: Sequence[complex] = ()) -> "SqrtBerSpec":
        """Normalize to N2 >= N1 by exchanging the roles of (g, kappa_2) and (f, kappa_1)."""
        g, f = tuple(g_weights), tuple(f_weights)
        sp = SpectralParameters(bosonic, fermionic)
        n1, n2, k1, k2 = len(g), len(f), sp.p, sp.q
        if n1 <= n2:
            return cls(g, f, sp)
        sign = (-1) ** (n1 * n2 + n1 * k2 + k1 * n2)
        return cls(f, g, sp.swapped(), True, sign)

    @property
    def N1(self) -> int:
        return len(self.g_weights)

    @property
    def N2(self) -> int:
        return len(self.f_weights)

    @property
    def k1(self) -> int:
        return self.sp.p

    @property
    def k2(self) -> int:
        return self.sp.q


@dataclass
class Blocks:
    M: MomentMatrix
    F: callable
    G: callable


def assemble_blocks(spec: SqrtBerSpec) -> Blocks:
    n1, n2 = spec.N1, spec.N2
    if n2 < n1:
        raise InvalidParameter("spec must satisfy N2 >= N1")
    mm = build_moment_matrix("M", g_weights=spec.g_weights, f_weights=spec.f_weights)

    def F(kappa):
        return np.array([cauchy_transform(f, kappa) for f in spec.f_weights], dtype=complex)

    def G(kappa):
        mono = [complex(kappa) ** a for a in range(n2 - n1)]
        cauchy = [-cauchy_transform(g, kappa) for g in spec.g_weights]
        return np.array(mono + cauchy, dtype=complex)

    return Blocks(mm, F, G)


class KernelFunction:
    """K(a, b) = 1/(a - b) - F(a) M^-1 G(b) with cached blocks."""

    def __init__(self, spec: SqrtBerSpec):
        self.spec = spec
        self.blocks = assemble_blocks(spec)
        try:
            self.M = self.blocks.M.require_regular()
        except SingularMomentMatrix:
            raise
        self.det_M = determinant(self.M)
        n2 = spec.N2
        self.C = (-1) ** (n2 * (n2 - 1) // 2) * self.det_M
        self._F: dict = {}
        self._G: dict = {}

    def F(self, kappa) -> np.ndarray:
        key = complex(kappa)
        if key not in self._F:
            self._F[key] = self.blocks.F(key)
        return self._F[key]

    def G(self, kappa) -> np.ndarray:
        key = complex(kappa)
        if key not in self._G:
            self._G[key] = self.blocks.G(key)
        return self._G[key]

    def minv(self, rhs) -> np.ndarray:
        try:
            return solve(self.M, rhs).solution
        except SingularBlock as exc:
            raise SingularMomentMatrix(str(exc)) from None

    def __call__(self, a, b) -> complex:
        a, b = complex(a), complex(b)
        corr = self.F(a) @ self.minv(self.G(b)) if self.spec.N2 else 0.0
        return complex(1.0 / (a - b) - corr)

    def z11_over_diff(self, a, b) -> complex:
        """Z_{1/1}(a, b) / (a - b)."""
        n2 = self.spec.N2
        return (-1) ** (n2 * (n2 + 1) // 2) * self.det_M * self(a, b)


def kernel(spec: SqrtBerSpec) -> KernelFunction:
    return KernelFunction(spec)


def z_equal(spec: SqrtBerSpec, ker: KernelFunction | None = None, verify: bool = False) -> CorrelationResult:
    """k1 = k2 = k via the compact kernel determinant."""
    if spec.k1 != spec.k2:
        raise InvalidParameter("z_equal needs k1 == k2")
    spec.sp.check()
    ker = ker or kernel(spec)
    k = spec.k1
    if k == 0:
        return CorrelationResult(spec.sign * ker.C, 0.0, "sqrtber:normalization", _meta(spec, ker))
    k1, k2 = spec.sp.k1, spec.sp.k2
    kmat = np.array([[ker(a, b) for b in k2] for a in k1], dtype=complex)
    n2 = spec.N2
    s = (-1) ** (n2 * (n2 + 1) // 2) * ker.det_M
    sb = sqrt_ber2_product(spec.sp)
    value = (-1) ** (k * (k - 1) // 2) * s ** k / (ker.C ** (k - 1) * sb) * determinant(kmat)
    meta = _meta(spec, ker)
    if verify:
        long_form = (-1) ** ((n2 + k) * (n2 + k - 1) // 2) * ker.det_M / sb * determinant(kmat)
        meta["long_form"] = spec.sign * long_form
        meta["long_form_rel_dev"] = abs(long_form - value) / max(abs(value), 1e-300)
    return CorrelationResult(spec.sign * value, 0.0, "sqrtber:kernel-determinant", meta)


def _meta(spec: SqrtBerSpec, ker: KernelFunction) -> dict:
    return {"swapped": spec.swapped, "N1": spec.N1, "N2": spec.N2, "k1": spec.k1, "k2": spec.k2,
            "condition_M": ker.blocks.M.condition_estimate, "C": ker.C}


def _theta(n: int) -> int:
    return 1 if n >= 0 else 0


def z_unequal(spec: SqrtBerSpec, ker: KernelFunction | None = None) -> CorrelationResult:
    """k1 != k2 through the bordered determinants with closed-form limit rows."""
    if spec.k1 == spec.k2:
        raise InvalidParameter("z_unequal needs k1 != k2")
    spec.sp.check()
    ker = ker or kernel(spec)
    n1, n2, k1n, k2n = spec.N1, spec.N2, spec.k1, spec.k2
    k1, k2 = spec.sp.k1, spec.sp.k2
    C = ker.C
    sb = sqrt_ber2_product(spec.sp)
    if k1n < k2n:
        rows = [[ker.z11_over_diff(a, b) for b in k2] for a in k1]
        for a in range(1, k2n - k1n + 1):
            fa = np.array([moment(f, a + n2 - n1, 1) for f in spec.f_weights], dtype=complex)
            row = []
            for b in k2:
                corr = fa @ ker.minv(ker.G(b)) if n2 else 0.0
                row.append((-1) ** (a - 1 + n2) * math.factorial(a - 1) * C * (b ** (a - 1 + n2 - n1) - corr))
            rows.append(row)
        pref = (-1) ** (k1n * (k1n - 1) // 2 + (k2n - k1n) * n1) / (C ** (k2n - 1) * sb)
    else:
        rows = [[ker.z11_over_diff(b, a) for b in k1] for a in k2]
        for a in range(1, k1n - k2n + 1):
            ga = np.zeros(n2, dtype=complex)
            for b in range(1, n2 - n1 + 1):
                ga[b - 1] = -1.0 if n2 - n1 + 1 - a == b else 0.0
            expo = a - 1 + n1 - n2
            for b, g in enumerate(spec.g_weights):
                ga[n2 - n1 + b] = moment(g, expo + 1, 1) if _theta(expo) else 0.0
            row = []
            for b in k1:
                mono = b ** expo if _theta(expo) else 0.0
                corr = ker.F(b) @ ker.minv(ga) if n2 else 0.0
                row.append((-1) ** (a + n2) * math.factorial(a - 1) * C * (mono - corr))
            rows.append(row)
        pref = (-1) ** ((k2n + 2 * k1n) * (k2n - 1) // 2 + (k1n - k2n) * (n2 - n1)) / (C ** (k1n - 1) * sb)
    value = pref * determinant(np.array(rows, dtype=complex))
    return CorrelationResult(spec.sign * value, 0.0, "sqrtber:bordered-determinant", _meta(spec, ker))


def z_average(spec: SqrtBerSpec, verify: bool = False) -> CorrelationResult:
    """Dispatch on k1 == k2."""
    if spec.k1 == spec.k2:
        return z_equal(spec, verify=verify)
    return z_unequal(spec)
