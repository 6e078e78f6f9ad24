"""Square-root Berezinians and Berezinians in product and determinant form."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core_numerics import determinant, determinant_extended
from .errors import CoincidentPoints

MIN_SEPARATION = 1e-12


def _vec(values) -> np.ndarray:
    return np.atleast_1d(np.asarray(values, dtype=complex)).ravel()


@dataclass(frozen=True)
class SpectralParameters:
    """Bosonic (kappa_1) and fermionic (kappa_2) spectral parameters."""

    bosonic: tuple = field(default_factory=tuple)
    fermionic: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "bosonic", tuple(complex(v) for v in _vec(self.bosonic)))
        object.__setattr__(self, "fermionic", tuple(complex(v) for v in _vec(self.fermionic)))

    @property
    def p(self) -> int:
        return len(self.bosonic)

    @property
    def q(self) -> int:
        return len(self.fermionic)

    @property
    def k1(self) -> np.ndarray:
        return np.array(self.bosonic, dtype=complex)

    @property
    def k2(self) -> np.ndarray:
        return np.array(self.fermionic, dtype=complex)

    def swapped(self) -> "SpectralParameters":
        return SpectralParameters(self.fermionic, self.bosonic)

    def shifted(self, eps: complex) -> "SpectralParameters":
        return SpectralParameters(self.k1 + eps, self.k2 + eps)

    def min_separation(self) -> float:
        """Smallest distance within each list and across the lists."""
        seps = [np.inf]
        for v in (self.k1, self.k2):
            if v.size > 1:
                d = np.abs(v[:, None] - v[None, :])
                seps.append(float(np.min(d[np.triu_indices(v.size, 1)])))
        if self.p and self.q:
            seps.append(float(np.min(np.abs(self.k1[:, None] - self.k2[None, :]))))
        return float(min(seps))

    def check(self, tol: float = MIN_SEPARATION) -> None:
        if self.min_separation() < tol:
            raise CoincidentPoints(f"spectral parameters closer than {tol:g}")


def vandermonde(values: Sequence[complex]) -> complex:
    """prod_{a<b} (v_a - v_b); empty and single-point products are 1."""
    v = _vec(values)
    out = 1.0 + 0j
    for a in range(v.size):
        for b in range(a + 1, v.size):
            out *= v[a] - v[b]
    return complex(out)


def vandermonde_det(values: Sequence[complex]) -> complex:
    """Same quantity through the signed monomial determinant."""
    v = _vec(values)
    k = v.size
    mat = v[None, :] ** np.arange(k)[:, None]
    return (-1) ** (k * (k - 1) // 2) * determinant(mat)


def vandermonde4_det(values: Sequence[complex]) -> complex:
    """Fourth power of the Vandermonde via the monomial/derivative determinant."""
    v = _vec(values)
    k = v.size
    a = np.arange(2 * k)[:, None]
    mono = v[None, :] ** a
    deriv = a * _safe_pow(v[None, :], a - 1)
    return determinant(_interleave(mono, deriv))


def _safe_pow(base: np.ndarray, expo: np.ndarray) -> np.ndarray:
    """base**expo with 0 for negative exponents (those entries carry a zero factor)."""
    base, expo = np.broadcast_arrays(base, expo)
    out = np.zeros(base.shape, dtype=np.result_type(base.dtype, complex))
    ok = expo >= 0
    out[ok] = base[ok] ** expo[ok]
    return out


def _interleave(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Columns ordered (l_1, r_1, l_2, r_2, ...)."""
    rows, cols = left.shape
    out = np.empty((rows, 2 * cols), dtype=np.result_type(left.dtype, right.dtype, complex))
    out[:, 0::2] = left
    out[:, 1::2] = right
    return out


def sqrt_ber2_product(sp: SpectralParameters) -> complex:
    sp.check()
    num = vandermonde(sp.k1) * vandermonde(sp.k2)
    den = np.prod(sp.k1[:, None] - sp.k2[None, :]) if sp.p and sp.q else 1.0
    return complex(num / den)


def sqrt_ber2_det(sp: SpectralParameters) -> complex:
    """Cauchy block over a monomial block; p > q handled by the exchange rule."""
    sp.check()
    p, q = sp.p, sp.q
    if p > q:
        return (-1) ** (p * q) * sqrt_ber2_det(sp.swapped())
    k1, k2 = sp.k1, sp.k2
    top = 1.0 / (k1[:, None] - k2[None, :])
    bottom = k2[None, :] ** np.arange(q - p)[:, None]
    mat = np.vstack([top.reshape(p, q), bottom.reshape(q - p, q)])
    sign = (-1) ** (q * (q - 1) // 2 + (q + 1) * p)
    return sign * determinant(mat)


def ber1_product(sp: SpectralParameters) -> complex:
    """Ber^(1)_{p/q}(kappa_1; kappa_2) = Ber^(4)_{q/p}(kappa_2; kappa_1)."""
    sp.check()
    num = vandermonde(sp.k1) * vandermonde(sp.k2) ** 4
    den = np.prod(sp.k1[:, None] - sp.k2[None, :]) ** 2 if sp.p and sp.q else 1.0
    return complex(num / den)


def ber4_product(sp: SpectralParameters) -> complex:
    """Ber^(4)_{p/q}(kappa_1; kappa_2), i.e. Ber^(1) with the roles exchanged."""
    return ber1_product(sp.swapped())


def _ber1_degree(p: int, q: int) -> int:
    return p * (p - 1) // 2 + 2 * q * (q - 1) - 2 * p * q


def ber1_det(sp: SpectralParameters) -> complex:
    """Determinant form; the Cauchy/squared-Cauchy column pairs are interleaved.

    The matrix is badly conditioned for larger p, q, so the points are first
    centred and scaled (translation invariance, homogeneity of known degree)
    and the determinant is formed and eliminated in long double.
    """
    sp.check()
    p, q = sp.p, sp.q
    pts = np.concatenate([sp.k1, sp.k2])
    centre = pts.mean() if pts.size else 0j
    scale = float(np.max(np.abs(pts - centre))) if pts.size > 1 else 1.0
    scale = scale if scale > 0 else 1.0
    k1 = (sp.k1.astype(np.clongdouble) - centre) / scale
    k2 = (sp.k2.astype(np.clongdouble) - centre) / scale
    diff = k1[:, None] - k2[None, :]
    cauchy = (1 / diff).reshape(p, q)
    cauchy2 = (1 / diff**2).reshape(p, q)
    if p <= 2 * q:
        a = np.arange(2 * q - p)[:, None]
        mono = k2[None, :] ** a
        deriv = a * _safe_pow(k2[None, :], a - 1)
        mat = np.vstack([_interleave(cauchy, cauchy2), _interleave(mono, deriv)])
        sign = (-1) ** p
    else:
        extra = k1[:, None] ** np.arange(p - 2 * q)[None, :]
        mat = np.hstack([_interleave(cauchy, cauchy2), extra])
        sign = (-1) ** (p * (p - 1) // 2 + q)
    return sign * determinant_extended(mat) * complex(scale) ** _ber1_degree(p, q)


def ber4_det(sp: SpectralParameters) -> complex:
    return ber1_det(sp.swapped())


def random_spectral_parameters(rng: np.random.Generator, p: int, q: int, min_sep: float = 0.5,
                               scale: float | None = None, max_tries: int = 10_000) -> SpectralParameters:
    """Uniform complex points in a box, rejection-sampled to the minimal separation."""
    count = p + q
    side = scale if scale is not None else max(2.0, 1.5 * min_sep * np.sqrt(max(count, 1)))
    for _ in range(max_tries):
        z = rng.uniform(-side, side, count) + 1j * rng.uniform(-side, side, count)
        if count < 2 or np.min(np.abs(z[:, None] - z[None, :])[np.triu_indices(count, 1)]) >= min_sep:
            return SpectralParameters(z[:p], z[p:])
    raise CoincidentPoints("could not draw points with the requested separation")


IDENTITY_FAMILIES = {
    "ber2": (sqrt_ber2_product, sqrt_ber2_det),
    "ber1": (ber1_product, ber1_det),
    "ber4": (ber4_product, ber4_det),
    "vandermonde": (lambda sp: vandermonde(sp.k1), lambda sp: vandermonde_det(sp.k1)),
}
