"""Averages of characteristic-polynomial ratios and k-point correlation
functions of random matrix ensembles via determinantal and Pfaffian
reductions, with brute-force oracles."""
from __future__ import annotations

__version__ = "0.1.0"

from .berezinians import (SpectralParameters, ber1_det, ber1_product, ber4_det, ber4_product, sqrt_ber2_det,
                          sqrt_ber2_product, vandermonde, vandermonde4_det, vandermonde_det)
from .core_numerics import CorrelationResult, determinant, pfaffian
from .errors import RMTError
from .external_field import (CharacteristicFactor, ExternalFieldSpec, IntermediateSpec, r1_entry, r2_entry,
                             r3_entry, rk_correlation, rk_intermediate)
from .sqrtber_averages import SqrtBerSpec, z_average, z_equal, z_unequal
from .vdm2_averages import Vdm2Spec, hermitian_ratio_average, z_tilde, z_tilde_degenerate
from .weights_moments import MomentMatrix, WeightFunction, build_moment_matrix, ensemble_weight, moments

__all__ = [
    "SpectralParameters", "ber1_det", "ber1_product", "ber4_det", "ber4_product", "sqrt_ber2_det",
    "sqrt_ber2_product", "vandermonde", "vandermonde4_det", "vandermonde_det", "CorrelationResult",
    "determinant", "pfaffian", "RMTError", "CharacteristicFactor", "ExternalFieldSpec", "IntermediateSpec",
    "r1_entry", "r2_entry", "r3_entry", "rk_correlation", "rk_intermediate", "SqrtBerSpec", "z_average",
    "z_equal", "z_unequal", "Vdm2Spec", "hermitian_ratio_average", "z_tilde", "z_tilde_degenerate",
    "MomentMatrix", "WeightFunction", "build_moment_matrix", "ensemble_weight", "moments",
]
