import math

import numpy as np
import pytest
from scipy.integrate import quad

from rmtratios.core_numerics import pfaffian
from rmtratios.errors import DegenerateField, InvalidParameter, KExceedsN
from rmtratios.external_field import (CharacteristicFactor, ExternalFieldSpec, IntermediateSpec, characteristic_factor,
                                      christoffel_darboux_laguerre, r1_entry, r2_entry, r3_entry, rk_correlation,
                                      rk_intermediate)
from rmtratios.oracles import cd_kernel_oracle, r2_fourier_oracle
from rmtratios.weights_moments import ensemble_weight

LAG = lambda nu=0.0, c=1.0: CharacteristicFactor("laguerre", c, nu)
GAU = lambda c=1.0: CharacteristicFactor("gaussian", c)


def test_single_eigenvalue_laguerre_entry():
    spec = ExternalFieldSpec(1, 0.0, (), LAG())
    assert r1_entry(spec, 1.3, 0.4) / (2 * math.pi) == pytest.approx(math.exp(-1.3), rel=1e-13)
    assert r1_entry(spec, -0.5, 0.4) == 0


def test_r3_monic_laguerre():
    # N=2, nu=0: monic associated Laguerre of degree one is x - 2, with sign (-1)^(a-1)
    spec = ExternalFieldSpec(2, 0.0, (), LAG())
    assert r3_entry(spec, 2, 3.0) == pytest.approx(-2 * math.pi * (3.0 - 2.0))
    assert r3_entry(spec, 1, 3.0) == pytest.approx(2 * math.pi)
    with pytest.raises(InvalidParameter):
        r3_entry(spec, 3, 1.0)


def test_factor_aliases():
    assert characteristic_factor("LUE", {"nu": 1}).kind == "laguerre"
    assert characteristic_factor("gue").kind == "gaussian"


@pytest.mark.parametrize("factor", [GAU(0.8), LAG(1.5, 1.3)], ids=["gaussian", "laguerre"])
@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_zero_field_equals_christoffel_darboux(factor, n):
    spec = ExternalFieldSpec(n, 0.0, (), factor)
    xs = np.array([0.7, 1.9][:min(n, 2)])
    ker = cd_kernel_oracle(factor, n, xs[:, None], xs[None, :])
    assert rk_correlation(spec, xs).value == pytest.approx(np.linalg.det(ker), rel=1e-7)


def test_laguerre_closed_form_kernel():
    spec = ExternalFieldSpec(3, 0.0, (), LAG(1.5, 1.3))
    xs = np.array([0.7, 2.1])
    ker = christoffel_darboux_laguerre(spec, xs[:, None], xs[None, :])
    assert rk_correlation(spec, xs).value == pytest.approx(np.linalg.det(ker), rel=1e-9)
    assert christoffel_darboux_laguerre(spec, 0.9, 0.9) == pytest.approx(rk_correlation(spec, [0.9]).value, rel=1e-9)


@pytest.mark.parametrize("factor,n,t,x", [(LAG(0.0), 1, 0.5, 2.0), (LAG(1.0), 2, 0.7, 1.5), (GAU(), 2, 0.6, 0.3),
                                          (LAG(0.0), 2, 1.7, 0.9)])
def test_r2_against_fourier_integral(factor, n, t, x):
    spec = ExternalFieldSpec(n, 0.0, (), factor)
    assert r2_entry(spec, t, x) == pytest.approx(r2_fourier_oracle(factor, n, t, x), rel=1e-7)


@pytest.mark.parametrize("factor,lo,hi", [(GAU(0.7), -15, 15), (LAG(1.0, 1.3), -3, 60)], ids=["gaussian", "laguerre"])
def test_density_moments_in_field(factor, lo, hi):
    n, alpha = 3, 0.8
    e = np.array([0.7, -0.4, 1.3])
    spec = ExternalFieldSpec(n, alpha, e, factor)
    pts = sorted({0.0, *(alpha * e)})
    m = [quad(lambda x: (rk_correlation(spec, [x]).value * x ** p).real, lo, hi, points=pts, limit=400)[0]
         for p in (0, 1)]
    tr_a = n * (n + factor.nu) / factor.c if factor.kind == "laguerre" else 0.0
    assert m[0] == pytest.approx(n, rel=1e-6)
    assert m[1] == pytest.approx(tr_a + alpha * e.sum(), rel=1e-6)


def test_two_point_marginal():
    n, x1 = 3, 0.8
    spec = ExternalFieldSpec(n, 0.9, [0.5, -0.3, 1.1], GAU())
    val = quad(lambda x: rk_correlation(spec, [x1, x]).value.real, -12, 12, points=[0, 0.45, -0.27, 0.99, x1],
               limit=400)[0]
    assert val == pytest.approx((n - 1) * rk_correlation(spec, [x1]).value.real, rel=1e-7)


@pytest.mark.parametrize("factor", [GAU(), LAG(0.5)], ids=["gaussian", "laguerre"])
def test_field_continuity_and_permutation(factor):
    e = [0.5, -0.3, 1.1]
    base = rk_correlation(ExternalFieldSpec(3, 0.0, e, factor), [0.8, 1.5]).value
    devs = [abs(rk_correlation(ExternalFieldSpec(3, a, e, factor), [0.8, 1.5]).value - base) / abs(base)
            for a in (1e-2, 1e-3)]
    assert devs[1] < devs[0] < 0.1 and devs[1] < 20 * 1e-3
    r = rk_correlation(ExternalFieldSpec(3, 0.3, e, factor), [0.8, 1.5]).value
    r_perm = rk_correlation(ExternalFieldSpec(3, 0.3, e[::-1], factor), [0.8, 1.5]).value
    assert r_perm == pytest.approx(r, rel=1e-10)


def test_field_errors():
    with pytest.raises(DegenerateField):
        rk_correlation(ExternalFieldSpec(2, 0.5, [0.3, 0.3], GAU()), [0.1])
    with pytest.raises(KExceedsN):
        rk_correlation(ExternalFieldSpec(1, 0.5, [0.3], GAU()), [0.1, 0.2])
    with pytest.raises(InvalidParameter):
        ExternalFieldSpec(2, 0.5, [0.3], GAU())


@pytest.mark.parametrize("kind,n", [("quaternion", 2), ("real", 2), ("real", 3)])
def test_intermediate_pfaffian_structure(kind, n):
    spec = IntermediateSpec(n, 0.7, GAU(), ensemble_weight("GUE", {"c": 0.5}), kind)
    mat = rk_intermediate(spec, [0.3]).meta["matrix"]
    assert np.max(np.abs(mat + mat.T)) <= 1e-10 * np.max(np.abs(mat))
    d = np.linalg.det(mat)
    assert abs(pfaffian(mat) ** 2 - d) <= 1e-10 * abs(d)


def test_intermediate_narrow_weight_matches_fixed_field():
    e0, alpha, c = 0.8, 0.7, 1e4
    h0 = ensemble_weight("GUE", {"exp": [-c * e0 ** 2, 2 * c * e0, -c]})
    inter = IntermediateSpec(1, alpha, GAU(), h0, "unitary")
    fixed = ExternalFieldSpec(1, alpha, [e0], GAU())
    for x in (-0.5, 0.4, 1.2):
        a, b = rk_intermediate(inter, [x]).value, rk_correlation(fixed, [x]).value
        assert a == pytest.approx(b, rel=1e-3)


def test_intermediate_guards():
    with pytest.raises(InvalidParameter):
        IntermediateSpec(3, 0.7, GAU(), ensemble_weight("GUE"), "quaternion")
    with pytest.raises(InvalidParameter):
        IntermediateSpec(2, 0.0, GAU(), ensemble_weight("GUE"), "unitary")
    with pytest.raises(KExceedsN):
        rk_intermediate(IntermediateSpec(1, 0.7, GAU(), ensemble_weight("GUE"), "unitary"), [0.1, 0.2])
