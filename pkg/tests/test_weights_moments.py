import math

import numpy as np
import pytest
from scipy import integrate as si
from scipy import special

from rmtratios.errors import InvalidParameter, PoleOnSupport, UnsupportedEnsemble
from rmtratios.weights_moments import (build_moment_matrix, cauchy_transform, double_cauchy, ensemble_weight, moment,
                                       moment_error, moments, ordered_pair_matrix, polyexp_weight,
                                       two_pole_transform)


def test_closed_form_moments_match_quadrature():
    for w in (ensemble_weight("GUE", {"c": 0.7}), ensemble_weight("chiral", {"nu": 1.5, "c": 1.3})):
        for a in range(1, 6):
            val, err = moment_error(w, a)
            assert val == pytest.approx(moment(w, a), rel=1e-10)
            assert err < 1e-8


def test_circle_and_plane_moments():
    circ = ensemble_weight("circular")
    assert moment(circ, 2, 2) == pytest.approx(2 * math.pi)
    assert abs(moment(circ, 2, 3)) < 1e-14
    gin = ensemble_weight("ginibre", {"tau": 1.0})
    assert moment(gin, 1, 1) == pytest.approx(math.pi, rel=1e-10)
    assert moment(gin, 3, 3) == pytest.approx(2 * math.pi, rel=1e-10)
    assert abs(moment(gin, 2, 1)) < 1e-10


def test_group_weights():
    assert moment(ensemble_weight("SO"), 1) == pytest.approx(math.pi, rel=1e-10)
    assert moment(ensemble_weight("USp"), 1) == pytest.approx(math.pi / 2, rel=1e-10)


def test_moments_reject_bad_orders():
    with pytest.raises(InvalidParameter):
        moments(ensemble_weight("GUE"), [(0, 1)])
    assert moments(ensemble_weight("GUE"), []).shape == (0,)


def test_unknown_ensemble():
    with pytest.raises(UnsupportedEnsemble):
        ensemble_weight("nonsense")


def test_gaussian_cauchy_transform():
    w = ensemble_weight("GUE")
    # int exp(-x^2) / (i - x) dx = -i pi e erfc(1)
    assert cauchy_transform(w, 1j) == pytest.approx(-1j * math.pi * math.e * special.erfc(1), rel=1e-10)


def test_ginibre_cauchy_transform():
    w = ensemble_weight("ginibre", {"tau": 1.0})
    k = 0.7 + 0.4j
    assert cauchy_transform(w, k) == pytest.approx(math.pi / k * (1 - np.exp(-abs(k) ** 2)), rel=1e-9)


def test_pole_on_support():
    with pytest.raises(PoleOnSupport):
        cauchy_transform(ensemble_weight("GUE"), 0.3)
    with pytest.raises(PoleOnSupport):
        cauchy_transform(ensemble_weight("circular"), 1j)


def test_two_pole_transform_against_direct():
    w = ensemble_weight("GUE")
    k, l = 0.3 + 1j, -0.2 + 0.5j
    re = si.quad(lambda x: (np.exp(-x * x) / ((k - x) * (l - x))).real, -np.inf, np.inf, epsabs=1e-13)[0]
    im = si.quad(lambda x: (np.exp(-x * x) / ((k - x) * (l - x))).imag, -np.inf, np.inf, epsabs=1e-13)[0]
    assert two_pole_transform(w, k, l) == pytest.approx(re + 1j * im, rel=1e-9)
    # nearly coincident poles use the direct integrand
    assert two_pole_transform(w, k, k + 1e-5) == pytest.approx(two_pole_transform(w, k, k + 2e-3), rel=5e-3)


def test_double_cauchy_uniform_intervals():
    a = polyexp_weight("real-line", window=(0, 1))
    b = polyexp_weight("real-line", window=(2, 3))
    ref = si.dblquad(lambda y, x: 1 / (x - y), 0, 1, 2, 3, epsabs=1e-13)[0]
    assert double_cauchy(a, b) == pytest.approx(ref, rel=1e-10)


def test_double_cauchy_overlap_rejected():
    with pytest.raises(PoleOnSupport):
        double_cauchy(ensemble_weight("GUE"), ensemble_weight("GUE"))


def test_ordered_pair_matrix_gaussian():
    w = ensemble_weight("GUE")
    a, err = ordered_pair_matrix(w, lambda x: np.vstack([np.ones_like(x), x]))
    ref = si.dblquad(lambda e2, e1: np.exp(-e1 * e1 - e2 * e2) * (e2 - e1), -8, 8, lambda e1: e1, 8, epsabs=1e-12)[0]
    assert a[0, 1] == pytest.approx(ref, rel=1e-9)
    assert np.allclose(a, -a.T)


def test_moment_matrix_kinds():
    w = ensemble_weight("GUE")
    m2 = build_moment_matrix("M2", w, 3).entries
    assert np.allclose(m2, m2.T)
    assert m2[0, 0] == pytest.approx(math.sqrt(math.pi))
    m4 = build_moment_matrix("M4", w, 3).entries
    assert np.allclose(m4, -m4.T)
    mt = build_moment_matrix("Mtilde", w, 3).entries
    assert mt[1, 1] == pytest.approx(math.sqrt(math.pi) / 2)
    m1 = build_moment_matrix("M1", ensemble_weight("chiral", {"nu": 0.5}), 3, chi=1).entries
    assert m1.shape == (4, 4) and np.allclose(m1, -m1.T)
    with pytest.raises(InvalidParameter):
        build_moment_matrix("M1", w, 3, chi=0)
    with pytest.raises(InvalidParameter):
        build_moment_matrix("bogus", w, 2)


def test_block_matrix_M():
    g = [polyexp_weight("real-line", exp=[0, 0, -1], shift=2j)]
    f = [ensemble_weight("GUE"), ensemble_weight("GUE").times_monomial(1)]
    m = build_moment_matrix("M", g_weights=g, f_weights=f).entries
    assert m.shape == (2, 2)
    assert m[0, 0] == pytest.approx(math.sqrt(math.pi))
    with pytest.raises(InvalidParameter):
        build_moment_matrix("M", g_weights=g + g, f_weights=f[:1])
