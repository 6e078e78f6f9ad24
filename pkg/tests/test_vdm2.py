import numpy as np
from scipy.integrate import trapezoid
import pytest

from conftest import off_axis_points
from rmtratios.berezinians import SpectralParameters as SP
from rmtratios.errors import DimensionMismatch
from rmtratios.oracles import direct_vdm2
from rmtratios.vdm2_averages import (Vdm2Spec, admissible_splits, hermitian_ratio_average, z_tilde,
                                     z_tilde_auto, z_tilde_degenerate)
from rmtratios.weights_moments import ensemble_weight

WEIGHTS = {"gue": ensemble_weight("GUE"), "chiral": ensemble_weight("chiral", {"nu": 1})}

MAIN = [(n, k1, k2, l1, k2 - k1 + l1) for n in range(3) for k1 in range(3) for k2 in range(3) for l1 in range(3)
        if 0 <= k2 - k1 + l1 <= 2 and k2 + n - k1 >= 0]


def check(spec, value, tol=1e-7):
    ref = direct_vdm2(spec)
    assert abs(value - ref.value) <= tol * abs(ref.value) + 10 * ref.error


@pytest.mark.parametrize("name", WEIGHTS)
@pytest.mark.parametrize("n,k1,k2,l1,l2", MAIN)
def test_main_path(rng, name, n, k1, k2, l1, l2):
    p = lambda m: off_axis_points(rng, m)
    spec = Vdm2Spec(n, WEIGHTS[name], SP(p(k1), p(k2)), SP(p(l1), p(l2)))
    check(spec, z_tilde(spec).value)


DEG = [(n, k2 + n + dk, k2, l2 + n + dl, l2) for n in range(3) for k2 in range(2) for l2 in range(2)
       for dk in range(3) for dl in range(3) if k2 + n + dk <= 3 and l2 + n + dl <= 3]


@pytest.mark.parametrize("name", WEIGHTS)
@pytest.mark.parametrize("n,k1,k2,l1,l2", DEG)
def test_degenerate_path(rng, name, n, k1, k2, l1, l2):
    p = lambda m: off_axis_points(rng, m)
    spec = Vdm2Spec(n, WEIGHTS[name], SP(p(k1), p(k2)), SP(p(l1), p(l2)))
    check(spec, z_tilde_degenerate(spec).value)


@pytest.mark.parametrize("k1,k2,l1,l2", [(0, 0, 0, 0), (1, 1, 0, 0), (0, 0, 1, 1), (1, 0, 1, 0), (1, 1, 1, 1)])
def test_circle(rng, k1, k2, l1, l2):
    circ = ensemble_weight("circular")
    kap = [z * (1.6 if i % 2 else 0.5) for i, z in enumerate(off_axis_points(rng, k1))]
    spec = Vdm2Spec(2, circ, SP(kap, off_axis_points(rng, k2)), SP([0.4 + 0.3j] * l1, off_axis_points(rng, l2)))
    check(spec, z_tilde(spec).value)


@pytest.mark.parametrize("k1,k2,l1,l2", [(0, 0, 0, 0), (0, 1, 0, 1), (1, 0, 1, 0)])
def test_ginibre_one_eigenvalue(rng, k1, k2, l1, l2):
    gin = ensemble_weight("ginibre", {"tau": 0.7})
    p = lambda m: off_axis_points(rng, m)
    spec = Vdm2Spec(1, gin, SP(p(k1), p(k2)), SP(p(l1), p(l2)))
    check(spec, z_tilde(spec).value, tol=1e-5)


def test_path_guards(rng):
    p = lambda m: off_axis_points(rng, m)
    w = WEIGHTS["gue"]
    with pytest.raises(DimensionMismatch):
        z_tilde(Vdm2Spec(1, w, SP(p(1), p(0)), SP(p(0), p(1))))
    with pytest.raises(DimensionMismatch):
        z_tilde_degenerate(Vdm2Spec(2, w, SP(p(1), p(0)), SP(p(1), p(0))))
    with pytest.raises(DimensionMismatch):
        z_tilde_auto(Vdm2Spec(2, w, SP(p(1), p(1)), SP(p(0), p(2))))


@pytest.mark.parametrize("name", WEIGHTS)
@pytest.mark.parametrize("n,kt1,kt2", [(1, 1, 1), (2, 2, 1), (2, 1, 2), (3, 2, 2), (2, 0, 2)])
def test_hermitian_splits_and_routes_agree(rng, name, n, kt1, kt2):
    w = WEIGHTS[name]
    a, b = off_axis_points(rng, kt1), off_axis_points(rng, kt2)
    ref = hermitian_ratio_average(w, n, a, b, route="sqrtber").value
    for split in admissible_splits(n, kt1, kt2):
        val = hermitian_ratio_average(w, n, a, b, split=split).value
        assert val == pytest.approx(ref, rel=1e-8)


def test_hermitian_one_by_one_gaussian():
    # N=1: <(x - b)/(x - a)> = 1 + (a - b) <1/(x - a)>, normalized by sqrt(pi)
    w = WEIGHTS["gue"]
    a, b = 0.3 + 0.8j, -0.5 + 0.2j
    val = hermitian_ratio_average(w, 1, [a], [b]).value / hermitian_ratio_average(w, 1, [], []).value
    x = np.linspace(-9, 9, 200001)
    ref = trapezoid(np.exp(-x * x) * (x - b) / (x - a), x) / np.sqrt(np.pi)
    assert val == pytest.approx(ref, rel=1e-8)
