"""Acceptance suite: one check per criterion, each printing "criterion N: PASS/FAIL".

Run directly with ``python3 tests/test_acceptance.py`` or through pytest.
"""
import math
import sys
import time

import numpy as np
import pytest
from scipy.integrate import quad

from rmtratios.berezinians import (IDENTITY_FAMILIES, SpectralParameters, ber1_product, ber4_product,
                                   random_spectral_parameters, sqrt_ber2_product)
from rmtratios.core_numerics import pfaffian
from rmtratios.external_field import (CharacteristicFactor, ExternalFieldSpec, IntermediateSpec, r2_entry,
                                      rk_correlation, rk_intermediate)
from rmtratios.oracles import (McConfig, cd_kernel_oracle, direct_sqrtber, direct_vdm2, mc_matrix_average,
                               r2_fourier_oracle, random_andreief, random_debruijn)
from rmtratios.sqrtber_averages import SqrtBerSpec, z_average
from rmtratios.vdm2_averages import (Vdm2Spec, admissible_splits, hermitian_ratio_average, z_tilde,
                                     z_tilde_degenerate)
from rmtratios.weights_moments import WeightFunction, ensemble_weight

SEED = 20240601


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def _off_axis(rng, n, lo=0.4, hi=1.2):
    return list(rng.uniform(-1, 1, n) + 1j * rng.choice([-1, 1], n) * rng.uniform(lo, hi, n))


# ----------------------------------------------------------- criterion 1

def criterion_1():
    """Product form = determinant form for every family and p, q <= 6."""
    rng = np.random.default_rng(SEED)
    start, worst = time.time(), {}
    for fam, (prod, det) in IDENTITY_FAMILIES.items():
        qs = [0] if fam == "vandermonde" else range(7)
        w = 0.0
        for p in range(7):
            for q in qs:
                for _ in range(100):
                    sp = random_spectral_parameters(rng, p, q, 0.5)
                    w = max(w, _rel(det(sp), prod(sp)))
        worst[fam] = w
    elapsed = time.time() - start
    ok = all(v <= 1e-9 for v in worst.values()) and elapsed < 10
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    return ok, f"max rel dev {detail}; {elapsed:.1f}s"


# ----------------------------------------------------------- criterion 2

def criterion_2():
    """Translation invariance and the exchange rules on the same kind of draws."""
    rng = np.random.default_rng(SEED)
    worst_t = worst_x = 0.0
    for p in range(7):
        for q in range(7):
            for _ in range(100):
                sp = random_spectral_parameters(rng, p, q, 0.5)
                eps = complex(rng.normal(), rng.normal())
                sh = sp.shifted(eps)
                for f in (sqrt_ber2_product, ber1_product, ber4_product):
                    worst_t = max(worst_t, _rel(f(sh), f(sp)))
                    det = IDENTITY_FAMILIES["ber2" if f is sqrt_ber2_product else
                                             "ber1" if f is ber1_product else "ber4"][1]
                    worst_t = max(worst_t, _rel(det(sh), det(sp)))
                worst_x = max(worst_x, _rel(sqrt_ber2_product(sp.swapped()), (-1) ** (p * q) * sqrt_ber2_product(sp)))
                worst_x = max(worst_x, _rel(ber4_product(sp), ber1_product(sp.swapped())))
    ok = worst_t <= 1e-9 and worst_x <= 1e-9
    return ok, f"translation {worst_t:.1e}, exchange {worst_x:.1e}"


# ----------------------------------------------------------- criterion 3

def _gauss(c, shift=0j):
    return WeightFunction("real-line", lambda x: np.exp(-c * x ** 2), shift=shift)


def criterion_3():
    """Square-root Berezinian averages against direct quadrature, N1 + N2 <= 3."""
    rng = np.random.default_rng(SEED)
    start, worst, draws = time.time(), 0.0, 0
    lag = ensemble_weight("chiral", {"nu": 1})
    for n1 in range(4):
        for n2 in range(4 - n1):
            for k1 in range(3):
                for k2 in range(3):
                    if n1 + n2 == 3 and k1 + k2 > 2:
                        continue
                    g = [_gauss(1.0 + 0.3 * j, 0.3 * j + 0.6j) for j in range(n1)]
                    f = [_gauss(0.8 + 0.4 * j).times_monomial(j) if j % 2 == 0 else lag for j in range(n2)]
                    b = list(rng.uniform(-1, 1, k1) + 1j * rng.choice([-1, 1], k1) * rng.uniform(0.5, 1.5, k1))
                    fe = list(rng.uniform(-1, 1, k2) + 0.3j * rng.normal(size=k2))
                    val = z_average(SqrtBerSpec.build(g, f, b, fe)).value
                    ref = direct_sqrtber(g, f, b, fe)
                    worst = max(worst, _rel(val, ref.value))
                    draws += 1
    elapsed = time.time() - start
    ok = worst <= 1e-6 and draws >= 20 and elapsed < 120
    return ok, f"{draws} draws, max rel err {worst:.1e}; {elapsed:.1f}s"


# ----------------------------------------------------------- criterion 4

def criterion_4():
    """Squared-Vandermonde averages against direct quadrature (N <= 3) and Monte Carlo."""
    rng = np.random.default_rng(SEED)
    start, worst, count = time.time(), 0.0, 0
    weights = [ensemble_weight("GUE"), ensemble_weight("chiral", {"nu": 1})]
    for w in weights:
        for n in range(4):
            for k1 in range(3):
                for k2 in range(3):
                    for l1 in range(3):
                        l2 = k2 - k1 + l1
                        if not 0 <= l2 <= 2 or k2 + n - k1 < 0:
                            continue
                        spec = Vdm2Spec(n, w, SpectralParameters(_off_axis(rng, k1), _off_axis(rng, k2)),
                                        SpectralParameters(_off_axis(rng, l1), _off_axis(rng, l2)))
                        worst = max(worst, _rel(z_tilde(spec).value, direct_vdm2(spec).value))
                        count += 1
        for n in range(4):
            for k2 in range(2):
                for l2 in range(2):
                    k1, l1 = k2 + n, l2 + n
                    if k1 > 3 or l1 > 3:
                        continue
                    spec = Vdm2Spec(n, w, SpectralParameters(_off_axis(rng, k1), _off_axis(rng, k2)),
                                    SpectralParameters(_off_axis(rng, l1), _off_axis(rng, l2)))
                    worst = max(worst, _rel(z_tilde_degenerate(spec).value, direct_vdm2(spec).value))
                    count += 1
    gue = ensemble_weight("GUE")
    a, b = [0.3 + 0.8j], [-0.5 - 0.6j]
    exact = hermitian_ratio_average(gue, 2, a, b).value / hermitian_ratio_average(gue, 2, [], []).value
    mc = mc_matrix_average("GUE", 2, a, b, McConfig(samples=1_000_000, seed=SEED))
    sigmas = abs(mc.value - exact) / mc.error
    elapsed = time.time() - start
    ok = worst <= 1e-6 and sigmas <= 3 and elapsed < 300
    return ok, f"{count} cases, max rel err {worst:.1e}; MC {sigmas:.2f} sigma; {elapsed:.1f}s"


# ----------------------------------------------------------- criterion 5

def criterion_5():
    """Split route = power route for Hermitian averages; split independence."""
    rng = np.random.default_rng(SEED)
    worst_route = worst_split = 0.0
    for w in (ensemble_weight("GUE"), ensemble_weight("chiral", {"nu": 1})):
        for n in range(1, 4):
            for kt1 in range(3):
                for kt2 in range(3):
                    a, b = _off_axis(rng, kt1), _off_axis(rng, kt2)
                    splits = admissible_splits(n, kt1, kt2)
                    if not splits:
                        continue
                    vals = [hermitian_ratio_average(w, n, a, b, split=s).value for s in splits]
                    ref = hermitian_ratio_average(w, n, a, b, route="sqrtber").value
                    worst_route = max(worst_route, _rel(vals[0], ref))
                    worst_split = max(worst_split, max(_rel(v, vals[0]) for v in vals))
    ok = worst_route <= 1e-6 and worst_split <= 1e-8
    return ok, f"route {worst_route:.1e}, split {worst_split:.1e}"


# ----------------------------------------------------------- criterion 6

def criterion_6():
    """Extended Andreief and de Bruijn identities on 50 seeded draws each."""
    start = time.time()
    seq = np.random.SeedSequence(SEED)
    a_seeds, d_seeds = seq.spawn(2)
    worst_a = worst_d = 0.0
    for j, child in enumerate(a_seeds.spawn(50)):
        rng = np.random.default_rng(child)
        n, k, l = j % 4, (j // 4) % 3, (j // 12) % 3
        worst_a = max(worst_a, random_andreief(rng, n, k, l)["rel_dev"])
    for j, child in enumerate(d_seeds.spawn(50)):
        rng = np.random.default_rng(child)
        n, l = j % 3, (j // 3) % 3
        if n == 0 and l == 0:
            l = 1
        worst_d = max(worst_d, random_debruijn(rng, n, l)["rel_dev"])
    elapsed = time.time() - start
    ok = worst_a <= 1e-7 and worst_d <= 1e-7 and elapsed < 60
    return ok, f"andreief {worst_a:.1e}, de Bruijn {worst_d:.1e}; {elapsed:.1f}s"


# ----------------------------------------------------------- criterion 7

def criterion_7():
    """Zero field reproduces the Christoffel-Darboux determinants; density mass N."""
    worst, worst_mass = 0.0, 0.0
    factors = [CharacteristicFactor("gaussian", 0.8), CharacteristicFactor("laguerre", 1.3, 1.5),
               CharacteristicFactor("laguerre", 1.0, 0.0)]
    for f in factors:
        for n in range(1, 5):
            spec = ExternalFieldSpec(n, 0.0, (), f)
            for k in (1, 2):
                if k > n:
                    continue
                xs = np.array([0.7, 1.9][:k])
                ker = cd_kernel_oracle(f, n, xs[:, None], xs[None, :])
                worst = max(worst, _rel(rk_correlation(spec, xs).value, np.linalg.det(ker)))
            lo, hi = (-20.0, 20.0) if f.kind == "gaussian" else (0.0, 80.0)
            mass = quad(lambda x: rk_correlation(spec, [x]).value.real, lo, hi, limit=400, epsabs=1e-10)[0]
            worst_mass = max(worst_mass, abs(mass - n))
    ok = worst <= 1e-7 and worst_mass <= 1e-4
    return ok, f"CD rel dev {worst:.1e}, mass dev {worst_mass:.1e}"


# ----------------------------------------------------------- criterion 8

def criterion_8():
    """Continuity in alpha, invariance under field permutations, closed r2 entries."""
    e, xs = [0.5, -0.3, 1.1], [0.8, 1.5]
    ratios, worst_perm = [], 0.0
    for f in (CharacteristicFactor("gaussian", 1.0), CharacteristicFactor("laguerre", 1.0, 0.5)):
        base = rk_correlation(ExternalFieldSpec(3, 0.0, e, f), xs).value
        d2, d3 = (_rel(rk_correlation(ExternalFieldSpec(3, a, e, f), xs).value, base) for a in (1e-2, 1e-3))
        ratios.append(d2 / d3)
        r = rk_correlation(ExternalFieldSpec(3, 0.3, e, f), xs).value
        for perm in ([1.1, 0.5, -0.3], [-0.3, 1.1, 0.5]):
            worst_perm = max(worst_perm, _rel(rk_correlation(ExternalFieldSpec(3, 0.3, perm, f), xs).value, r))
    worst_r2 = 0.0
    for n, nu, t, x in [(1, 0.0, 0.5, 2.0), (2, 1.0, 0.7, 1.5), (2, 0.0, 1.7, 0.9), (3, 0.5, 0.4, 2.5)]:
        f = CharacteristicFactor("laguerre", 1.0, nu)
        worst_r2 = max(worst_r2, _rel(r2_entry(ExternalFieldSpec(n, 0.0, (), f), t, x), r2_fourier_oracle(f, n, t, x)))
    # O(alpha): a tenfold smaller alpha gives a roughly tenfold smaller deviation
    ok = all(5 <= q <= 20 for q in ratios) and worst_perm <= 1e-10 and worst_r2 <= 1e-7
    detail = ", ".join(f"{q:.1f}" for q in ratios)
    return ok, f"deviation ratios {detail}, permutation {worst_perm:.1e}, r2 {worst_r2:.1e}"


# ----------------------------------------------------------- criterion 9

def criterion_9():
    """Pfaffian structure of the intermediate classes; narrow H0 weight limit."""
    g = CharacteristicFactor("gaussian", 1.0)
    worst_anti = worst_pf = 0.0
    for kind, n, pts in [("quaternion", 2, [0.3]), ("quaternion", 2, [0.3, -0.6]), ("real", 2, [0.3]),
                         ("real", 3, [0.3, 1.1]), ("quaternion", 4, [0.2])]:
        spec = IntermediateSpec(n, 0.7, g, ensemble_weight("GUE", {"c": 0.5}), kind)
        mat = rk_intermediate(spec, pts).meta["matrix"]
        worst_anti = max(worst_anti, float(np.max(np.abs(mat + mat.T)) / np.max(np.abs(mat))))
        worst_pf = max(worst_pf, _rel(pfaffian(mat) ** 2, np.linalg.det(mat)))
    e0, alpha, c = 0.8, 0.7, 1e4
    h0 = ensemble_weight("GUE", {"exp": [-c * e0 ** 2, 2 * c * e0, -c]})
    inter = IntermediateSpec(1, alpha, g, h0, "unitary")
    fixed = ExternalFieldSpec(1, alpha, [e0], g)
    mom = lambda s, f, p: quad(lambda x: f(s, [x]).value.real * x ** p, -8, 9, limit=200)[0]
    mi = [mom(inter, rk_intermediate, p) for p in range(3)]
    mf = [mom(fixed, rk_correlation, p) for p in range(3)]
    worst_mom = max(abs(a - b) for a, b in zip(mi, mf))
    ok = worst_anti <= 1e-10 and worst_pf <= 1e-10 and worst_mom <= 1e-3
    return ok, f"antisymmetry {worst_anti:.1e}, Pf^2-det {worst_pf:.1e}, moments {worst_mom:.1e}"


# ---------------------------------------------------------- criterion 10

def criterion_10():
    """Pf^2 = det on random antisymmetric matrices; exact small closed forms."""
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for j in range(200):
        d = 2 + 2 * (j % 5)
        a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        a = a - a.T
        worst = max(worst, _rel(pfaffian(a) ** 2, np.linalg.det(a)))
    exact = True
    for _ in range(50):
        m = rng.integers(-9, 10, size=(4, 4)).astype(float)
        m = np.triu(m, 1) - np.triu(m, 1).T
        exact &= pfaffian(m[:2, :2]) == m[0, 1]
        closed = m[0, 1] * m[2, 3] - m[0, 2] * m[1, 3] + m[0, 3] * m[1, 2]
        exact &= abs(pfaffian(m) - closed) <= 1e-12 * max(1.0, abs(closed))
    ok = worst <= 1e-10 and bool(exact)
    return ok, f"max rel dev {worst:.1e}, closed forms {'exact' if exact else 'wrong'}"


CRITERIA = {i: globals()[f"criterion_{i}"] for i in range(1, 11)}


def run(i):
    try:
        ok, detail = CRITERIA[i]()
    except Exception as exc:  # a crash counts as a failure, reported with its cause
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    return ok, detail


@pytest.mark.slow
@pytest.mark.parametrize("number", list(CRITERIA))
def test_criterion(number, capsys):
    ok, detail = run(number)
    with capsys.disabled():
        print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for i in CRITERIA:
        ok, detail = run(i)
        failed += not ok
        print(f"criterion {i}: {'PASS' if ok else 'FAIL'} ({detail})", flush=True)
    sys.exit(1 if failed else 0)
