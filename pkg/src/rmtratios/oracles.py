"""Brute-force ground truth: literal quadrature, Monte Carlo sampling and
numerical checks of the Andreief / de Bruijn integration theorems."""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core_numerics import determinant, pfaffian
from .errors import DimensionTooLarge, InsufficientSamples, InvalidParameter, UnsupportedEnsemble
from .quadrature import composite_rule, graded_edges, panel_edges, tensor_integrate
from .sqrtber_averages import SqrtBerSpec
from .vdm2_averages import Vdm2Spec
from .weights_moments import WeightFunction, _support_gap, rule_1d

MAX_DIM = 4
MAX_NODES = 2e8


@dataclass(frozen=True)
class OracleResult:
    value: complex
    error: float
    method: str
    meta: dict | None = None


@dataclass(frozen=True)
class McConfig:
    samples: int = 1_000_000
    seed: int = 0
    shards: int = 8
    eps_mc: float = 1e-6
    batch: int = 50_000

    def __post_init__(self):
        if self.samples < 1 or self.shards < 1:
            raise InvalidParameter("samples and shards must be positive")
        if self.eps_mc <= 0:
            raise InvalidParameter("eps_mc must be positive")


def worker_count(requested: int) -> int:
    cap = os.environ.get("RMT_THREADS")
    limit = int(cap) if cap and cap.isdigit() and int(cap) > 0 else (os.cpu_count() or 1)
    return max(1, min(requested, limit))


# ------------------------------------------------------- variable rules

def _variable_rule(w: WeightFunction, poles: Sequence[complex], level: int, max_width: float = 1.0):
    """Nodes z and weights (incl. density) for one integration variable."""
    order = 10 + 6 * level
    if w.one_d:
        z, wt, _ = rule_1d(w, max_width, order, poles=poles, ratio=0.5)
        return z, wt
    if w.support == "unit-circle":
        dist = min([abs(abs(p) - 1.0) for p in poles] + [1.0])
        m = int(min(2 ** 14, max(64, 2 ** math.ceil(math.log2(40.0 / max(dist, 1e-3))))) * (2 ** level))
        phi = 2 * np.pi * np.arange(m) / m
        z = np.exp(1j * phi)
        return z, np.asarray(w.density(z), dtype=complex) * (2 * np.pi / m)
    return _plane_rule(w, poles, level)


def _plane_rule(w: WeightFunction, poles: Sequence[complex], level: int):
    """Partition of unity: a smooth background polar grid around the origin
    plus one pole-centred polar patch per pole, where rho cancels 1/(p-z)."""
    centres: list[complex] = []
    for p in poles:
        if all(abs(p - c) > 1e-12 for c in centres):
            centres.append(complex(p))
    order = 12 + 6 * level
    radius = w.radius()
    if not centres:
        edges = graded_edges(0.0, radius, (), 0.5)
        r, wr = composite_rule(edges, order)
        m = 48 * (2 ** level)
        return _polar_nodes(0j, r, wr * r, m, w)
    seps = [abs(a - b) for i, a in enumerate(centres) for b in centres[i + 1:]]
    s = 0.3 * min(seps + [1.0])

    def bump(z, c):
        return np.exp(-((np.abs(z - c) / s) ** 8))

    def shares(z):
        b = [bump(z, c) for c in centres]
        b0 = np.prod([1.0 - x for x in b], axis=0)
        return b0, b, b0 + sum(b)

    # background: integrand vanishes to high order near each pole
    reach = max(abs(c) for c in centres) + 2 * s
    edges = panel_edges(0.0, reach, sorted({abs(c) for c in centres}), 0.25 * s)
    if radius > reach:
        edges = np.concatenate([edges, panel_edges(reach, radius, (), 0.5)[1:]])
    r, wr = composite_rule(edges, order)
    m = int(2 ** math.ceil(math.log2(max(64.0, 12 * np.pi * reach / s)))) * (2 ** level)
    zb, wb = _polar_nodes(0j, r, wr * r, m, w)
    b0, _, tot = shares(zb)
    zs, ws = [zb], [wb * b0 / tot]
    # pole patches: the area element rho is kept, the integrand's 1/rho is integrable
    r, wr = composite_rule(panel_edges(0.0, 1.6 * s, (), 0.2 * s), order)
    for i, c in enumerate(centres):
        zp, wp = _polar_nodes(c, r, wr * r, 32 * (2 ** level), w)
        _, b, tot = shares(zp)
        zs.append(zp)
        ws.append(wp * b[i] / tot)
    return np.concatenate(zs), np.concatenate(ws)


def _polar_nodes(centre: complex, r, wr, m: int, w: WeightFunction):
    th = 2 * np.pi * (np.arange(m) + 0.5) / m
    z = (centre + r[:, None] * np.exp(1j * th)[None, :]).ravel()
    wt = (wr[:, None] * np.full(m, 2 * np.pi / m)[None, :]).ravel()
    return z, wt * np.asarray(w.density(z), dtype=complex)


def _refined(evaluate, rtol: float = 1e-9):
    v0 = evaluate(0)
    v1 = evaluate(1)
    return v1, abs(v1 - v0)


# ---------------------------------------------------- literal integrals

def _vdm(cols: list[np.ndarray]) -> np.ndarray:
    out = np.ones_like(cols[0]) if cols else np.ones(1)
    for a in range(len(cols)):
        for b in range(a + 1, len(cols)):
            out = out * (cols[a] - cols[b])
    return out


def direct_sqrtber(g_weights: Sequence[WeightFunction], f_weights: Sequence[WeightFunction],
                   bosonic: Sequence[complex] = (), fermionic: Sequence[complex] = ()) -> OracleResult:
    """Tensor quadrature of the literal square-root-Berezinian integrand."""
    g_weights, f_weights = list(g_weights), list(f_weights)
    n1, n2 = len(g_weights), len(f_weights)
    if n1 + n2 > MAX_DIM:
        raise DimensionTooLarge(f"{n1 + n2} integration variables exceed {MAX_DIM}")
    k1 = np.asarray(list(bosonic), dtype=complex)
    k2 = np.asarray(list(fermionic), dtype=complex)
    if n1 + n2 == 0:
        return OracleResult(1.0 + 0j, 0.0, "direct-quadrature")
    width = 1.0
    for g in g_weights:
        for f in f_weights:
            width = min(width, max(0.05, _support_gap(g, f)))

    def evaluate(level):
        rules = [_variable_rule(g, list(k2), level, width) for g in g_weights]
        rules += [_variable_rule(f, list(k1), level, width) for f in f_weights]

        def integrand(v):
            z1, z2 = v[:n1], v[n1:]
            val = np.ones(v[0].shape, dtype=complex)
            for z in z1:
                for kb in k1:
                    val = val * (z - kb)
                for kb in k2:
                    val = val / (z - kb)
            for z in z2:
                for kb in k2:
                    val = val * (z - kb)
                for ka in k1:
                    val = val / (ka - z)
            val = val * _vdm(z1) * _vdm(z2)
            for za in z1:
                for zb in z2:
                    val = val / (za - zb)
            return val
        return tensor_integrate(integrand, rules)

    value, err = _refined(evaluate)
    return OracleResult(value, err, "direct-quadrature")


def direct_vdm2(spec: Vdm2Spec) -> OracleResult:
    """Tensor quadrature of the literal squared-Vandermonde integrand."""
    n, w = spec.N, spec.g
    dim = n * (2 if w.support == "complex-plane" else 1)
    if dim > MAX_DIM:
        raise DimensionTooLarge(f"{dim} real integration dimensions exceed {MAX_DIM}")
    if n == 0:
        return OracleResult(1.0 + 0j, 0.0, "direct-quadrature")
    k1, k2 = spec.kappa.k1, spec.kappa.k2
    l1, l2 = spec.lam.k1, spec.lam.k2
    poles = list(k1) + list(np.conj(l1))
    if float(len(_variable_rule(w, poles, 1)[0])) ** n > MAX_NODES:
        raise DimensionTooLarge(f"tensor rule for N={n} exceeds {MAX_NODES:.0e} nodes")

    def evaluate(level):
        rule = _variable_rule(w, poles, level)

        def integrand(v):
            val = np.ones(v[0].shape, dtype=complex)
            for z in v:
                zc = np.conj(z)
                for kb in k2:
                    val = val * (kb - z)
                for lb in l2:
                    val = val * (lb - zc)
                for ka in k1:
                    val = val / (ka - z)
                for la in l1:
                    val = val / (la - zc)
            dv = _vdm(list(v))
            return val * dv * np.conj(dv)
        return tensor_integrate(integrand, [rule] * n)

    value, err = _refined(evaluate)
    return OracleResult(value, err, "direct-quadrature")


def direct_quadrature_z(spec) -> OracleResult:
    if isinstance(spec, SqrtBerSpec):
        res = direct_sqrtber(spec.g_weights, spec.f_weights, spec.sp.bosonic, spec.sp.fermionic)
        return OracleResult(spec.sign * res.value, res.error, res.method)
    if isinstance(spec, Vdm2Spec):
        return direct_vdm2(spec)
    raise InvalidParameter("unsupported spec type")


# ---------------------------------------------------------- Monte Carlo

def _sample_eigenvalues(ensemble: str, n: int, size: int, rng: np.random.Generator, params: dict) -> np.ndarray:
    key = ensemble.lower()
    if key in ("gue", "gaussian"):
        c = float(params.get("c", 1.0))
        diag = rng.normal(0.0, math.sqrt(1.0 / (2 * c)), (size, n))
        off = (rng.normal(0.0, math.sqrt(1.0 / (4 * c)), (size, n, n))
               + 1j * rng.normal(0.0, math.sqrt(1.0 / (4 * c)), (size, n, n)))
        h = np.triu(off, 1)
        h = h + np.conj(np.swapaxes(h, 1, 2))
        h[:, np.arange(n), np.arange(n)] = diag
        return np.linalg.eigvalsh(h).astype(complex)
    if key in ("lue", "laguerre", "chiral"):
        c = float(params.get("c", 1.0))
        nu = int(params.get("nu", 0))
        sd = math.sqrt(1.0 / (2 * c))
        x = rng.normal(0.0, sd, (size, n, n + nu)) + 1j * rng.normal(0.0, sd, (size, n, n + nu))
        return np.linalg.eigvalsh(x @ np.conj(np.swapaxes(x, 1, 2))).astype(complex)
    if key in ("cue", "circular"):
        z = (rng.normal(size=(size, n, n)) + 1j * rng.normal(size=(size, n, n))) / math.sqrt(2)
        q, r = np.linalg.qr(z)
        ph = np.diagonal(r, axis1=1, axis2=2)
        q = q * (ph / np.abs(ph))[:, None, :]
        return np.linalg.eigvals(q)
    raise UnsupportedEnsemble(f"no sampler for {ensemble!r}")


def _shard(ensemble, n, count, seedseq, params, k1, k2, l1, l2, eps, batch):
    rng = np.random.default_rng(seedseq)
    s1 = 0j
    s2 = 0.0
    clamps = 0
    done = 0
    while done < count:
        m = min(batch, count - done)
        ev = _sample_eigenvalues(ensemble, n, m, rng, params)
        evc = np.conj(ev)
        val = np.ones(m, dtype=complex)
        for kb in k2:
            val *= np.prod(ev - kb, axis=1)
        for lb in l2:
            val *= np.prod(evc - lb, axis=1)
        for ka in k1:
            den = ev - ka
            small = np.abs(den) < eps
            clamps += int(small.sum())
            den = np.where(small, eps * np.exp(1j * np.angle(den)), den)
            val /= np.prod(den, axis=1)
        for la in l1:
            den = evc - la
            small = np.abs(den) < eps
            clamps += int(small.sum())
            den = np.where(small, eps * np.exp(1j * np.angle(den)), den)
            val /= np.prod(den, axis=1)
        s1 += val.sum()
        s2 += float(np.sum(np.abs(val) ** 2))
        done += m
    return s1, s2, clamps


def _pairwise(items):
    items = list(items)
    while len(items) > 1:
        nxt = [tuple(a + b for a, b in zip(items[i], items[i + 1])) for i in range(0, len(items) - 1, 2)]
        if len(items) % 2:
            nxt.append(items[-1])
        items = nxt
    return items[0]


def mc_matrix_average(ensemble: str, n: int, kappa1: Sequence[complex] = (), kappa2: Sequence[complex] = (),
                      mc: McConfig = McConfig(), params: dict | None = None,
                      lambda1: Sequence[complex] = (), lambda2: Sequence[complex] = (),
                      tolerance: float | None = None) -> OracleResult:
    """Sample mean of prod det(H - kappa2) / prod det(H - kappa1).

    ``lambda1``/``lambda2`` add factors with H^dagger (relevant for the
    circular ensemble).  The result is normalized (a probability average).
    """
    params = dict(params or {})
    k1 = [complex(v) for v in kappa1]
    k2 = [complex(v) for v in kappa2]
    l1 = [complex(v) for v in lambda1]
    l2 = [complex(v) for v in lambda2]
    counts = [mc.samples // mc.shards + (1 if i < mc.samples % mc.shards else 0) for i in range(mc.shards)]
    seeds = np.random.SeedSequence(mc.seed).spawn(mc.shards)
    args = [(ensemble, n, counts[i], seeds[i], params, k1, k2, l1, l2, mc.eps_mc, mc.batch) for i in range(mc.shards)]
    with ThreadPoolExecutor(max_workers=worker_count(mc.shards)) as pool:
        parts = list(pool.map(lambda a: _shard(*a), args))
    s1, s2, clamps = _pairwise(parts)
    mean = s1 / mc.samples
    var = max(s2 / mc.samples - abs(mean) ** 2, 0.0)
    stderr = math.sqrt(var / mc.samples)
    if tolerance is not None and stderr > tolerance:
        raise InsufficientSamples(f"standard error {stderr:.3e} exceeds {tolerance:.3e}")
    rate = clamps / (mc.samples * max(1, n * (len(k1) + len(l1))))
    return OracleResult(complex(mean), stderr, "monte-carlo", {"clamp_rate": rate, "samples": mc.samples})


# ----------------------------------------------------- theorem checks

GH_NODES = 16


def _gauss_hermite():
    x, w = np.polynomial.hermite.hermgauss(GH_NODES)
    return x, w


def _envelope_funcs(coeffs: np.ndarray):
    """Functions c(x) e^{-x^2/2} with polynomial coefficients per row."""
    def ev(x):
        x = np.asarray(x)
        vals = np.array([np.polynomial.polynomial.polyval(x, c) for c in coeffs], dtype=complex)
        return vals.reshape(len(coeffs), *x.shape) * np.exp(-0.5 * x ** 2)
    return ev


def _random_coeffs(rng: np.random.Generator, count: int, degree: int = 3) -> np.ndarray:
    return rng.normal(size=(count, degree + 1)) + 1j * rng.normal(size=(count, degree + 1))


def _tensor_nodes(n: int):
    """Gauss-Hermite tensor grid for weight 1 (weights include e^{x^2})."""
    x, w = _gauss_hermite()
    w = w * np.exp(x ** 2)
    grids = np.meshgrid(*([x] * n), indexing="ij")
    wts = np.meshgrid(*([w] * n), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    wt = np.prod(np.stack([g.ravel() for g in wts], axis=1), axis=1)
    return pts, wt


def _report(lhs: complex, rhs: complex, tol: float, seed) -> dict:
    dev = abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)
    return {"lhs": lhs, "rhs": rhs, "rel_dev": dev, "pass": bool(dev <= tol), "seed": seed}


def andreief_check(r_coeffs: np.ndarray, s_coeffs: np.ndarray, r: np.ndarray, s: np.ndarray, n: int,
                   tol: float = 1e-7, seed=None) -> dict:
    """Extended Andreief theorem for R_b, S_b = poly_b(x) exp(-x^2/2).

    r is k x (N+k), s is l x (N+l).
    """
    k, l = len(r_coeffs) - n, len(s_coeffs) - n
    if k < 0 or l < 0:
        raise InvalidParameter("function counts must be N+k and N+l")
    r = np.asarray(r, dtype=complex).reshape(k, n + k)
    s = np.asarray(s, dtype=complex).reshape(l, n + l)
    R, S = _envelope_funcs(r_coeffs), _envelope_funcs(s_coeffs)
    if n == 0:
        lhs = determinant(r) * determinant(s)
    else:
        pts, wt = _tensor_nodes(n)
        rv = np.stack([R(pts[:, a]).T for a in range(n)], axis=1)   # (P, N, N+k)
        sv = np.stack([S(pts[:, a]).T for a in range(n)], axis=1)
        m1 = np.concatenate([np.broadcast_to(r, (pts.shape[0],) + r.shape), rv], axis=1)
        m2 = np.concatenate([np.broadcast_to(s, (pts.shape[0],) + s.shape), sv], axis=1)
        lhs = complex(np.sum(wt * np.linalg.det(m1) * np.linalg.det(m2)))
    x, w = _gauss_hermite()
    w = w * np.exp(x ** 2)
    gram = (R(x) * w[None, :]) @ S(x).T
    top = np.hstack([np.zeros((l, k), dtype=complex), s])
    bottom = np.hstack([r.T, gram])
    rhs = (-1) ** (k * l) * math.factorial(n) * determinant(np.vstack([top, bottom]))
    return _report(complex(lhs), complex(rhs), tol, seed)


def debruijn_check(a_mat: np.ndarray, b_coeffs: np.ndarray, c_coeffs: np.ndarray, n: int,
                   tol: float = 1e-7, seed=None) -> dict:
    """Extended de Bruijn theorem; a_mat is (2N+l) x l, B_a, C_a as above."""
    a_mat = np.asarray(a_mat, dtype=complex)
    size = 2 * n + a_mat.shape[1]
    l = a_mat.shape[1]
    if a_mat.shape[0] != size or len(b_coeffs) != size or len(c_coeffs) != size:
        raise InvalidParameter("de Bruijn data must have 2N+l rows")
    B, C = _envelope_funcs(b_coeffs), _envelope_funcs(c_coeffs)
    if n == 0:
        lhs = determinant(a_mat)
    else:
        pts, wt = _tensor_nodes(n)
        bv = np.stack([B(pts[:, j]).T for j in range(n)], axis=2)   # (P, size, N)
        cv = np.stack([C(pts[:, j]).T for j in range(n)], axis=2)
        mats = np.concatenate([np.broadcast_to(a_mat, (pts.shape[0],) + a_mat.shape), bv, cv], axis=2)
        lhs = complex(np.sum(wt * np.linalg.det(mats)))
    x, w = _gauss_hermite()
    w = w * np.exp(x ** 2)
    bw = B(x) * w[None, :]
    cx = C(x)
    dmat = bw @ cx.T
    dmat = dmat - dmat.T
    full = np.zeros((l + size, l + size), dtype=complex)
    full[:l, l:] = a_mat.T
    full[l:, :l] = -a_mat
    full[l:, l:] = dmat
    rhs = (-1) ** (n * (n - 1) // 2 + l * (l - 1) // 2) * math.factorial(n) * pfaffian(full, tol=1e-9)
    return _report(complex(lhs), complex(rhs), tol, seed)


def random_andreief(rng: np.random.Generator, n: int, k: int, l: int, tol: float = 1e-7, seed=None) -> dict:
    return andreief_check(_random_coeffs(rng, n + k), _random_coeffs(rng, n + l),
                          rng.normal(size=(k, n + k)) + 1j * rng.normal(size=(k, n + k)),
                          rng.normal(size=(l, n + l)) + 1j * rng.normal(size=(l, n + l)), n, tol, seed)


def random_debruijn(rng: np.random.Generator, n: int, l: int, tol: float = 1e-7, seed=None) -> dict:
    size = 2 * n + l
    return debruijn_check(rng.normal(size=(size, l)) + 1j * rng.normal(size=(size, l)),
                          _random_coeffs(rng, size), _random_coeffs(rng, size), n, tol, seed)


# ------------------------------------------------ external-field oracles

def cd_kernel_oracle(factor, n: int, x, y) -> np.ndarray:
    """Christoffel-Darboux kernel w(x) sum_j p_j(x) p_j(y) / h_j with the p_j
    orthogonalized explicitly (Gram-Schmidt on monomials, Gauss rules)."""
    from scipy.special import roots_genlaguerre, roots_hermite

    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    c = factor.c
    if factor.kind == "gaussian":
        t, wt = roots_hermite(2 * n + 8)
        nodes, weights = t / math.sqrt(c), wt / math.sqrt(c)
        dens = lambda v: np.exp(-c * v * v)
    else:
        a = factor.nu
        t, wt = roots_genlaguerre(2 * n + 8, a)
        nodes, weights = t / c, wt / c ** (a + 1)
        dens = lambda v: np.where(v > 0, np.abs(v) ** a * np.exp(-c * v), 0.0)
    # modified Gram-Schmidt in the discrete inner product (exact for degree < 2n+16)
    basis = []
    for j in range(n):
        v = nodes ** j
        coef = np.zeros(n)
        coef[j] = 1.0
        for p_coef, p_val in basis:
            proj = np.sum(weights * v * p_val)
            v = v - proj * p_val
            coef = coef - proj * p_coef
        norm = math.sqrt(np.sum(weights * v * v))
        basis.append((coef / norm, v / norm))
    px = np.stack([np.polynomial.polynomial.polyval(x, pc) for pc, _ in basis])
    py = np.stack([np.polynomial.polynomial.polyval(y, pc) for pc, _ in basis])
    return dens(x) * np.sum(px * py, axis=0)


def r2_fourier_oracle(factor, n: int, t: float, x: float) -> complex:
    """r2(t, x) from its defining Fourier integral
    i int Phi(r) e^{-irx} [e^{irt} - sum_{j<N} (irt)^j / j!] dr, one
    frequency at a time with QAWF (oscillatory, conditionally convergent)."""
    from scipy.integrate import quad

    def fourier(h, omega):
        # int_R h(r) e^{i omega r} dr for complex h on the whole line
        def part(fun, wvar):
            if omega == 0:
                return quad(fun, 0, np.inf, limit=400)[0]
            return quad(fun, 0, np.inf, weight=wvar, wvar=abs(omega), limlst=200)[0]
        even = lambda r: h(r) + h(-r)
        odd = lambda r: h(r) - h(-r)
        sgn = math.copysign(1.0, omega) if omega else 0.0
        re = part(lambda r: even(r).real, "cos") - sgn * part(lambda r: odd(r).imag, "sin")
        im = part(lambda r: even(r).imag, "cos") + sgn * part(lambda r: odd(r).real, "sin")
        return complex(re, im)

    phi = lambda r: complex(factor.phi(np.array([r]), n)[0])
    total = fourier(phi, t - x)
    for j in range(n):
        total -= fourier(lambda r, j=j: phi(r) * (1j * r * t) ** j / math.factorial(j), -x)
    return 1j * total
