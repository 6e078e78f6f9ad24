"""Weight functions, moments, Cauchy transforms and moment matrices."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import special

from .core_numerics import SINGULAR_COND, condition_number
from .errors import (InvalidParameter, NonConvergentQuadrature, PoleOnSupport, SingularMomentMatrix,
                     UnsupportedEnsemble, UnsupportedOrder)
from .quadrature import (composite_rule, graded_edges, ordered_pair_integral, panel_edges, periodic_trapezoid,
                         quad_vector)

SUPPORTS = ("real-line", "positive-half-line", "interval", "unit-circle", "complex-plane")
ONE_D = ("real-line", "positive-half-line", "interval")
POLE_TOL = 1e-8
TAIL_REL = 1e-17
TAIL_POWER = 12
EPSABS = 1e-13
EPSREL = 1e-11


@dataclass(frozen=True, eq=False)
class WeightFunction:
    """A weight g(z) on one of the supported manifolds.

    For 1-D supports ``density`` takes the real coordinate x and the point in
    the plane is z = x + shift.  For the circle and the plane it takes z.
    """

    support: str
    density: Callable[[np.ndarray], np.ndarray]
    label: str = "custom"
    analytic_moments: Callable[[int, int], complex] | None = None
    shift: complex = 0j
    window: tuple | None = None
    params: dict = field(default_factory=dict)
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.support not in SUPPORTS:
            raise InvalidParameter(f"unknown support {self.support!r}")
        object.__setattr__(self, "shift", complex(self.shift))
        if self.shift != 0 and self.support not in ONE_D:
            raise InvalidParameter("shift applies to 1-D supports only")

    @property
    def one_d(self) -> bool:
        return self.support in ONE_D

    @property
    def real_support(self) -> bool:
        return self.one_d and self.shift.imag == 0

    def __call__(self, pts) -> np.ndarray:
        pts = np.asarray(pts)
        if self.one_d:
            return np.asarray(self.density(np.real(pts - self.shift)), dtype=complex)
        return np.asarray(self.density(pts.astype(complex)), dtype=complex)

    def times_monomial(self, j: int) -> "WeightFunction":
        """The weight g(z) z^j (used for f_j = E^{j-1} P(E))."""
        if j == 0:
            return self
        base, s = self.density, self.shift
        if self.one_d:
            dens = lambda x: base(x) * (np.asarray(x) + s) ** j
        else:
            dens = lambda z: base(z) * np.asarray(z) ** j
        am = None
        if self.analytic_moments is not None:
            parent = self.analytic_moments
            am = lambda a, b: parent(a + j, b)
        return WeightFunction(self.support, dens, f"{self.label}*z^{j}", am, s, self.window, dict(self.params))

    def x_window(self) -> tuple[float, float]:
        if not self.one_d:
            raise InvalidParameter("x_window is defined for 1-D supports")
        if "window" not in self._cache:
            self._cache["window"] = tuple(self.window) if self.window is not None else _auto_window_1d(self)
        return self._cache["window"]

    def radius(self) -> float:
        if self.support != "complex-plane":
            raise InvalidParameter("radius is defined for plane weights")
        if "radius" not in self._cache:
            self._cache["radius"] = float(self.window) if self.window is not None else _auto_radius(self)
        return self._cache["radius"]


def _natural_bounds(w: WeightFunction) -> tuple[float, float]:
    return {"real-line": (-np.inf, np.inf), "positive-half-line": (0.0, np.inf),
            "interval": (-1.0, 1.0)}[w.support]


def _auto_window_1d(w: WeightFunction) -> tuple[float, float]:
    if w.support == "interval":
        return (-1.0, 1.0)
    if w.support == "real-line":
        x = np.sinh(np.linspace(-13.0, 13.0, 5201))
    else:
        x = np.exp(np.linspace(-35.0, 12.5, 4001))
    with np.errstate(all="ignore"), warnings.catch_warnings():
        warnings.simplefilter("ignore")
        v = np.abs(np.asarray(w.density(x), dtype=complex)) * (1.0 + np.abs(x)) ** TAIL_POWER
    v = np.where(np.isfinite(v), v, 0.0)
    peak = v.max()
    if peak <= 0:
        raise UnsupportedOrder("weight vanishes on the sampled support")
    idx = np.nonzero(v > TAIL_REL * peak)[0]
    if idx.max() >= x.size - 1 or (w.support == "real-line" and idx.min() == 0):
        raise UnsupportedOrder("weight does not decay fast enough for polynomial moments")
    hi = float(x[idx.max() + 1])
    lo = 0.0 if w.support == "positive-half-line" else float(x[idx.min() - 1])
    return (lo, hi)


def _auto_radius(w: WeightFunction) -> float:
    r = np.exp(np.linspace(-10.0, 9.0, 1901))
    th = 2 * np.pi * np.arange(32) / 32
    z = r[:, None] * np.exp(1j * th)[None, :]
    with np.errstate(all="ignore"), warnings.catch_warnings():
        warnings.simplefilter("ignore")
        v = np.abs(np.asarray(w.density(z), dtype=complex)).max(axis=1) * r * (1 + r) ** TAIL_POWER
    v = np.where(np.isfinite(v), v, 0.0)
    idx = np.nonzero(v > TAIL_REL * v.max())[0]
    if idx.max() >= r.size - 1:
        raise UnsupportedOrder("plane weight does not decay fast enough")
    return float(r[idx.max() + 1])


# ---------------------------------------------------------------- 1-D maps

def _param_1d(w: WeightFunction):
    """(t_lo, t_hi, x(t), dx/dt, t(x)) with endpoint singularities smoothed."""
    lo, hi = w.x_window()
    if w.support == "positive-half-line":
        a, b = math.sqrt(max(lo, 0.0)), math.sqrt(hi)
        return a, b, (lambda t: t * t), (lambda t: 2.0 * t), (lambda x: math.sqrt(x) if x > 0 else 0.0)
    if w.support == "interval":
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        return (0.0, math.pi, (lambda t: mid - half * np.cos(t)), (lambda t: half * np.sin(t)),
                (lambda x: math.acos(min(1.0, max(-1.0, (mid - x) / half)))))
    return lo, hi, (lambda t: t), (lambda t: np.ones_like(t)), (lambda x: x)


def _integrate_1d(w: WeightFunction, func, x_points=(), epsabs=EPSABS, epsrel=EPSREL, raw=False):
    """int g(x) func(z, z*) dx over the window; func returns (n, m).

    With ``raw`` the integrand func(z, z*, x) already contains the density.
    """
    t0, t1, xf, jac, tf = _param_1d(w)
    s = w.shift
    lo, hi = w.x_window()
    tpts = [tf(p) for p in x_points if lo < p < hi]

    def f(t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        x = xf(t)
        if raw:
            vals = func(x + s, x + np.conj(s), x) * jac(t)[None, :]
        else:
            vals = func(x + s, x + np.conj(s)) * (w.density(x) * jac(t))[None, :]
        return vals[:, 0]

    return quad_vector(f, t0, t1, tpts, epsabs=epsabs, epsrel=epsrel)


def rule_1d(w: WeightFunction, max_width: float, order: int, x_breaks: Sequence[float] = (),
            poles: Sequence[complex] = (), ratio: float = 1.0):
    """Fixed composite rule: (points z, weights incl. density and Jacobian, z*).

    ``poles`` are singular points of the remaining integrand in the plane of
    z; panels are graded towards them.
    """
    t0, t1, xf, jac, tf = _param_1d(w)
    lo, hi = w.x_window()
    sing = [complex(p) - w.shift for p in poles]
    if w.support == "positive-half-line":
        sing = [np.sqrt(p) for p in sing]
    elif w.support == "interval":
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        sing = [np.arccos((mid - p) / half) for p in sing]
    sing += [complex(tf(b)) for b in x_breaks if lo < b < hi]
    edges = graded_edges(t0, t1, sing, max_width, ratio=ratio)
    t, wt = composite_rule(edges, order)
    x = xf(t)
    z = x + w.shift
    return z, wt * jac(t) * np.asarray(w.density(x), dtype=complex), x + np.conj(w.shift)


# ---------------------------------------------------------- circle, plane

def _integrate_circle(w: WeightFunction, func, near: Sequence[complex] = (), epsabs=EPSABS, epsrel=EPSREL):
    def f(phi):
        z = np.exp(1j * phi)
        return func(z, np.conj(z)) * np.asarray(w.density(z), dtype=complex)[None, :]

    prev = periodic_trapezoid(f, 64)
    m = 64
    while m < 2 ** 16:
        m *= 2
        cur = periodic_trapezoid(f, m)
        err = float(np.max(np.abs(cur - prev)))
        if err <= max(epsabs, epsrel * float(np.max(np.abs(cur)))):
            return cur, err
        prev = cur
    pts = [float(np.angle(p)) % (2 * np.pi) for p in near]
    return quad_vector(lambda p: f(np.atleast_1d(p))[:, 0], 0.0, 2 * np.pi, pts, epsabs, epsrel)


def _integrate_polar(w: WeightFunction, func, center: complex = 0j, singular: bool = False,
                     epsabs=EPSABS, epsrel=EPSREL):
    """Plane integral in polar coordinates around ``center``.

    With ``singular`` the integrand func is expected to already carry the
    factor rho from the area element (it represents rho * h(z)).
    """
    radius = w.radius() + abs(center)

    def make(m):
        th = 2 * np.pi * np.arange(m) / m
        e = np.exp(1j * th)

        def f(rho):
            z = center + rho * e
            vals = func(z, np.conj(z), rho, e) * np.asarray(w.density(z), dtype=complex)[None, :]
            if not singular:
                vals = vals * rho
            return vals.sum(axis=1) * (2 * np.pi / m)
        return f

    m = 64
    prev, _ = quad_vector(make(m), 0.0, radius, (abs(center),) if center else (), epsabs, epsrel)
    while m < 4096:
        m *= 2
        cur, err = quad_vector(make(m), 0.0, radius, (abs(center),) if center else (), epsabs, epsrel)
        diff = float(np.max(np.abs(cur - prev)))
        if diff <= max(10 * epsabs, 10 * epsrel * float(np.max(np.abs(cur)))):
            return cur, diff + err
        prev = cur
    raise NonConvergentQuadrature("angular rule did not converge")


def integrate(w: WeightFunction, func, x_points=(), epsabs=EPSABS, epsrel=EPSREL):
    """int g(z) func(z, z*) over the support of w (vector valued)."""
    if w.one_d:
        return _integrate_1d(w, func, x_points, epsabs, epsrel)
    if w.support == "unit-circle":
        return _integrate_circle(w, func, (), epsabs, epsrel)
    return _integrate_polar(w, lambda z, zc, rho, e: func(z, zc), 0j, False, epsabs, epsrel)


# ------------------------------------------------------------- moments

def _monomials(pairs):
    pairs = [(int(a), int(b)) for a, b in pairs]

    def func(z, zc):
        return np.array([z ** (a - 1) * zc ** (b - 1) for a, b in pairs])
    return func


def moments(w: WeightFunction, pairs: Sequence[tuple[int, int]]) -> np.ndarray:
    """Vector of int g(z) z^{a-1} z*^{b-1} for every (a, b) in pairs."""
    pairs = list(pairs)
    for a, b in pairs:
        if a < 1 or b < 1:
            raise InvalidParameter("moment orders start at 1")
    if not pairs:
        return np.zeros(0, dtype=complex)
    if w.analytic_moments is not None:
        return np.array([complex(w.analytic_moments(a, b)) for a, b in pairs])
    val, _ = integrate(w, _monomials(pairs))
    return val


def moment(w: WeightFunction, a: int, b: int = 1) -> complex:
    return complex(moments(w, [(a, b)])[0])


def moment_error(w: WeightFunction, a: int, b: int = 1) -> tuple[complex, float]:
    """Quadrature value and its error estimate (ignores closed forms)."""
    val, err = integrate(w, _monomials([(a, b)]))
    return complex(val[0]), err


# ------------------------------------------------------ Cauchy transforms

def _pole_on_support(w: WeightFunction, kp: complex) -> bool:
    lo, hi = _natural_bounds(w)
    if w.window is not None:
        lo, hi = max(lo, w.window[0]), min(hi, w.window[1])
    return abs(kp.imag) < POLE_TOL and lo - POLE_TOL <= kp.real <= hi + POLE_TOL


def cauchy_vector(w: WeightFunction, pole: complex, pairs: Sequence[tuple[int, int]] = ((1, 1),),
                  conjugate: bool = False) -> np.ndarray:
    """int g(z) z^{a-1} z*^{b-1} / (pole - z) (or / (pole - z*) with conjugate)."""
    pole = complex(pole)
    pairs = list(pairs)
    mono = _monomials(pairs)
    if w.one_d:
        s = np.conj(w.shift) if conjugate else w.shift
        kp = pole - s
        if _pole_on_support(w, kp):
            raise PoleOnSupport(f"pole {pole} lies on the support of {w.label}")
        lo, hi = w.x_window()
        x0 = kp.real
        if lo < x0 < hi:
            # subtract the value at the projection of the pole
            h0 = mono(np.array([x0 + w.shift]), np.array([x0 + np.conj(w.shift)]))[:, 0] * complex(w.density(np.array([x0]))[0])
            if np.all(np.isfinite(h0)):
                def func(z, zc, x):
                    dens = np.asarray(w.density(x), dtype=complex)
                    return (mono(z, zc) * dens[None, :] - h0[:, None]) / (kp - x)[None, :]

                val, _ = _integrate_1d(w, func, (x0,), raw=True)
                return val + h0 * (np.log(kp - lo) - np.log(kp - hi))
        val, _ = _integrate_1d(w, lambda z, zc: mono(z, zc) / (kp - ((zc if conjugate else z) - s))[None, :], (x0,))
        return val
    if w.support == "unit-circle":
        if abs(abs(pole) - 1.0) < POLE_TOL:
            raise PoleOnSupport(f"pole {pole} lies on the unit circle")

        def func(z, zc):
            return mono(z, zc) / (pole - (zc if conjugate else z))[None, :]
        val, _ = _integrate_circle(w, func, (pole,))
        return val
    # plane: polar coordinates around the singular point cancel 1/|z - c|
    center = np.conj(pole) if conjugate else pole

    def func(z, zc, rho, e):
        # 1/(pole - z) = -1/(rho e); 1/(pole - z*) = -1/(rho e*)
        fac = -np.conj(e) if not conjugate else -e
        return mono(z, zc) * fac[None, :]
    val, _ = _integrate_polar(w, func, center, singular=True)
    return val


def cauchy_transform(w: WeightFunction, pole: complex, a: int = 1, b: int = 1, conjugate: bool = False) -> complex:
    return complex(cauchy_vector(w, pole, [(a, b)], conjugate)[0])


def two_pole_transform(w: WeightFunction, kappa: complex, lam: complex) -> complex:
    """int g(z) / ((kappa - z)(lam - z*))."""
    kappa, lam = complex(kappa), complex(lam)
    if w.one_d or w.support == "unit-circle":
        if w.one_d:
            k_eff, l_eff = kappa - w.shift, lam - np.conj(w.shift)
        else:
            k_eff, l_eff = kappa, np.conj(1.0 / lam) if lam != 0 else np.inf
        if w.one_d and abs(k_eff - l_eff) > 1e-3:
            # partial fractions into two single-pole transforms
            c1 = cauchy_transform(w, kappa)
            c2 = cauchy_transform(w, lam, conjugate=True)
            return complex((c1 - c2) / (l_eff - k_eff))
        if w.one_d:
            if _pole_on_support(w, k_eff) or _pole_on_support(w, l_eff):
                raise PoleOnSupport("pole on the support")
            val, _ = _integrate_1d(w, lambda z, zc: (1.0 / ((kappa - z) * (lam - zc)))[None, :], (k_eff.real, l_eff.real))
            return complex(val[0])
        if abs(abs(kappa) - 1) < POLE_TOL or abs(abs(lam) - 1) < POLE_TOL:
            raise PoleOnSupport("pole on the unit circle")
        val, _ = _integrate_circle(w, lambda z, zc: (1.0 / ((kappa - z) * (lam - zc)))[None, :], (kappa, np.conj(lam)))
        return complex(val[0])
    # plane: partition of unity isolates the two singular points kappa and lam*
    c2 = np.conj(lam)
    if abs(kappa - c2) < POLE_TOL:
        raise PoleOnSupport("coinciding singular points make the integral divergent")

    # part1: -(z-lam*) / (D (kappa - z)) with kappa - z = -rho e  ->  (z - lam*) / (D rho e) * rho
    v1, _ = _integrate_polar(w, lambda z, zc, r, e: ((z - c2) * np.conj(e) / (np.abs(z - kappa) ** 2 + np.abs(z - c2) ** 2))[None, :], kappa, True)
    # part2: -(z* - kappa*) / (D (lam - z*)) with lam - z* = -rho e*  ->  (z* - kappa*) / (D rho e*) * rho
    v2, _ = _integrate_polar(w, lambda z, zc, r, e: ((zc - np.conj(kappa)) * e / (np.abs(z - kappa) ** 2 + np.abs(z - c2) ** 2))[None, :], c2, True)
    return complex(v1[0] + v2[0])


def _support_gap(w1: WeightFunction, w2: WeightFunction) -> float:
    """Lower bound on the distance between two 1-D/circle supports."""
    if w1.one_d and w2.one_d:
        dy = abs(w1.shift.imag - w2.shift.imag)
        a0, a1 = (np.array(w1.x_window()) + w1.shift.real)
        b0, b1 = (np.array(w2.x_window()) + w2.shift.real)
        dx = max(0.0, b0 - a1, a0 - b1)
        return float(math.hypot(dx, dy))
    return 0.0


def double_cauchy_matrix(g_weights: Sequence[WeightFunction], f_weights: Sequence[WeightFunction],
                         rtol: float = 1e-12) -> np.ndarray:
    """[int int g_a(z1) f_b(z2) / (z1 - z2)]_{a,b} by iterated quadrature.

    The inner integral is the Cauchy transform of f_b evaluated on the nodes
    of the outer rule; both rules are refined together until stable.
    """
    g_weights, f_weights = list(g_weights), list(f_weights)
    if not g_weights or not f_weights:
        return np.zeros((len(g_weights), len(f_weights)), dtype=complex)
    for g in g_weights:
        for f in f_weights:
            if not (g.one_d and f.one_d):
                raise UnsupportedEnsemble("double Cauchy integrals need 1-D supports")
            if _support_gap(g, f) < POLE_TOL:
                raise PoleOnSupport(f"supports of {g.label} and {f.label} overlap without offset")
    prev = None
    width = 2.0
    for level in range(10):
        out = np.zeros((len(g_weights), len(f_weights)), dtype=complex)
        rules_f = [rule_1d(f, width, 16) for f in f_weights]
        for a, g in enumerate(g_weights):
            z1, w1, _ = rule_1d(g, width, 16)
            for b, (z2, w2, _) in enumerate(rules_f):
                out[a, b] = w1 @ ((1.0 / (z1[:, None] - z2[None, :])) @ w2)
        if prev is not None and np.max(np.abs(out - prev)) <= rtol * max(1.0, np.max(np.abs(out))):
            return out
        prev = out
        width /= 2
    raise NonConvergentQuadrature("double Cauchy integral did not converge")


def double_cauchy(w1: WeightFunction, w2: WeightFunction) -> complex:
    return complex(double_cauchy_matrix([w1], [w2])[0, 0])


# ------------------------------------------------------- moment matrices

@dataclass(frozen=True)
class MomentMatrix:
    entries: np.ndarray
    kind: str
    condition_estimate: float

    @property
    def dim_rows(self) -> int:
        return self.entries.shape[0]

    @property
    def dim_cols(self) -> int:
        return self.entries.shape[1]

    def require_regular(self) -> np.ndarray:
        if self.condition_estimate >= SINGULAR_COND:
            raise SingularMomentMatrix(f"{self.kind} moment matrix has condition {self.condition_estimate:.3e}")
        return self.entries


def _wrap(entries: np.ndarray, kind: str) -> MomentMatrix:
    entries = np.asarray(entries, dtype=complex)
    if not np.all(np.isfinite(entries)):
        raise NonConvergentQuadrature(f"non-finite entries in {kind}")
    cond = condition_number(entries) if entries.shape[0] == entries.shape[1] else math.inf
    return MomentMatrix(entries, kind, cond)


def signed_power_moments(w: WeightFunction, count: int) -> np.ndarray:
    """[int w(E) (-E)^n dE]_{n=0..count-1}."""
    raw = moments(w, [(n + 1, 1) for n in range(count)])
    return raw * (-1.0) ** np.arange(count)


def ordered_pair_matrix(w: WeightFunction, funcs: Callable[[np.ndarray], np.ndarray],
                        x_breaks: Sequence[float] = (), rtol: float = 1e-10) -> tuple[np.ndarray, float]:
    """A[a, b] = int int_{E1<E2} w(E1) w(E2) [f_a(E1) f_b(E2) - f_b(E1) f_a(E2)].

    ``funcs(E)`` returns an (n, len(E)) array.  Real 1-D supports only.
    """
    if not w.real_support:
        raise UnsupportedEnsemble("ordered integrals need a real 1-D support")
    # work in the smoothing coordinate t; x(t) is increasing so the order is kept
    lo, hi, xf, jac, tf = _param_1d(w)
    x_breaks = [tf(b) for b in x_breaks]

    def values(t):
        x = xf(t)
        return funcs(x) * np.asarray(w.density(x) * jac(t), dtype=complex)[None, :]

    width = max((hi - lo) / 24.0, 1e-3)
    edges = panel_edges(lo, hi, x_breaks, width)
    s1 = ordered_pair_integral(values, edges, 20)
    s2 = ordered_pair_integral(values, panel_edges(lo, hi, x_breaks, width / 2), 24)
    err = float(np.max(np.abs(s1 - s2)))
    if err > rtol * max(1.0, float(np.max(np.abs(s2)))):
        s3 = ordered_pair_integral(values, panel_edges(lo, hi, x_breaks, width / 4), 32)
        err = float(np.max(np.abs(s3 - s2)))
        s2 = s3
        if err > 1e3 * rtol * max(1.0, float(np.max(np.abs(s2)))):
            raise NonConvergentQuadrature(f"ordered-pair integral error {err:.2e}")
    return s2 - s2.T, err


def build_moment_matrix(kind: str, weight: WeightFunction | None = None, dim: int | None = None, *,
                        g_weights: Sequence[WeightFunction] = (), f_weights: Sequence[WeightFunction] = (),
                        chi: int = 0) -> MomentMatrix:
    """Assemble one of the moment matrices.

    kind: "M" (g/f block matrix), "Mtilde" (bimoments), "M2", "M4", "M1".
    """
    if kind == "M":
        g_weights, f_weights = list(g_weights), list(f_weights)
        n1, n2 = len(g_weights), len(f_weights)
        if n2 < n1:
            raise InvalidParameter("M needs N2 >= N1")
        top = np.array([[moment(f, a, 1) for f in f_weights] for a in range(1, n2 - n1 + 1)], dtype=complex).reshape(n2 - n1, n2)
        bottom = double_cauchy_matrix(g_weights, f_weights).reshape(n1, n2)
        return _wrap(np.vstack([top, bottom]), "M")
    if weight is None or dim is None or dim < 0:
        raise InvalidParameter(f"{kind} needs a weight and a dimension")
    if kind == "Mtilde":
        pairs = [(a, b) for a in range(1, dim + 1) for b in range(1, dim + 1)]
        return _wrap(moments(weight, pairs).reshape(dim, dim), "Mtilde")
    if kind == "M2":
        mom = signed_power_moments(weight, max(2 * dim - 1, 0))
        a = np.arange(dim)
        return _wrap(mom[a[:, None] + a[None, :]].reshape(dim, dim), "M2")
    if kind == "M4":
        mom = signed_power_moments(weight, max(2 * dim - 2, 1))
        out = np.zeros((dim, dim), dtype=complex)
        for a in range(1, dim + 1):
            for b in range(1, dim + 1):
                if a != b:
                    out[a - 1, b - 1] = (b - a) * mom[a + b - 3]
        return _wrap(out, "M4")
    if kind == "M1":
        if chi not in (0, 1):
            raise InvalidParameter("chi must be 0 or 1")
        n = dim
        if (n - chi) % 2:
            raise InvalidParameter("M1 dimension must be 2Q + chi")
        powers = np.arange(n)
        a_mat, _ = ordered_pair_matrix(weight, lambda x: (-x[None, :]) ** powers[:, None])
        block = -a_mat
        if chi == 1:
            border = -signed_power_moments(weight, n)
            full = np.zeros((n + 1, n + 1), dtype=complex)
            full[:n, :n] = block
            full[:n, n] = border
            full[n, :n] = -border
            block = full
        return _wrap(block, "M1")
    raise InvalidParameter(f"unknown moment matrix kind {kind!r}")


# ------------------------------------------------------------- catalog

def _poly(coeffs):
    c = np.asarray(coeffs if coeffs is not None else [1.0], dtype=complex)
    return lambda x: np.polynomial.polynomial.polyval(x, c)


def polyexp(poly=None, exp=None):
    """P(x) = poly(x) exp(exp_poly(x)) with ascending coefficient lists."""
    p, e = _poly(poly), _poly(exp if exp is not None else [0.0])
    return lambda x: p(x) * np.exp(e(x))


def polyexp_weight(support: str, poly=None, exp=None, label: str = "polyexp", window=None, shift=0j) -> WeightFunction:
    return WeightFunction(support, polyexp(poly, exp), label, None, shift, window,
                          {"poly": poly, "exp": exp})


def _gaussian_moments(c: float):
    def m(a, b):
        n = a + b - 2
        return 0.0 if n % 2 else math.gamma((n + 1) / 2) / c ** ((n + 1) / 2)
    return m


def _laguerre_moments(nu: float, c: float):
    return lambda a, b: math.exp(special.gammaln(nu + a + b - 1) - (nu + a + b - 1) * math.log(c))


def _custom_p(params):
    return "poly" in params or "exp" in params


def _osborn_density(mu: float, nu: int):
    a = (1 + mu * mu) / (2 * mu * mu)
    b = (1 - mu * mu) / (2 * mu * mu)

    def raw(z):
        z = np.asarray(z, dtype=complex)
        r = np.abs(z)
        with np.errstate(all="ignore"):
            base = special.kv(nu, a * r) * r ** nu if nu > 0 else special.kv(0, a * r)
            small = 2.0 ** (nu - 1) * special.gamma(nu) * a ** (-nu) if nu > 0 else np.inf
            base = np.where(r == 0, small, base)
        return base * np.exp(b * z.real)
    return raw


def ensemble_weight(name: str, params: dict | None = None) -> WeightFunction:
    """Weight function of a cataloged ensemble.

    ``params`` may carry "poly"/"exp" coefficient lists replacing the
    default P of the ensemble.
    """
    params = dict(params or {})
    key = name.lower().replace("_", "-")
    c = float(params.get("c", 1.0))
    if c <= 0:
        raise InvalidParameter("c must be positive")
    custom = _custom_p(params)
    p_fun = polyexp(params.get("poly"), params.get("exp"))

    if key in ("gue", "gaussian", "hermitian"):
        if custom:
            return WeightFunction("real-line", p_fun, "hermitian", params=params)
        return WeightFunction("real-line", lambda x: np.exp(-c * np.asarray(x) ** 2), "GUE",
                              _gaussian_moments(c), params=params)
    if key in ("chiral", "laguerre", "lue"):
        if "nu" in params:
            nu = float(params["nu"])
        else:
            m_, n_ = int(params.get("M", params.get("N", 0))), int(params.get("N", 0))
            if m_ < n_:
                raise InvalidParameter("chiral ensemble needs M >= N")
            nu = float(m_ - n_)
        if nu <= -1:
            raise InvalidParameter("nu must exceed -1")
        if custom:
            return WeightFunction("positive-half-line", lambda x: p_fun(x) * np.asarray(x) ** nu, "chiral", params=params)
        return WeightFunction("positive-half-line", lambda x: np.asarray(x) ** nu * np.exp(-c * np.asarray(x)),
                              "chiral", _laguerre_moments(nu, c), params=params)
    if key in ("circular", "cue"):
        if custom:
            return WeightFunction("unit-circle", p_fun, "circular", params=params)
        return WeightFunction("unit-circle", lambda z: np.ones(np.shape(z)), "circular",
                              lambda a, b: 2 * math.pi if a == b else 0.0, params=params)
    if key in ("elliptic-ginibre", "ginibre"):
        tau = float(params.get("tau", 1.0))
        if tau <= 0:
            raise InvalidParameter("tau must be positive")
        dens = lambda z: np.exp(-(tau * np.real(z) ** 2 + np.imag(z) ** 2))
        return WeightFunction("complex-plane", dens, "elliptic-ginibre", params=params)
    if key == "osborn":
        mu = float(params.get("mu", 0.5))
        nu = int(params.get("nu", int(params.get("M", 0)) - int(params.get("N", 0))))
        if not 0 < mu <= 1 or nu < 0:
            raise InvalidParameter("osborn needs 0 < mu <= 1 and M >= N")
        raw = _osborn_density(mu, nu)
        base = WeightFunction("complex-plane", raw, "osborn")
        norm = moment(base, 1, 1).real
        return WeightFunction("complex-plane", lambda z: raw(z) / norm, "osborn", params=params)
    if key in ("antisymmetric", "anti-selfdual", "anti-self-dual"):
        chi = int(params.get("chi", 0))
        if key == "antisymmetric" and chi not in (0, 1):
            raise InvalidParameter("chi must be 0 or 1")
        power = chi - 0.5 if key == "antisymmetric" else 0.5
        if custom:
            return WeightFunction("positive-half-line", lambda x: p_fun(x) * np.asarray(x) ** power, key, params=params)
        return WeightFunction("positive-half-line", lambda x: np.asarray(x) ** power * np.exp(-c * np.asarray(x)), key,
                              _laguerre_moments(power, c), params=params)
    if key in ("so", "so-group"):
        chi = int(params.get("chi", 0))
        if chi not in (0, 1):
            raise InvalidParameter("chi must be 0 or 1")
        dens = lambda x: p_fun(x) / np.sqrt(1 - np.asarray(x) ** 2) * np.abs(1 - np.asarray(x)) ** chi
        return WeightFunction("interval", dens, "SO", params=params)
    if key in ("usp", "usp-group"):
        dens = lambda x: p_fun(x) * np.sqrt(1 - np.asarray(x) ** 2)
        return WeightFunction("interval", dens, "USp", params=params)
    if key == "polyexp":
        support = params.get("support", "real-line")
        return polyexp_weight(support, params.get("poly"), params.get("exp"))
    raise UnsupportedEnsemble(f"unknown ensemble {name!r}")
