"""Quadrature building blocks: adaptive vector integration, composite
Gauss-Legendre panels, ordered-pair rules and tensor grids."""
from __future__ import annotations

from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad_vec

from .errors import NonConvergentQuadrature


@lru_cache(maxsize=64)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_edges(lo: float, hi: float, breakpoints: Sequence[float] = (), max_width: float = np.inf) -> np.ndarray:
    """Sorted panel edges covering [lo, hi], split at breakpoints and capped in width."""
    pts = [lo, hi] + [float(b) for b in breakpoints if lo < b < hi]
    pts = np.unique(np.asarray(pts, dtype=float))
    edges = [pts[0]]
    for a, b in zip(pts[:-1], pts[1:]):
        m = max(1, int(np.ceil((b - a) / max_width))) if np.isfinite(max_width) else 1
        edges.extend(np.linspace(a, b, m + 1)[1:])
    return np.asarray(edges)


def composite_rule(edges: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of order-point Gauss-Legendre on every panel."""
    x, w = gauss_legendre(order)
    edges = np.asarray(edges, dtype=float)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def quad_vector(f: Callable[[float], np.ndarray], a: float, b: float, points: Sequence[float] = (),
                epsabs: float = 1e-13, epsrel: float = 1e-11, limit: int = 4000) -> tuple[np.ndarray, float]:
    """Adaptive Gauss-Kronrod integration of a complex vector-valued integrand."""
    pts = sorted({float(p) for p in points if a < p < b})
    res, err, info = quad_vec(f, a, b, epsabs=epsabs, epsrel=epsrel, limit=limit,
                              points=pts or None, full_output=True)
    if info.status == 1 or not np.all(np.isfinite(res)):
        raise NonConvergentQuadrature(f"adaptive quadrature on [{a:g}, {b:g}] did not converge (err={err:.2e})")
    return np.atleast_1d(np.asarray(res, dtype=complex)), float(err)


def ordered_pair_integral(values: Callable[[np.ndarray], np.ndarray], edges: np.ndarray, order: int) -> np.ndarray:
    """S[a, b] = int int_{x1 < x2} v_a(x1) v_b(x2) dx1 dx2.

    ``values(x)`` returns an (n, len(x)) array that already contains the
    weight.  Panels are combined pairwise through cumulative sums; the
    triangle inside each panel uses a collapsed (Duffy) product rule, so the
    integrand may have kinks on panel edges only.
    """
    gx, gw = gauss_legendre(order)
    u = 0.5 * (gx + 1.0)
    wu = 0.5 * gw
    edges = np.asarray(edges, dtype=float)
    total = None
    running = None
    for lo, hi in zip(edges[:-1], edges[1:]):
        h = hi - lo
        x = lo + h * u
        vx = values(x) * (h * wu)[None, :]
        panel = vx.sum(axis=1)
        # triangle x1 < x2 inside the panel: x2 = lo + h s, x1 = lo + h s t
        s, t = np.meshgrid(u, u, indexing="ij")
        ws = np.outer(wu, wu) * (h * h) * s
        x2 = (lo + h * s).ravel()
        x1 = (lo + h * s * t).ravel()
        tri = (values(x1) * ws.ravel()[None, :]) @ values(x2).T
        if total is None:
            n = panel.size
            total = np.zeros((n, n), dtype=complex)
            running = np.zeros(n, dtype=complex)
        total += np.outer(running, panel) + tri
        running = running + panel
    return total


def periodic_trapezoid(f: Callable[[np.ndarray], np.ndarray], m: int) -> np.ndarray:
    """Trapezoid rule on [0, 2 pi) for an (n, m)-valued vectorized integrand."""
    phi = 2.0 * np.pi * np.arange(m) / m
    return f(phi).sum(axis=-1) * (2.0 * np.pi / m)


def tensor_integrate(integrand: Callable[[list[np.ndarray]], np.ndarray], rules: list[tuple[np.ndarray, np.ndarray]],
                     chunk: int = 400_000) -> complex:
    """Sum of integrand over the tensor product of 1-D rules (nodes, weights).

    ``integrand`` receives one flat array per dimension and returns the
    integrand values (weights of the measure are applied here).
    """
    dims = len(rules)
    if dims == 0:
        return complex(integrand([]))
    sizes = [len(r[0]) for r in rules]
    total_pts = int(np.prod(sizes))
    acc = []
    # split along the first axis so each chunk is a full sub-grid
    stride = max(1, chunk // max(1, total_pts // sizes[0]))
    for start in range(0, sizes[0], stride):
        sub = [(rules[0][0][start:start + stride], rules[0][1][start:start + stride])] + list(rules[1:])
        grids = np.meshgrid(*[r[0] for r in sub], indexing="ij")
        wts = np.meshgrid(*[r[1] for r in sub], indexing="ij")
        w = np.ones(grids[0].shape, dtype=complex)
        for wi in wts:
            w = w * wi
        vals = integrand([g.ravel() for g in grids])
        acc.append(np.sum(vals * w.ravel()))
    return complex(np.sum(acc))


def graded_edges(lo: float, hi: float, singular: Sequence[complex] = (), max_width: float = 1.0,
                 min_width: float = 1e-9, ratio: float = 0.5) -> np.ndarray:
    """Panel edges whose width near a complex singularity s is ratio * |x - s|.

    Gauss-Legendre on such panels converges geometrically at a rate that does
    not depend on how close the singularities are to the interval.
    """
    sing = np.asarray(list(singular), dtype=complex)
    breaks = sorted({float(s.real) for s in sing if lo < s.real < hi})
    pts = [lo] + breaks + [hi]
    edges = [lo]
    for a, b in zip(pts[:-1], pts[1:]):
        # march from both ends towards the middle so grading is symmetric
        left, right = [a], [b]
        while left[-1] < right[-1]:
            gap = right[-1] - left[-1]
            dl = min(max_width, max(min_width, ratio * float(np.min(np.abs(left[-1] - sing))) if sing.size else max_width))
            dr = min(max_width, max(min_width, ratio * float(np.min(np.abs(right[-1] - sing))) if sing.size else max_width))
            if dl + dr >= gap:
                break
            if dl <= dr:
                left.append(left[-1] + dl)
            else:
                right.append(right[-1] - dr)
        edges.extend(left[1:] + right[::-1])
    return np.asarray(edges)
