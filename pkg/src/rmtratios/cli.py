"""Command-line front end: identity suites, ratio averages, k-point grids and
integration-theorem checks.

Exit codes: 0 success, 1 identity/theorem failure, 2 invalid arguments or
spec, 3 oracle disagreement, 4 degenerate external field, 5 numerical
failure (non-convergent quadrature, singular moment matrix, ...).
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import trapezoid

from . import __version__
from .berezinians import IDENTITY_FAMILIES, SpectralParameters, random_spectral_parameters
from .errors import (CoincidentPoints, DegenerateField, DimensionMismatch, DimensionTooLarge, InvalidParameter,
                     KExceedsN, RMTError, UnsupportedEnsemble)
from .external_field import ExternalFieldSpec, IntermediateSpec, rk_correlation, rk_intermediate
from .io import dumps_json, parse_complex, write_csv, write_json
from .oracles import McConfig, direct_vdm2, direct_quadrature_z, mc_matrix_average, random_andreief, random_debruijn
from .sqrtber_averages import SqrtBerSpec, z_average
from .vdm2_averages import Vdm2Spec, hermitian_ratio_average, z_tilde_auto
from .weights_moments import WeightFunction, ensemble_weight

EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_DISAGREE, EXIT_DEGENERATE, EXIT_NUMERIC = 0, 1, 2, 3, 4, 5
MAX_ORDER = 8


class SpecError(Exception):
    """Malformed spec file or argument combination (exit 2)."""


@dataclass
class RunManifest:
    command: str
    spec: str | None
    out: str | None
    seed: int | None
    tolerances: dict
    argv: list = field(default_factory=list)
    version: str = __version__
    timestamp: str = field(default_factory=lambda: time.strftime("%Y-%m-%dT%H:%M:%S%z"))

    @classmethod
    def from_args(cls, args, tolerances: dict) -> "RunManifest":
        resolve = lambda p: str(Path(p).resolve()) if p else None
        return cls(args.command, resolve(getattr(args, "spec", None)), resolve(getattr(args, "out", None)),
                   getattr(args, "seed", None), tolerances, list(getattr(args, "argv", [])))


def _emit(args, report: dict) -> None:
    if getattr(args, "out", None):
        write_json(args.out, report)
    else:
        sys.stdout.write(dumps_json(report))


# ----------------------------------------------------------------- identity

def cmd_identity(args) -> int:
    if args.trials < 1:
        raise SpecError("--trials must be at least 1")
    if not (0 <= args.p <= MAX_ORDER and 0 <= args.q <= MAX_ORDER):
        raise SpecError(f"p and q must lie in 0..{MAX_ORDER}")
    product, det = IDENTITY_FAMILIES[args.family]
    q = 0 if args.family == "vandermonde" else args.q
    rng = np.random.default_rng(args.seed)
    worst, failures = 0.0, 0
    for _ in range(args.trials):
        sp = random_spectral_parameters(rng, args.p, q, args.min_sep)
        a, b = product(sp), det(sp)
        rel = abs(a - b) / max(abs(a), 1e-300)
        worst = max(worst, rel)
        failures += rel > args.tol
    report = {"family": args.family, "p": args.p, "q": q, "trials": args.trials, "max_rel_dev": worst,
              "failures": failures, "pass": failures == 0,
              "manifest": asdict(RunManifest.from_args(args, {"tol": args.tol, "min_sep": args.min_sep}))}
    _emit(args, report)
    return EXIT_OK if failures == 0 else EXIT_FAIL


# ------------------------------------------------------------------ average

def _load_json(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecError(f"cannot read spec {path}: {exc}") from None
    if not isinstance(data, dict):
        raise SpecError("spec must be a JSON object")
    return data


def _points(data: dict, key: str) -> list[complex]:
    try:
        return [parse_complex(v) for v in data.get(key, [])]
    except (TypeError, ValueError) as exc:
        raise SpecError(f"bad complex value in {key!r}: {exc}") from None


def _weight(desc) -> WeightFunction:
    if isinstance(desc, str):
        desc = {"ensemble": desc}
    if not isinstance(desc, dict) or "ensemble" not in desc:
        raise SpecError("a weight needs an 'ensemble' entry")
    w = ensemble_weight(desc["ensemble"], desc.get("params"))
    shift = parse_complex(desc.get("shift", 0))
    if shift:
        w = WeightFunction(w.support, w.density, w.label, None, shift, w.window, w.params, {})
    power = int(desc.get("power", 0))
    return w.times_monomial(power) if power else w


@dataclass
class AverageJob:
    family: str
    det: callable
    quad: callable | None
    mc: callable | None
    normalization: callable | None = None


def _average_job(data: dict, args) -> AverageJob:
    family = data.get("family", "hermitian")
    k1, k2 = _points(data, "kappa1"), _points(data, "kappa2")
    SpectralParameters(k1, k2).check()
    if family == "hermitian":
        n = int(data["N"])
        w = _weight({"ensemble": data.get("ensemble", "GUE"), "params": data.get("params")})
        split = tuple(data["split"]) if data.get("split") is not None else None
        route = data.get("route", "vdm2")
        sign = (-1) ** ((len(k1) + len(k2)) * n)

        def det():
            z0 = hermitian_ratio_average(w, n, [], [])
            res = hermitian_ratio_average(w, n, k1, k2, split=split, route=route)
            return res.value / z0.value, res.error_estimate / abs(z0.value), res.method

        def quad():
            z = direct_vdm2(Vdm2Spec(n, w, SpectralParameters(k1, k2), SpectralParameters()))
            z0 = direct_vdm2(Vdm2Spec(n, w, SpectralParameters(), SpectralParameters()))
            return sign * z.value / z0.value, (z.error + abs(z.value / z0.value) * z0.error) / abs(z0.value), z.method

        def mc():
            cfg = McConfig(samples=args.samples, seed=args.seed, shards=args.shards)
            res = mc_matrix_average(data.get("ensemble", "GUE"), n, k1, k2, cfg, data.get("params"))
            return res.value, res.error, res.method

        def norm():
            return z_tilde_auto(Vdm2Spec(n, w, SpectralParameters(), SpectralParameters())).value

        return AverageJob(family, det, quad, mc, norm)
    if family == "vdm2":
        n = int(data["N"])
        w = _weight({"ensemble": data.get("ensemble", "GUE"), "params": data.get("params")})
        l1, l2 = _points(data, "lambda1"), _points(data, "lambda2")
        SpectralParameters(l1, l2).check()
        spec = Vdm2Spec(n, w, SpectralParameters(k1, k2), SpectralParameters(l1, l2))

        def det():
            res = z_tilde_auto(spec)
            return res.value, res.error_estimate, res.method

        def quad():
            res = direct_vdm2(spec)
            return res.value, res.error, res.method
        return AverageJob(family, det, quad, None)
    if family == "sqrtber":
        g = [_weight(d) for d in data.get("g", [])]
        f = [_weight(d) for d in data.get("f", [])]
        spec = SqrtBerSpec.build(g, f, k1, k2)

        def det():
            res = z_average(spec)
            return res.value, res.error_estimate, res.method

        def quad():
            res = direct_quadrature_z(spec)
            return res.value, res.error, res.method
        return AverageJob(family, det, quad, None)
    raise SpecError(f"unknown family {family!r}")


def cmd_average(args) -> int:
    data = _load_json(args.spec)
    try:
        job = _average_job(data, args)
    except RMTError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError(f"invalid average spec: {exc}") from None
    runners = {"det": job.det, "oracle-quad": job.quad, "oracle-mc": job.mc}
    report: dict = {"family": job.family, "method": args.method}
    status = EXIT_OK
    if args.method == "compare":
        value, err, tag = job.det()
        oracle_name = "oracle-quad"
        try:
            ov, oe, otag = job.quad()
        except DimensionTooLarge:
            if job.mc is None:
                raise
            oracle_name = "oracle-mc"
            ov, oe, otag = job.mc()
        rel = abs(value - ov) / max(abs(ov), 1e-300)
        # a Monte Carlo oracle is judged by its standard error (3 sigma)
        ok = rel <= args.tol if oracle_name == "oracle-quad" else abs(value - ov) <= 3 * oe
        report.update({"oracle": oracle_name, "oracle_method": otag, "oracle_re": ov.real, "oracle_im": ov.imag,
                       "oracle_error": oe, "rel_dev": rel, "pass": bool(ok)})
        status = EXIT_OK if ok else EXIT_DISAGREE
    else:
        runner = runners[args.method]
        if runner is None:
            raise SpecError(f"method {args.method} is not available for family {job.family!r}")
        value, err, tag = runner()
    report.update({"value_re": value.real, "value_im": value.imag, "error_est": err, "method_detail": tag})
    if job.normalization is not None and args.method in ("det", "compare"):
        report["normalization"] = job.normalization()
        if not data.get("kappa1") and not data.get("kappa2") and args.out:
            print(f"normalization {report['normalization'].real:.17g}")
    report["manifest"] = asdict(RunManifest.from_args(args, {"tol": args.tol}))
    _emit(args, report)
    return status


# ------------------------------------------------------------------- kpoint

def _grid_axes(args, k: int) -> list[np.ndarray]:
    grids = args.grid or [[0.0, 1.0, 50]]
    if len(grids) == 1 and k > 1:
        grids = grids * k
    if len(grids) != k:
        raise SpecError(f"need one --grid per coordinate (k={k}), got {len(grids)}")
    axes = []
    for lo, hi, steps in grids:
        steps = int(steps)
        if steps < 1 or not hi >= lo:
            raise SpecError("grid needs min <= max and steps >= 1")
        axes.append(np.linspace(float(lo), float(hi), steps))
    return axes


def _kpoint_evaluator(data: dict):
    base = ExternalFieldSpec.from_dict(data)
    h0 = data.get("h0")
    if not h0:
        base.check_field()
        return base.N, lambda pts: rk_correlation(base, pts)
    w = _weight(h0.get("weight", {"ensemble": "GUE"}))
    spec = IntermediateSpec(base.N, base.alpha, base.ensemble, w, h0.get("kind", "unitary"))
    return base.N, lambda pts: rk_intermediate(spec, pts)


def cmd_kpoint(args) -> int:
    data = _load_json(args.spec)
    try:
        n, evaluate = _kpoint_evaluator(data)
    except RMTError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError(f"invalid field spec: {exc}") from None
    k = args.k if args.k is not None else len(args.grid or [[0]])
    if k < 1:
        raise SpecError("k must be at least 1")
    if k > n:
        raise KExceedsN(f"k={k} exceeds N={n}")
    axes = _grid_axes(args, k)
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    vals = np.array([complex(evaluate(p).value) for p in pts])
    rows = np.column_stack([pts, vals.real, vals.imag])
    out = Path(args.out or "kpoint.csv")
    write_csv(out, [f"x{j + 1}" for j in range(k)] + ["re", "im"], rows)
    figure = None
    if not args.no_figure:
        from .plotting import plot_grid

        title = f"R_{k}, N={n}, alpha={data.get('alpha', 0.0)}"
        fig_path = Path(args.figure) if args.figure else out.with_suffix(".png")
        saved = plot_grid(axes, vals.reshape(mesh[0].shape), fig_path, title)
        figure = str(saved) if saved else None
    manifest = asdict(RunManifest.from_args(args, {}))
    summary = {"k": k, "N": n, "rows": int(rows.shape[0]), "csv": str(out.resolve()), "figure": figure,
               "manifest": manifest}
    if k == 1 and axes[0].size > 1:
        summary["trapezoid_integral"] = float(trapezoid(vals.real, axes[0]))
    write_json(out.with_name(out.stem + ".manifest.json"), summary)
    return EXIT_OK


# ----------------------------------------------------------------- theorems

def cmd_theorems(args) -> int:
    if args.draws < 1:
        raise SpecError("--draws must be at least 1")
    n = args.n if args.n is not None else (3 if args.which == "andreief" else 2)
    if args.which == "andreief" and not (0 <= n <= 3 and 0 <= args.k <= 2 and 0 <= args.l <= 2):
        raise SpecError("andreief needs N <= 3 and k, l <= 2")
    if args.which == "debruijn" and not (0 <= n <= 2 and 0 <= args.l <= 2):
        raise SpecError("debruijn needs N <= 2 and l <= 2")
    seq = np.random.SeedSequence(args.seed)
    draws = []
    for j, child in enumerate(seq.spawn(args.draws)):
        rng = np.random.default_rng(child)
        if args.which == "andreief":
            rep = random_andreief(rng, n, args.k, args.l, args.tol, seed=[args.seed, j])
        else:
            rep = random_debruijn(rng, n, args.l, args.tol, seed=[args.seed, j])
        draws.append(rep)
    ok = all(d["pass"] for d in draws)
    report = {"which": args.which, "N": n, "k": args.k if args.which == "andreief" else None, "l": args.l,
              "draws": args.draws, "max_rel_dev": max(d["rel_dev"] for d in draws), "pass": ok,
              "reports": draws, "manifest": asdict(RunManifest.from_args(args, {"tol": args.tol}))}
    _emit(args, report)
    return EXIT_OK if ok else EXIT_FAIL


# ------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rmtratios", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("identity", help="product form vs determinant form on random points")
    p.add_argument("--family", choices=sorted(IDENTITY_FAMILIES), required=True)
    p.add_argument("--p", type=int, default=2)
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--min-sep", type=float, default=0.5)
    p.add_argument("--out")
    p.set_defaults(func=cmd_identity)

    p = sub.add_parser("average", help="characteristic-polynomial ratio averages")
    p.add_argument("--spec", required=True)
    p.add_argument("--method", choices=["det", "oracle-quad", "oracle-mc", "compare"], default="det")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--shards", type=int, default=8)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--out")
    p.set_defaults(func=cmd_average)

    p = sub.add_parser("kpoint", help="k-point correlation grid (CSV + figure)")
    p.add_argument("--spec", required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--grid", nargs=3, type=float, action="append", metavar=("MIN", "MAX", "STEPS"))
    p.add_argument("--out")
    p.add_argument("--figure", help="figure path (default: CSV path with .png)")
    p.add_argument("--no-figure", action="store_true")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_kpoint)

    p = sub.add_parser("theorems", help="numeric checks of the extended Andreief / de Bruijn theorems")
    p.add_argument("--which", choices=["andreief", "debruijn"], required=True)
    p.add_argument("--draws", type=int, default=50)
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--l", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-7)
    p.add_argument("--out")
    p.set_defaults(func=cmd_theorems)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_INVALID
    args.argv = argv
    try:
        return args.func(args)
    except (SpecError, InvalidParameter, CoincidentPoints, DimensionMismatch, UnsupportedEnsemble,
            KExceedsN) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except DegenerateField as exc:
        print(f"error: DegenerateField: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except RMTError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
