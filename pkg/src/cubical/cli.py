"""Command-line driver: ``cubical <command> [options]``.

Every command writes ``results.csv`` and ``summary.json`` (inputs echoed
plus headline numbers) into the output directory, and ``figure.svg`` when
``--svg`` is given.  Exit status: 0 success, 2 bad input or violated
precondition, 3 a failed ``--check`` or an unattainable tolerance.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from . import families, flatnorm, jones, measure, svg, varifold
from .dyadic import (
    boundary_area,
    build_cover,
    cover_boundary,
    cover_volume,
    write_boundary_csv,
    write_cover_csv,
)
from .errors import PreconditionError, ToleranceError
from .shapes import (
    BallUnion,
    BoundaryOf,
    PointCloud,
    dump_shape,
    exact_measures,
    load_shape,
    read_point_cloud_csv,
    sample_boundary,
    shape_from_dict,
)

EXIT_OK, EXIT_PRECONDITION, EXIT_CHECK = 0, 2, 3
ENV_OUTPUT = "CUBICAL_OUTPUT_DIR"


# -- formatting ---------------------------------------------------------------

def fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return f"{float(x):.12g}"


def _clean(obj):
    """JSON-ready copy with floats rounded to 12 significant digits."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return float(f"{v:.12g}")
    return obj


def write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) if not isinstance(v, str) else v for v in r])


def write_summary(path, summary):
    with open(path, "w") as fh:
        json.dump(_clean(summary), fh, indent=2, sort_keys=True)
        fh.write("\n")


def parse_range(text: str):
    """``"4..12"`` or ``"4:12"`` or ``"7"`` -> (lo, hi) inclusive."""
    for sep in ("..", ":"):
        if sep in text:
            a, b = text.split(sep, 1)
            return int(a), int(b)
    v = int(text)
    return v, v


def parse_floats(text: str):
    return [float(v) for v in text.replace(";", ",").split(",") if v.strip()]


def read_shape(spec: str):
    """Shape from a JSON file, an inline JSON object, or a point-cloud CSV."""
    if spec is None:
        raise PreconditionError("--shape is required")
    s = spec.strip()
    if s.startswith("{"):
        try:
            return shape_from_dict(json.loads(s))
        except json.JSONDecodeError as exc:
            raise PreconditionError(f"inline shape JSON: {exc}") from exc
    if not os.path.exists(spec):
        raise PreconditionError(f"shape file not found: {spec}")
    if spec.lower().endswith(".csv"):
        return read_point_cloud_csv(spec)
    return load_shape(spec)


def read_region(args):
    if args.region:
        path = args.region
        if not os.path.exists(path):
            raise PreconditionError(f"region file not found: {path}")
        with open(path) as fh:
            text = fh.read()
        if text.lstrip().startswith("P1"):
            return flatnorm.BinaryRegion.from_pbm(text, depth=args.grid_depth)
        try:
            return flatnorm.BinaryRegion.from_json(json.loads(text))
        except json.JSONDecodeError as exc:
            raise PreconditionError(f"region JSON {path}: {exc}") from exc
    if args.grid_depth is None:
        raise PreconditionError("--grid-depth is required when the region comes from --shape")
    return flatnorm.BinaryRegion.from_shape(read_shape(args.shape), args.grid_depth)


# -- commands -------------------------------------------------------------------

def cmd_cover(args, out):
    shape = read_shape(args.shape)
    cover = build_cover(shape, args.depth)
    bd = cover_boundary(cover)
    with open(os.path.join(out, "results.csv"), "w", newline="") as fh:
        write_cover_csv(cover, fh)
    with open(os.path.join(out, "boundary.csv"), "w", newline="") as fh:
        write_boundary_csv(bd, fh)
    em = exact_measures(shape)
    summary = {"depth": args.depth, "cube_count": len(cover), "cover_volume": cover_volume(cover),
               "boundary_area": boundary_area(bd), "exact_volume": em.volume,
               "exact_boundary_measure": em.boundary_measure}
    if args.svg and cover.ndim == 2:
        _write(out, "figure.svg", svg.cover_svg(cover, bd))
    if args.check:
        if args.check != "mink-bound":
            raise PreconditionError(f"cover: unknown check '{args.check}' (expected mink-bound)")
        rep = measure.mink_cover_bound_check(shape, args.depth, args.delta)
        summary.update({"check": "mink-bound", "r_d": rep.r_d, "delta": rep.delta,
                        "delta_hat": rep.delta_hat, "bound": rep.bound,
                        "one_plus_delta_hat": 1 + rep.delta_hat,
                        "minkowski_estimate": rep.minkowski.value, "passed": rep.holds})
        return summary, rep.holds
    return summary, True


def cmd_boundary_ratio(args, out):
    shape = read_shape(args.shape)
    em = exact_measures(shape)
    if not em.boundary_measure:
        raise PreconditionError(f"boundary-ratio needs a known boundary measure for {shape.kind}")
    lo, hi = parse_range(args.depths)
    rows = []
    for d in range(lo, hi + 1):
        bd = cover_boundary(build_cover(shape, d))
        a = boundary_area(bd)
        rows.append((d, len(bd), a, em.boundary_measure, a / em.boundary_measure))
    write_rows(os.path.join(out, "results.csv"), ["d", "faces", "boundary_area", "exact", "ratio"], rows)
    n = shape.ndim
    ok = all(r[4] <= n for r in rows)
    summary = {"depths": [lo, hi], "ratios": {str(r[0]): r[4] for r in rows},
               "last_ratio": rows[-1][4], "ambient_dim": n,
               "note": "empirical comparison with the conjectured limsup <= n; not a proof"}
    if args.check:
        summary.update({"check": "ratio<=n", "passed": ok})
        return summary, ok
    return summary, True


def cmd_density(args, out):
    shape = read_shape(args.shape)
    if not isinstance(shape, BallUnion):
        raise PreconditionError(f"density needs a ball_union shape, got {shape.kind}")
    rep = measure.density_theta(shape, args.depth, refine=args.refine)
    rows = [(i, int(c), rep.per_tiling_bound) for i, c in enumerate(rep.per_tiling_counts)]
    write_rows(os.path.join(out, "results.csv"), ["tiling", "count", "N_i"], rows)
    summary = {"depth": args.depth, "theta": rep.theta, "theta_upper": rep.theta_upper,
               "cover_count": rep.cover_count, "sum_N_i": rep.bound,
               "cover_volume": rep.cover_volume, "volume": rep.volume,
               "volume_over_theta": rep.volume / rep.theta,
               "chain_holds": rep.chain_holds, "volume_bound_holds": rep.volume_bound_holds}
    if args.check:
        summary.update({"check": "density-chain", "passed": rep.holds})
        return summary, rep.holds
    return summary, True


def cmd_minkowski(args, out):
    shape = read_shape(args.shape)
    radii = parse_floats(args.radii)
    if any(r <= 0 for r in radii):
        raise PreconditionError("radii must be positive")
    est = measure.minkowski_content_estimate(shape, radii, rtol=args.rtol, max_depth=args.max_depth)
    rows = [(e.r, e.value, e.half_width, e.lower, e.upper, e.tube.depth) for e in est]
    write_rows(os.path.join(out, "results.csv"), ["r", "estimate", "half_width", "lower", "upper", "depth"], rows)
    exact = exact_measures(shape).boundary_measure if isinstance(shape, BoundaryOf) else None
    summary = {"radii": radii, "estimates": [e.value for e in est],
               "half_widths": [e.half_width for e in est], "exact_limit": exact}
    ok = True
    if args.check and exact:
        # the tube of a smooth curve has exactly the limit as L^n(W_r)/2r for circles
        ok = all(abs(e.value - exact) <= args.check_tol * exact for e in est)
        summary.update({"check": f"within {args.check_tol:g} of exact", "passed": ok})
    return summary, ok


def _samples_for(args, shape):
    if isinstance(shape, PointCloud):
        return shape
    return sample_boundary(shape, args.spacing)


def cmd_reach(args, out):
    shape = read_shape(args.shape)
    pc = _samples_for(args, shape)
    r = measure.reach_estimate(pc)
    rows = [(args.spacing, len(pc), r)]
    write_rows(os.path.join(out, "results.csv"), ["spacing", "samples", "reach_estimate"], rows)
    exact = exact_measures(shape).reach_true if not isinstance(shape, PointCloud) else None
    summary = {"spacing": args.spacing, "samples": len(pc), "reach_estimate": r, "reach_true": exact,
               "curvature_bound": measure.CurvatureBound.from_reach(r).kappa_hat}
    ok = True
    if args.check and exact is not None and math.isfinite(exact):
        ok = r >= exact * (1 - args.check_tol) and r <= exact * (1 + args.check_tol)
        summary.update({"check": f"within {args.check_tol:g} of exact", "passed": ok})
    return summary, ok


def cmd_beta(args, out):
    shape = read_shape(args.shape)
    lo, hi = parse_range(args.depths)
    spacing = args.spacing if args.spacing else math.ldexp(1.0, -(hi + 2))
    pc = shape if isinstance(shape, PointCloud) else sample_boundary(shape, spacing)
    rep = jones.beta_squared_sum(pc, lo, hi, tripled=not args.no_triple)
    rep.write_csv(os.path.join(out, "results.csv"))
    summary = rep.summary()
    summary["subtotal_ratios"] = rep.subtotal_ratios()
    ok = not rep.warnings
    if args.check:
        summary.update({"check": "spacing", "passed": ok})
        return summary, ok
    return summary, True


def cmd_lift(args, out):
    shape = read_shape(args.shape)
    lift = varifold.lift_curve(shape, args.spacing)
    lift.write_csv(os.path.join(out, "results.csv"))
    summary = {"spacing": args.spacing, "samples": len(lift), "length": lift.length,
               "theta_runs": len(varifold.monotone_theta_runs(lift, closed=_closed(shape)))}
    ok = True
    if args.depth is not None:
        q = varifold.quantize_lift(lift, args.depth, theta_scale=args.theta_scale)
        q.write_csv(os.path.join(out, "quantized.csv"))
        dev = varifold.quantization_deviation(lift, q)
        bound = math.sqrt(3) * math.ldexp(1.0, -(args.depth + 1))
        summary.update({"depth": args.depth, "cells": len(q.cells), "total_weight": q.total_weight,
                        "max_deviation": float(dev.max()) if len(dev) else 0.0,
                        "half_diagonal": bound, "theta_scale": args.theta_scale})
        if args.check and args.theta_scale == "unit":
            ok = bool(len(dev) == 0 or dev.max() <= bound)
            summary.update({"check": "quantization accuracy", "passed": ok})
    if args.svg:
        _write(out, "figure.svg", svg.lift_svg(lift))
    return summary, ok


def _closed(shape):
    base = shape.base if isinstance(shape, BoundaryOf) else shape
    return base.kind in ("disk", "polygon")


def cmd_flatnorm(args, out):
    region = read_region(args)
    dec = flatnorm.flat_norm_decompose(region, args.lam)
    signs = dec.S_sign
    rows = [(int(c[0]), int(c[1]), int(signs[tuple(c - dec.offset)])) for c in dec.cells_of_S]
    write_rows(os.path.join(out, "results.csv"), ["ix", "iy", "sign"], rows)
    _write(out, "decomposition.json", json.dumps(_clean(dec.to_json()), indent=2) + "\n")
    summary = {k: v for k, v in dec.to_json().items() if k != "cells_of_S"}
    summary.update({"boundary_mass": region.boundary_mass, "S_cells": int(dec.S.sum()),
                    "region_cells": len(region)})
    if args.svg:
        _write(out, "figure.svg", svg.flatnorm_svg(dec))
    ok = dec.value <= region.boundary_mass + 1e-12
    if args.check:
        summary.update({"check": "value <= mass(T)", "passed": ok})
        return summary, ok
    return summary, True


def cmd_beta_flat(args, out):
    region = read_region(args)
    lo, hi = parse_range(args.depths)
    rep = flatnorm.beta_flat_sum(region, args.k, (lo, hi), tripled=not args.no_triple)
    write_rows(os.path.join(out, "results.csv"), ["d", "m1", "m2", "beta_F"], rep.rows)
    summary = rep.summary()
    summary["subtotal_ratios"] = rep.subtotal_ratios()
    return summary, True


def cmd_generate(args, out):
    params = {}
    for item in args.param or []:
        if "=" not in item:
            raise PreconditionError(f"--param expects key=value, got '{item}'")
        k, v = item.split("=", 1)
        params[k] = json.loads(v) if v[:1] in "[{" or v in ("true", "false") else _num(v)
    shape = families.generate_shape(args.family, seed=args.seed, **params)
    path = args.output or os.path.join(out, "shape.json")
    dump_shape(shape, path)
    summary = {"family": args.family, "params": params, "kind": shape.kind, "path": path}
    rows = [("kind", shape.kind)]
    if args.family == "koch" and hasattr(shape, "segments"):
        summary["segments"] = len(shape.segments)
    if args.family == "eps-rational-balls":
        vol_bound = float(np.sum(math.pi * shape.radii**2))
        d = families.deepest_full_cover(shape, max_depth=args.max_depth)
        summary.update({"volume_upper_bound": vol_bound, "deepest_full_cover_depth": d,
                        "cover_volume_at_depth": cover_volume(build_cover(shape, d)) if d >= 0 else None})
        rows.append(("deepest_full_cover_depth", str(d)))
    write_rows(os.path.join(out, "results.csv"), ["key", "value"], rows)
    return summary, True


def _num(v):
    try:
        return int(v)
    except ValueError:
        try:
            return float(v)
        except ValueError:
            return v


def _write(out, name, text):
    with open(os.path.join(out, name), "w") as fh:
        fh.write(text)


# -- argument parsing -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cubical", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, shape=True):
        if shape:
            sp.add_argument("--shape", help="shape JSON file, inline JSON object, or x,y[,theta] CSV")
        sp.add_argument("--out", default=None, help=f"output directory (default ${ENV_OUTPUT} or .)")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--svg", action="store_true", help="also write figure.svg")
        return sp

    sp = common(sub.add_parser("cover", help="depth-d cubical cover"))
    sp.add_argument("--depth", type=int, required=True)
    sp.add_argument("--check", nargs="?", const="mink-bound", default=None)
    sp.add_argument("--delta", type=float, default=0.0)
    sp.set_defaults(func=cmd_cover)

    sp = common(sub.add_parser("boundary-ratio", help="cover boundary length over exact boundary"))
    sp.add_argument("--depths", required=True)
    sp.add_argument("--check", action="store_true")
    sp.set_defaults(func=cmd_boundary_ratio)

    sp = common(sub.add_parser("density", help="3C densities and counting chain for a ball union"))
    sp.add_argument("--depth", type=int, required=True)
    sp.add_argument("--refine", type=int, default=2)
    sp.add_argument("--check", action="store_true")
    sp.set_defaults(func=cmd_density)

    sp = common(sub.add_parser("minkowski", help="tube-volume Minkowski content estimates"))
    sp.add_argument("--radii", required=True, help="comma-separated decreasing radii")
    sp.add_argument("--rtol", type=float, default=2e-3)
    sp.add_argument("--max-depth", type=int, default=18)
    sp.add_argument("--check", action="store_true")
    sp.add_argument("--check-tol", type=float, default=0.01)
    sp.set_defaults(func=cmd_minkowski)

    sp = common(sub.add_parser("reach", help="point-cloud reach estimate"))
    sp.add_argument("--spacing", type=float, default=0.01)
    sp.add_argument("--check", action="store_true")
    sp.add_argument("--check-tol", type=float, default=0.01)
    sp.set_defaults(func=cmd_reach)

    sp = common(sub.add_parser("beta", help="Jones beta^2 sum"))
    sp.add_argument("--depths", required=True)
    sp.add_argument("--spacing", type=float, default=None)
    sp.add_argument("--no-triple", action="store_true", help="use C instead of 3C")
    sp.add_argument("--check", action="store_true")
    sp.set_defaults(func=cmd_beta)

    sp = common(sub.add_parser("lift", help="Grassmann-bundle lift and quantization"))
    sp.add_argument("--spacing", type=float, required=True)
    sp.add_argument("--depth", type=int, default=None)
    sp.add_argument("--theta-scale", choices=["unit", "radians"], default="unit")
    sp.add_argument("--check", action="store_true")
    sp.set_defaults(func=cmd_lift)

    for name, func, helptext in (("flatnorm", cmd_flatnorm, "flat norm decomposition"),
                                 ("beta-flat", cmd_beta_flat, "flat-norm beta sum")):
        sp = common(sub.add_parser(name, help=helptext))
        sp.add_argument("--region", help="PBM (P1) bitmap or JSON cell list")
        sp.add_argument("--grid-depth", type=int, default=None)
        if name == "flatnorm":
            sp.add_argument("--lambda", dest="lam", type=float, required=True)
            sp.add_argument("--check", action="store_true")
        else:
            sp.add_argument("--k", type=int, default=1, choices=[1, 2, 3])
            sp.add_argument("--depths", required=True)
            sp.add_argument("--no-triple", action="store_true")
        sp.set_defaults(func=func)

    sp = common(sub.add_parser("generate-shape", help="write a shape JSON from a named family"), shape=False)
    sp.add_argument("family", choices=families.FAMILIES)
    sp.add_argument("--param", action="append", help="key=value (repeatable)")
    sp.add_argument("--output", default=None, help="shape JSON path (default OUT/shape.json)")
    sp.add_argument("--max-depth", type=int, default=12)
    sp.set_defaults(func=cmd_generate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = args.out or os.environ.get(ENV_OUTPUT) or "."
    try:
        os.makedirs(out, exist_ok=True)
        summary, ok = args.func(args, out)
    except ToleranceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except (PreconditionError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    summary = {"command": args.command,
               "inputs": {k: v for k, v in vars(args).items() if k not in ("func", "command")},
               **summary}
    write_summary(os.path.join(out, "summary.json"), summary)
    if not ok:
        print("check failed", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
