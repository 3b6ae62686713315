"""Command-line interface: ``skelscore <command> ...``.

Exit status is 0 when a command completes, including evaluations with
invalid elements or failed metrics (both are recorded in the report), 1 on
I/O, parse or configuration errors, and 2 on usage errors.
"""

import argparse
import json
import logging
import os
import sys
import warnings

import numpy as np

from . import __version__
from .boundedness import sphere_coverage
from .config import RunConfig
from .degrade import degrade_downsample, degrade_noise
from .evaluation import METRICS, evaluate
from .geometry import SkeletalPointSet, normalize_to_diagonal
from .io import (
    FormatError,
    export_barcode_csv,
    export_barcode_svg,
    export_colored_ply,
    export_cross_sections,
    export_report,
    export_sphere_coverage,
    load_curve_skeleton,
    load_indices,
    load_point_cloud,
    save_curve_skeleton,
    save_point_cloud,
)
from .synth import KINDS, contract, generate

log = logging.getLogger("skelscore")

EPILOG = (
    "Config keys (for --set key=value or a --config JSON object): "
    + ", ".join(RunConfig.__dataclass_fields__)
    + ". Environment: SKELSCORE_THREADS caps worker threads (default 1)."
)


class UsageError(Exception):
    pass


def _config(args):
    cfg = RunConfig.from_json(args.config) if args.config else RunConfig()
    if getattr(args, "seed", None) is not None:
        cfg = cfg.replace(seed=args.seed)
    return cfg.with_overrides(args.set or [])


def _skeletal(args):
    if not args.skeletal:
        return None
    pts = load_point_cloud(args.skeletal).points
    corr = load_indices(args.correspondence) if getattr(args, "correspondence", None) else None
    return SkeletalPointSet(pts, corr)


def _curve(args):
    return load_curve_skeleton(args.curve) if args.curve else None


def _write_report(report, args):
    if args.out:
        export_report(report, args.out)
        log.info("wrote %s", args.out)
    else:
        sys.stdout.write(report.to_json() + "\n")
    for w in report.warnings:
        log.warning("%s", w)
    for key, sec in sorted(report.timings.items()):
        log.info("time %-24s %.2f s", key, sec)


def _export_colored(report, directory, skeletal, curve, tf):
    os.makedirs(directory, exist_ok=True)
    inverse = tf.inverse() if tf is not None else None
    positions = {}
    if skeletal is not None:
        positions["points"] = skeletal.points
    if curve is not None:
        positions["vertex"] = curve.vertices
    if report.curve_samples:
        sample_pos = np.array([s["position"] for s in report.curve_samples])
        positions["sample"] = inverse.apply(sample_pos) if inverse is not None else sample_pos
    for metric in ("boundedness", "centeredness", "smoothness"):
        for kind, where in (("points", "points"), ("curve", "sample"), ("curve", "vertex")):
            vals = report.element_values(metric, kind)
            pos = positions.get(where)
            if vals.size == 0 or pos is None or len(pos) != vals.size:
                continue
            path = os.path.join(directory, f"{metric}_{where}.ply")
            export_colored_ply(pos, vals, path)
            log.info("wrote %s", path)


def _export_barcodes(barcodes, directory, extremes):
    os.makedirs(directory, exist_ok=True)
    original, skeletal = barcodes
    export_barcode_csv(original, os.path.join(directory, "barcode_original.csv"), extremes)
    export_barcode_csv(skeletal, os.path.join(directory, "barcode_skeletal.csv"), extremes)
    export_barcode_svg([original, skeletal], os.path.join(directory, "barcodes.svg"),
                       labels=["original", "skeletal"], extremes=extremes)
    log.info("wrote barcodes to %s", directory)


def _run_evaluation(args, metrics):
    cfg = _config(args)
    cloud = load_point_cloud(args.original)
    skeletal = _skeletal(args)
    curve = _curve(args) if hasattr(args, "curve") else None
    if skeletal is None and curve is None:
        raise UsageError("give --skeletal and/or --curve")
    report = evaluate(cloud, skeletal, curve, cfg, metrics=metrics)
    tf = normalize_to_diagonal(cloud, cfg.target_diagonal)[1] if cfg.normalize else None
    if getattr(args, "colored", None):
        _export_colored(report, args.colored, skeletal, curve, tf)
    if getattr(args, "barcodes", None) and "barcodes" in report.artifacts:
        _export_barcodes(report.artifacts["barcodes"], args.barcodes, args.extremes)
    if getattr(args, "sections", None) and "sections" in report.artifacts:
        export_cross_sections(report.artifacts["sections"], args.sections)
        log.info("wrote %s", args.sections)
    _write_report(report, args)
    row = report.table_row()
    if row:
        log.info("summary %s", " ".join(f"{k}={v}" for k, v in row.items()))
    return 0


def cmd_evaluate(args):
    return _run_evaluation(args, METRICS)


def cmd_topo(args):
    return _run_evaluation(args, ("topology",))


def cmd_bounded(args):
    if args.query is None:
        return _run_evaluation(args, ("boundedness",))
    cfg = _config(args)
    cloud = load_point_cloud(args.original)
    q = np.asarray(args.query, dtype=np.float64)
    pts = cloud.points
    if cfg.normalize:
        cloud, tf = normalize_to_diagonal(cloud, cfg.target_diagonal)
        q, pts = tf.apply(q), cloud.points
    cov = sphere_coverage(q, pts, cfg.pruning_factor, cfg.coverage_method, cfg.coverage_spacing)
    if args.coverage_ply:
        export_sphere_coverage(cov, args.coverage_ply)
        log.info("wrote %s", args.coverage_ply)
    out = {"query": list(map(float, args.query)), "beta": cov.beta, "area": cov.area,
           "triangles_kept": int(cov.kept.sum()), "triangles_total": int(len(cov.kept)),
           "skipped_coincident": int(cov.n_skipped)}
    text = json.dumps(out, indent=1, sort_keys=True)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")
    return 0


def cmd_centered(args):
    return _run_evaluation(args, ("centeredness",))


def cmd_smooth(args):
    if args.original is None:
        # smoothness is scale-free; normalize by the skeleton's own box
        src = args.skeletal or args.curve
        if src is None:
            raise UsageError("give --skeletal and/or --curve")
        if args.skeletal:
            args.original = args.skeletal
        else:
            skel = load_curve_skeleton(args.curve)
            cfg = _config(args)
            report = evaluate(skel.vertices, None, skel, cfg, metrics=("smoothness",))
            if args.colored:
                _export_colored(report, args.colored, None, skel, None)
            _write_report(report, args)
            return 0
    return _run_evaluation(args, ("smoothness",))


def cmd_degrade(args):
    cloud = load_point_cloud(args.input)
    if (args.noise is None) == (args.downsample is None):
        raise UsageError("give exactly one of --noise or --downsample")
    if args.noise is not None:
        out = degrade_noise(cloud, args.noise, args.seed)
    else:
        out = degrade_downsample(cloud, args.downsample)
    save_point_cloud(args.output, out, binary=args.binary)
    log.info("wrote %d points to %s", len(out), args.output)
    return 0


def _parse_param(item):
    key, sep, raw = item.partition("=")
    if not sep:
        raise UsageError(f"bad --param {item!r}; expected key=value")
    try:
        vals = [float(v) for v in raw.split(",")]
    except ValueError:
        raise UsageError(f"--param {key} expects numbers, got {raw!r}") from None
    if key == "segments":
        return key, int(vals[0])
    return key, (tuple(vals) if len(vals) > 1 else vals[0])


def cmd_synth(args):
    params = dict(_parse_param(p) for p in args.param or [])
    shape = generate(args.kind, n=args.n, seed=args.seed, **params)
    save_point_cloud(args.output, shape.cloud, binary=args.binary)
    log.info("wrote %d points to %s", len(shape.cloud), args.output)
    for note in shape.notes:
        log.warning("%s", note)
    if args.curve_out:
        if shape.curve is None:
            raise UsageError(f"{args.kind} has no curve ground truth")
        save_curve_skeleton(args.curve_out, shape.curve)
        log.info("wrote %s", args.curve_out)
    if args.skeletal_out:
        if shape.curve is None:
            raise UsageError(f"{args.kind} has no curve to contract toward")
        save_point_cloud(args.skeletal_out, contract(shape.cloud, shape.curve, args.contract),
                         binary=args.binary)
        log.info("wrote %s", args.skeletal_out)
    return 0


def _common(p):
    p.add_argument("--config", metavar="JSON", help="JSON object of config values")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override one config value; repeatable")
    p.add_argument("--out", metavar="PATH", help="write the JSON report here instead of stdout")


def _inputs(p, original=True, correspondence=True):
    if original:
        p.add_argument("original", help="original point cloud (.xyz or .ply)")
    p.add_argument("--skeletal", metavar="PATH", help="skeletal point set (.xyz or .ply)")
    if correspondence:
        p.add_argument("--correspondence", metavar="PATH",
                       help="original-cloud index per skeletal point, one per line "
                            "(default: identity, which needs equal sizes)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="skelscore",
        description="Score skeletons of 3D point clouds: topological similarity, "
                    "boundedness, centeredness and smoothness.",
        epilog=EPILOG,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-q", "--quiet", action="store_true", help="only print errors")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("evaluate", help="run every applicable metric", epilog=EPILOG)
    _inputs(p)
    p.add_argument("--curve", metavar="PATH", help="curve skeleton (.obj or edge list)")
    _common(p)
    p.add_argument("--colored", metavar="DIR", help="write score-coloured PLY files here")
    p.add_argument("--barcodes", metavar="DIR", help="write barcode CSV and SVG files here")
    p.add_argument("--extremes", type=float, metavar="FRACTION",
                   help="only export the top and bottom FRACTION of bars by persistence")
    p.add_argument("--sections", metavar="PATH", help="write curve cross-sections as CSV")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("topo", help="topological similarity of a skeletal point set", epilog=EPILOG)
    _inputs(p)
    _common(p)
    p.add_argument("--barcodes", metavar="DIR", help="write barcode CSV and SVG files here")
    p.add_argument("--extremes", type=float, metavar="FRACTION",
                   help="only export the top and bottom FRACTION of bars by persistence")
    p.set_defaults(func=cmd_topo)

    p = sub.add_parser("bounded", help="boundedness of skeletal points, curve samples or one query",
                       epilog=EPILOG)
    _inputs(p)
    p.add_argument("--curve", metavar="PATH", help="curve skeleton (.obj or edge list)")
    p.add_argument("--query", type=float, nargs=3, metavar=("X", "Y", "Z"),
                   help="score a single point given in input coordinates")
    p.add_argument("--coverage-ply", metavar="PATH",
                   help="with --query: write the covered direction-sphere triangles as PLY")
    _common(p)
    p.add_argument("--colored", metavar="DIR", help="write score-coloured PLY files here")
    p.set_defaults(func=cmd_bounded)

    p = sub.add_parser("centered", help="centeredness of skeletal points or curve samples", epilog=EPILOG)
    _inputs(p)
    p.add_argument("--curve", metavar="PATH", help="curve skeleton (.obj or edge list)")
    _common(p)
    p.add_argument("--colored", metavar="DIR", help="write score-coloured PLY files here")
    p.add_argument("--sections", metavar="PATH", help="write curve cross-sections as CSV")
    p.set_defaults(func=cmd_centered)

    p = sub.add_parser("smooth", help="smoothness of skeletal points or a curve skeleton", epilog=EPILOG)
    p.add_argument("--original", metavar="PATH",
                   help="original cloud, used only for normalization (optional)")
    _inputs(p, original=False, correspondence=False)
    p.add_argument("--curve", metavar="PATH", help="curve skeleton (.obj or edge list)")
    _common(p)
    p.add_argument("--colored", metavar="DIR", help="write score-coloured PLY files here")
    p.set_defaults(func=cmd_smooth)

    p = sub.add_parser("degrade", help="add noise to or downsample a cloud")
    p.add_argument("input", help="input cloud (.xyz or .ply)")
    p.add_argument("output", help="output cloud (.xyz or .ply)")
    p.add_argument("--noise", type=float, metavar="FRACTION",
                   help="Gaussian noise, sigma = FRACTION x bounding-box diagonal")
    p.add_argument("--downsample", type=int, metavar="N", help="grid-averaged downsampling to about N points")
    p.add_argument("--seed", type=int, default=0, help="noise seed (default 0)")
    p.add_argument("--binary", action="store_true", help="write binary PLY")
    p.set_defaults(func=cmd_degrade)

    p = sub.add_parser("synth", help="generate a synthetic shape with ground truth")
    p.add_argument("kind", choices=KINDS)
    p.add_argument("output", help="output cloud (.xyz or .ply)")
    p.add_argument("--n", type=int, default=4096, help="number of surface points (default 4096)")
    p.add_argument("--seed", type=int, default=0, help="sampling seed (default 0)")
    p.add_argument("--param", action="append", metavar="KEY=VALUE",
                   help="shape parameter, e.g. radius=0.1 or size=1,2,3; repeatable")
    p.add_argument("--curve-out", metavar="PATH", help="write the ground-truth curve (.obj or edge list)")
    p.add_argument("--skeletal-out", metavar="PATH",
                   help="write a skeletal point set contracted toward the ground-truth curve")
    p.add_argument("--contract", type=float, default=0.95, metavar="AMOUNT",
                   help="fraction of the way each point moves toward the curve (default 0.95)")
    p.add_argument("--binary", action="store_true", help="write binary PLY")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.INFO,
                        format="skelscore: %(message)s", stream=sys.stderr)
    logging.captureWarnings(True)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (OSError, FormatError, ValueError, TypeError) as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
