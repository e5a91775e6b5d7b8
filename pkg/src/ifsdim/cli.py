"""Command-line front end.

Usage:
    ifsdim moran SPEC [--tol T]
    ifsdim dims SPEC [--depth D] [--level N] [--budget B] [--seed S] [--points P] [--out DIR]
    ifsdim osc SPEC
    ifsdim points SPEC --mode {deterministic,chaos} [--depth D | --count C] [--seed S] [--out FILE]
    ifsdim levels SPEC --n N [--out FILE]

Exit codes: 0 success, 1 certificate violated, 2 invalid input, 3 enumeration cap exceeded.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from pathlib import Path

from . import __version__
from .dimensions import build_report
from .fractal_structure import format_word, level
from .ifs_core import EnumerationCapError, chaos_game, deterministic_points
from .moran import moran_exponent
from .osc_certificate import verify
from .specfile import SpecError, load_spec

EXIT_OK, EXIT_VIOLATED, EXIT_INPUT, EXIT_CAP = 0, 1, 2, 3


def fmt(x: float) -> str:
    return f"{x:.16g}"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


def _write_csv(path, header, rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    if path is None or str(path) == "-":
        sys.stdout.write(buf.getvalue())
    else:
        Path(path).write_text(buf.getvalue())


def cmd_moran(args) -> int:
    spec = load_spec(args.spec)
    sol = moran_exponent(spec.ifs.ratios.tolist(), args.tol)
    print(f"s = {fmt(sol.s)}")
    print(f"residual = {sol.residual:.3e}")
    print(f"method = {sol.method}")
    return EXIT_OK


def cmd_dims(args) -> int:
    spec = load_spec(args.spec)
    timings = {}
    t0 = time.perf_counter()
    cert = None
    if spec.certificate is not None:
        cert = verify(spec.ifs, spec.certificate)
    timings["certificate"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    report = build_report(spec.ifs, depth=args.depth, level=args.level, budget=args.budget,
                          seed=args.seed, points=args.points, certificate=cert,
                          packing=not args.no_packing)
    timings["dimensions"] = time.perf_counter() - t0

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    body = report.to_dict()
    doc = {
        "tool": {"name": "ifsdim", "version": __version__},
        "spec": {"name": spec.name, "sha256": spec.sha256, "labels": spec.labels},
        "parameters": {"depth": report.depth, "level": args.level, "budget": args.budget,
                       "seed": args.seed, "points": args.points},
        "report": body,
        "timings": timings,
    }
    (out / "report.json").write_text(json.dumps(_jsonable(doc), indent=2) + "\n")
    _write_csv(out / "dim1_sequence.csv", ["n", "value"], [(n, repr(v)) for n, v in report.dim1.sequence])
    _write_csv(out / "dim2_sequence.csv", ["n", "value"], [(n, repr(v)) for n, v in report.dim2.sequence])
    if report.box is not None:
        cols = ["delta", "grid_count", "packing_count", "log_delta", "log_count"]
        _write_csv(out / "box_counts.csv", cols,
                   [[repr(r[c]) if isinstance(r[c], float) else r[c] for c in cols]
                    for r in report.box.counts.rows()])

    _print_summary(spec, report)
    print(f"report written to {out}")
    return EXIT_OK


def _print_summary(spec, report) -> None:
    rows = [
        ("dim I", fmt(report.dim1.value), "closed form"),
        ("dim II", fmt(report.dim2.value), "closed form (limit)"),
        ("dim III", fmt(report.dim3.value),
         f"Moran {report.dim3.solution.method}, jump {'ok' if report.dim3.jump_verified else 'FAILED'}"),
        ("dim IV-VI", fmt(report.dims456.iv), f"upper bound, grid step {report.dims456.grid_step}"),
        ("H3 at s", f"[{report.h3.value.lo:.6g}, {report.h3.value.hi:.6g}]", report.h3.limit),
        ("diam(K)", f"[{report.diam.lo:.10g}, {report.diam.hi:.10g}]", f"depth {report.depth}"),
    ]
    if report.box is not None:
        b = report.box
        rows.append(("box (grid)", f"{b.grid.slope:.4f}", f"stderr {b.grid.slope_stderr:.2g}"))
        if b.packing is not None:
            rows.append(("box (packing)", f"{b.packing.slope:.4f}", f"stderr {b.packing.slope_stderr:.2g}"))
    if report.certificate is not None:
        rows.append(("OSC certificate", "holds" if report.certificate["holds"] else "violated", ""))
    title = spec.name or "IFS"
    print(f"{title}: k = {report.k}, d = {report.dim}")
    for name, value, note in rows:
        print(f"  {name:<16} {value:<26} {note}")
    for c in report.checks:
        print(f"  check {c.name:<18} {c.status:<15} {c.detail}")


def cmd_osc(args) -> int:
    spec = load_spec(args.spec)
    if spec.ifs.dim != 2:
        raise SpecError("dimension", "certificate verification requires d = 2")
    if spec.certificate is None:
        raise SpecError("certificate", "missing; osc needs a certificate polygon")
    verdict = verify(spec.ifs, spec.certificate)
    if verdict.holds:
        print("OSC certificate holds")
    else:
        print(f"OSC certificate violated ({len(verdict.violations)} violation(s))")
        for v in verdict.violations:
            maps = ", ".join(str(m) for m in v["maps"])
            wit = ", ".join(f"{x:.6g}" for x in v["witness"])
            print(f"  {v['kind']} ({maps}): witness ({wit}); {v['detail']}")
    m = verdict.to_dict()["margins"]
    print(f"margins: containment = {m['containment']}, separation = {m['separation']}")
    return EXIT_OK if verdict.holds else EXIT_VIOLATED


def _point_header(d: int) -> list[str]:
    return ["x", "y", "z"][:d] if d <= 3 else [f"x{i + 1}" for i in range(d)]


def cmd_points(args) -> int:
    spec = load_spec(args.spec)
    if args.mode == "deterministic":
        if args.count is not None:
            raise SpecError("--count", "only valid with --mode chaos")
        cloud = deterministic_points(spec.ifs, args.depth if args.depth is not None else 6)
    else:
        if args.depth is not None:
            raise SpecError("--depth", "only valid with --mode deterministic")
        cloud = chaos_game(spec.ifs, args.count if args.count is not None else 10**4, args.seed)
    rows = [[repr(x) for x in p] for p in cloud.points.tolist()]
    _write_csv(args.out, _point_header(cloud.dim), rows)
    return EXIT_OK


def cmd_levels(args) -> int:
    spec = load_spec(args.spec)
    lvl = level(spec.ifs, args.n)
    k = spec.ifs.k
    rows = [(format_word(e.word, k), repr(e.relative_diameter)) for e in lvl]
    _write_csv(args.out, ["word", "relative_diameter"], rows)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ifsdim", description="Fractal dimensions of IFS attractors.")
    p.add_argument("--version", action="version", version=f"ifsdim {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    m = sub.add_parser("moran", help="solve the Moran equation")
    m.add_argument("spec")
    m.add_argument("--tol", type=float, default=1e-12)
    m.set_defaults(func=cmd_moran)

    d = sub.add_parser("dims", help="compute every dimension and write a report")
    d.add_argument("spec")
    d.add_argument("--depth", type=int, default=None, help="depth of the diameter enclosure")
    d.add_argument("--level", type=int, default=1, help="level n for H functionals and antichain covers")
    d.add_argument("--budget", type=int, default=2000, help="antichain splits per s value")
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--points", type=int, default=10**6, help="chaos-game points (0 skips box counting)")
    d.add_argument("--no-packing", action="store_true", help="skip the packing counter")
    d.add_argument("--out", default="ifsdim-report")
    d.set_defaults(func=cmd_dims)

    o = sub.add_parser("osc", help="verify the certificate in a spec file")
    o.add_argument("spec")
    o.set_defaults(func=cmd_osc)

    pt = sub.add_parser("points", help="export an attractor point cloud as CSV")
    pt.add_argument("spec")
    pt.add_argument("--mode", choices=["deterministic", "chaos"], default="deterministic")
    pt.add_argument("--depth", type=int, default=None)
    pt.add_argument("--count", type=int, default=None)
    pt.add_argument("--seed", type=int, default=0)
    pt.add_argument("--out", default="-")
    pt.set_defaults(func=cmd_points)

    lv = sub.add_parser("levels", help="list a level of the natural fractal structure")
    lv.add_argument("spec")
    lv.add_argument("--n", type=int, required=True)
    lv.add_argument("--out", default="-")
    lv.set_defaults(func=cmd_levels)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except EnumerationCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (SpecError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
