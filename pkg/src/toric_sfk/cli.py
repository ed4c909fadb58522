"""Command-line front end.

Exit codes: 0 success, 1 invalid input or failed verification, 2 unreadable
or malformed input.  JSON reports carry a ``header`` (timestamp, version)
and a deterministic ``body``.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from . import boundary as bd
from .ansatz import GridSpec, export_grid_csv
from .asymptotics import classify, decay_fit
from .conical import conical_construct
from .config import RunConfig, Tolerances
from .errors import ToricSFKError
from .geometry import export_metric_jsonl, interior_mesh, momentum_profile, scalar_curvature_many
from .pipeline import construct, suite_asymptotics, suite_boundary_trace, suite_edges, verify
from .polytope import derive_constants, fraction_str, load_polytope, normalize, validate
from .report import _clean

log = logging.getLogger("toric_sfk")

EXIT_OK, EXIT_FAIL, EXIT_PARSE = 0, 1, 2


class ParseFailure(Exception):
    pass


def _load(path):
    try:
        return load_polytope(path)
    except (OSError, json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ParseFailure(f"{path}: {exc}") from exc
    except ToricSFKError as exc:
        raise ParseFailure(f"{path}: {exc}") from exc


def _write_report(body: dict, out_dir: Path | None, name: str) -> str:
    header = {"timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"), "version": __version__}
    if out_dir is not None:
        header["out_dir"] = str(out_dir)
    doc = {
        "header": header,
        "body": _clean(body),
    }
    text = json.dumps(doc, indent=2, sort_keys=True)
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / name).write_text(text + "\n", encoding="utf-8")
    return text


def _config(args) -> RunConfig:
    overrides = {}
    for f in Tolerances.__dataclass_fields__:
        v = getattr(args, f"tol_{f}", None)
        if v is not None:
            overrides[f] = v
    return RunConfig.from_env(
        polytope_path=Path(args.polytope),
        variant=getattr(args, "variant", None),
        grid=getattr(args, "grid", 256),
        mesh=getattr(args, "mesh", 50),
        tolerances=Tolerances(**overrides),
        out_dir=Path(args.out) if getattr(args, "out", None) else Path("out"),
        recenter=getattr(args, "recenter", None),
    )


def _constants_table(poly) -> dict:
    normed, _ = normalize(poly)
    c = derive_constants(normed)
    return {
        "a_prime": [fraction_str(v) for v in c.a_prime],
        "a": [fraction_str(v) for v in c.a],
        "Lambda": {str(k + 1): fraction_str(v) for k, v in sorted(c.lambda_caps.items())},
        "lengths": {str(k + 1): float(v) for k, v in sorted(c.lengths.items())},
        "a_theta": [fraction_str(v) for v in c.a_theta],
    }


# ------------------------------------------------------------------ commands


def cmd_validate(args) -> int:
    poly, nut = _load(args.polytope)
    rep = validate(poly, nut)
    if not rep.valid:
        normed, _ = normalize(poly) if _normalizable(poly) else (None, None)
        if normed is not None and validate(normed).valid and not _nut_issue(rep):
            rep = validate(normed)
    if not rep.valid:
        for issue in rep.issues:
            print(f"invalid: {issue}", file=sys.stderr)
        return EXIT_FAIL
    table = _constants_table(poly)
    print(f"valid ({rep.mode}, d = {poly.d})")
    print(f"a'     = ({', '.join(table['a_prime'])})")
    print(f"a      = ({', '.join(table['a'])})")
    lam = ", ".join(f"Lambda_{k} = {v}" for k, v in table["Lambda"].items()) or "none"
    print(f"Lambda : {lam}")
    lengths = ", ".join(f"L_{k} = {v:.12g}" for k, v in table["lengths"].items()) or "none"
    print(f"L      : {lengths}")
    print(f"a^th   = ({', '.join(table['a_theta'])})")
    return EXIT_OK


def _normalizable(poly) -> bool:
    try:
        normalize(poly)
        return True
    except ToricSFKError:
        return False


def _nut_issue(rep) -> bool:
    return any(s.startswith("nut") for s in rep.issues)


def cmd_constants(args) -> int:
    poly, nut = _load(args.polytope)
    rep = validate(normalize(poly)[0] if _normalizable(poly) else poly)
    if not rep.valid:
        for issue in rep.issues:
            print(f"invalid: {issue}", file=sys.stderr)
        return EXIT_FAIL
    print(json.dumps(_constants_table(poly), indent=2, sort_keys=True))
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = _config(args)
    poly, nut = _load(args.polytope)
    ansatz = construct(poly, nut, cfg)
    report = verify(ansatz, cfg)
    body = {"config": cfg.to_dict(), **report.to_dict()}
    _write_report(body, cfg.out_dir, "report.json")
    for s in report.suites:
        print(f"{'PASS' if s.passed else 'FAIL'}  {s.name:<22} max_residual = {s.max_residual:.3e}")
    try:
        prof = report["momentum_profile"].details.get("table")
    except KeyError:
        prof = None
    if prof:
        print("tau  |X|^2")
        for t, v in prof:
            print(f"{t:g}  {v:.15g}")
    bad = report.first_failure()
    if bad is not None:
        print(f"verification failed: first failing suite is {bad.name}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_export(args) -> int:
    cfg = _config(args)
    poly, nut = _load(args.polytope)
    ansatz = construct(poly, nut, cfg)
    out = cfg.out_dir
    grid = GridSpec.default(ansatz, cfg.grid)
    rows = export_grid_csv(ansatz, grid, out / "grid.csv")
    mesh = interior_mesh(ansatz, cfg.mesh)
    export_metric_jsonl(ansatz, mesh, out / "metric.jsonl", h=cfg.tolerances.curvature_h)
    suites = [suite_boundary_trace(ansatz, cfg), suite_edges(ansatz, cfg)]
    boundary_body = {s.name: s.to_dict() for s in suites}
    if ansatz.polytope.cone_angles:
        boundary_body["cone_angle_identity"] = bd.cone_angle_identity(ansatz)
    _write_report(boundary_body, out, "boundary.json")
    _write_report(suite_asymptotics(ansatz, cfg).to_dict(), out, "asymptotics.json")
    print(f"wrote {rows} grid rows and {len(mesh)} metric samples to {out}")
    ok = all(s.passed for s in suites)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_profile(args) -> int:
    poly, nut = _load(args.polytope)
    cfg = _config(args)
    ansatz = construct(poly, nut, cfg)
    if args.tau:
        taus = [float(t) for t in args.tau]
    else:
        taus = np.geomspace(100.0 / 10**args.decades, 100.0, args.points)
    edge = None if args.edge is None else args.edge - 1
    for t, v in momentum_profile(ansatz, taus, edge):
        print(f"{t:.12g}\t{v:.15g}")
    return EXIT_OK


def _parse_theta(items) -> dict[int, Fraction]:
    out = {}
    for item in items or []:
        j, _, t = item.partition("=")
        if not t:
            raise ParseFailure(f"--theta expects j=value, got {item!r}")
        out[int(j) - 1] = Fraction(t)
    return out


def cmd_conical(args) -> int:
    poly, nut = _load(args.polytope)
    cfg = _config(args)
    theta = _parse_theta(args.theta) or dict(poly.cone_angles)
    if not theta:
        print("no cone angles given (use --theta j=value or a cone_angles map)", file=sys.stderr)
        return EXIT_FAIL
    base = type(poly)(poly.edges, (), {}, poly.mode)
    ansatz = conical_construct(base, theta, nut, recenter=cfg.recenter)
    ident = bd.cone_angle_identity(ansatz)
    edges = suite_edges(ansatz, cfg)
    mesh = interior_mesh(ansatz, cfg.mesh)
    h = cfg.tolerances.curvature_h
    s1 = float(np.abs(scalar_curvature_many(mesh, ansatz, h)).max())
    s2 = float(np.abs(scalar_curvature_many(mesh, ansatz, h / 2)).max())
    body = {
        "theta": {str(j + 1): str(t) for j, t in sorted(theta.items())},
        "cone_angle_identity": ident,
        "edges": edges.to_dict(),
        "scalar_curvature": {"h": h, "max_abs_s_h": s1, "max_abs_s_h2": s2, "ratio": s1 / s2 if s2 else None},
    }
    print(_write_report(body, cfg.out_dir if args.out else None, "conical.json"))
    ok = all(v["pass"] for v in ident.values()) and edges.passed
    return EXIT_OK if ok else EXIT_FAIL


def cmd_asymptotics(args) -> int:
    poly, nut = _load(args.polytope)
    cfg = _config(args)
    ansatz = construct(poly, nut, cfg)
    model = classify(ansatz.polytope, ansatz.nut)
    rep = decay_fit(ansatz, max_slope=cfg.tolerances.decay_slope)
    body = {"kind": model.kind, **rep.to_dict()}
    print(_write_report(body, cfg.out_dir if args.out else None, "asymptotics.json"))
    return EXIT_OK if rep.passed else EXIT_FAIL


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="toric-sfk", description="Toric scalar-flat Kähler metrics from polytope data")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, grid=True):
        sp.add_argument("polytope", help="polytope JSON file")
        sp.add_argument("--variant", choices=("cusp", "smooth", "conical"))
        sp.add_argument("--recenter", type=int, metavar="K", help="translate H so that a_K = 0 (1-based)")
        sp.add_argument("--out", metavar="DIR")
        if grid:
            sp.add_argument("--grid", type=int, default=256, metavar="N")
            sp.add_argument("--mesh", type=int, default=50, metavar="N")
        for f in Tolerances.__dataclass_fields__:
            sp.add_argument(f"--tol-{f.replace('_', '-')}", dest=f"tol_{f}", type=float, metavar="X")

    sp = sub.add_parser("validate", help="validate a polytope and print its constants")
    sp.add_argument("polytope")
    sp.set_defaults(func=cmd_validate)
    sp = sub.add_parser("constants", help="print derived constants as JSON")
    sp.add_argument("polytope")
    sp.set_defaults(func=cmd_constants)
    sp = sub.add_parser("verify", help="run every verification suite")
    common(sp)
    sp.set_defaults(func=cmd_verify)
    sp = sub.add_parser("export", help="write grid CSV, metric JSONL and reports")
    common(sp)
    sp.set_defaults(func=cmd_export)
    sp = sub.add_parser("profile", help="momentum profile table along a cusp edge")
    common(sp, grid=False)
    sp.add_argument("--edge", type=int, metavar="K", help="cusp edge (1-based)")
    sp.add_argument("--tau", nargs="+", metavar="T")
    sp.add_argument("--points", type=int, default=41)
    sp.add_argument("--decades", type=int, default=4)
    sp.set_defaults(func=cmd_profile)
    sp = sub.add_parser("conical", help="conical construction checks")
    common(sp)
    sp.add_argument("--theta", nargs="+", metavar="J=T", help="cone angle 2 pi T on edge J (1-based)")
    sp.set_defaults(func=cmd_conical)
    sp = sub.add_parser("asymptotics", help="end classification and decay fit")
    common(sp, grid=False)
    sp.set_defaults(func=cmd_asymptotics)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ParseFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ToricSFKError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
