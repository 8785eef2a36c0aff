"""Command-line entry point: ``hermite-qi run | mesh export | tables compare``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .export import export_mesh_svg, export_mesh_text, import_mesh_text
from .harness import (
    DEFAULT_TOLERANCES,
    KINDS,
    ConfigError,
    ExperimentConfig,
    compare_tables,
    config_from_mapping,
    parse_config_text,
    read_csv,
    reference_names,
    reference_table,
    render_table,
    run_experiment,
)
from .hierarchy import MeshError


def _add_run_flags(p):
    p.add_argument("--function", choices=["f1", "f2"])
    p.add_argument("--degrees", metavar="D1,D2")
    p.add_argument("--levels", type=int, metavar="K")
    p.add_argument("--qi", choices=KINDS)
    p.add_argument("--fd-order", metavar="K1,K2")
    p.add_argument("--eps-factor", type=float)
    p.add_argument("--membership", choices=["owner", "closed"])
    p.add_argument("--out", metavar="DIR")


def _config(args) -> ExperimentConfig:
    values = {}
    if getattr(args, "config", None):
        path = Path(args.config)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from exc
        base = parse_config_text(text)
        values = {k: v for k, v in vars(base).items() if v is not None}
        for k in ("degrees", "fd_order", "base"):
            values[k] = ",".join(map(str, values[k]))
    for key in ("function", "degrees", "levels", "qi", "fd_order", "eps_factor", "membership", "out"):
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    return config_from_mapping(values)


def cmd_run(args):
    cfg = _config(args)
    result = run_experiment(cfg)
    sys.stdout.write(render_table(result.reports))
    if result.epsilon is not None:
        how = "tolerance" if result.stopped_by_tolerance else "level limit"
        print(f"epsilon = {result.epsilon:.3e}; stopped by {how}")
    if cfg.out:
        print(f"wrote {Path(cfg.out) / cfg.stem}.csv")
    return 0


def cmd_mesh_export(args):
    if args.input:
        mesh = import_mesh_text(args.input)
    else:
        cfg = _config(args)
        if not cfg.hierarchical:
            raise ConfigError("qi: mesh export needs a hierarchical kind (hier, that-hier, fd-hier)")
        cfg.out = None
        mesh = run_experiment(cfg).meshes[-1]
    out = Path(args.output)
    if args.format == "svg" or (args.format is None and out.suffix == ".svg"):
        export_mesh_svg(mesh, out)
    else:
        export_mesh_text(mesh, out)
    print(f"wrote {out} ({len(mesh.cells())} active cells, {mesh.depth} levels)")
    return 0


def _tolerances(items):
    tol = dict(DEFAULT_TOLERANCES)
    for item in items or []:
        try:
            col, val = item.split("=")
            tol[col] = float(val)
        except ValueError as exc:
            raise ConfigError(f"--tol: expected COLUMN=VALUE, got {item!r}") from exc
    return tol


def cmd_tables_compare(args):
    produced = read_csv(args.produced)
    if args.expected:
        expected = read_csv(args.expected)
    else:
        expected = reference_table(args.reference or Path(args.produced).stem)
    rows = compare_tables(produced, expected, _tolerances(args.tol))
    bad = 0
    for M, col, got, want, rel, ok in rows:
        bad += not ok
        print(f"M={M} {col:8s} got {got:.3e} want {want:.3e} rel {rel:.2%} {'ok' if ok else 'FAIL'}")
    print(f"{len(rows) - bad}/{len(rows)} within tolerance")
    return 1 if bad else 0


def cmd_tables_list(args):
    print("\n".join(reference_names()))
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="hermite-qi", description="Hierarchical Hermite spline quasi-interpolation experiments")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment")
    run.add_argument("config", nargs="?", help="key = value configuration file")
    _add_run_flags(run)
    run.set_defaults(func=cmd_run)

    mesh = sub.add_parser("mesh", help="mesh utilities").add_subparsers(dest="mesh_command", required=True)
    exp = mesh.add_parser("export", help="write the final adaptive mesh as SVG or text")
    exp.add_argument("output")
    exp.add_argument("--input", help="mesh text file to convert instead of running")
    exp.add_argument("--format", choices=["svg", "text"])
    exp.add_argument("--config")
    _add_run_flags(exp)
    exp.set_defaults(func=cmd_mesh_export)

    tables = sub.add_parser("tables", help="reference tables").add_subparsers(dest="tables_command", required=True)
    cmp_ = tables.add_parser("compare", help="diff a produced CSV against expected values")
    cmp_.add_argument("produced")
    cmp_.add_argument("expected", nargs="?", help="CSV of expected values (default: bundled reference)")
    cmp_.add_argument("--reference", help="bundled reference name, default: stem of PRODUCED")
    cmp_.add_argument("--tol", action="append", metavar="COLUMN=VALUE")
    cmp_.set_defaults(func=cmd_tables_compare)
    lst = tables.add_parser("list", help="list bundled reference tables")
    lst.set_defaults(func=cmd_tables_list)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (ConfigError, MeshError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
