"""Draw the final adaptive meshes of the hierarchical runs as SVG files.

    python scripts/mesh_figures.py [--out figures] [--levels 5]
"""
import argparse
from pathlib import Path

from hermite_qi.export import export_mesh_svg, export_mesh_text
from hermite_qi.harness import ExperimentConfig, run_experiment

RUNS = [("f1", (2, 2)), ("f1", (3, 3)), ("f1", (4, 4)), ("f2", (3, 3))]


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", default="figures")
    ap.add_argument("--levels", type=int, default=5)
    ap.add_argument("--qi", default="hier", choices=["hier", "that-hier", "fd-hier"])
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for function, degrees in RUNS:
        cfg = ExperimentConfig(function=function, degrees=degrees, levels=args.levels, qi=args.qi)
        res = run_experiment(cfg)
        mesh = res.meshes[-1]
        svg = export_mesh_svg(mesh, out / f"{cfg.stem}_mesh.svg")
        export_mesh_text(mesh, out / f"{cfg.stem}_mesh.txt")
        per_level = [len(mesh.active_cells(l)) for l in range(mesh.depth)]
        print(f"{svg}: active cells per level {per_level}, dim {res.reports[-1].dim_hier}")


if __name__ == "__main__":
    main()
