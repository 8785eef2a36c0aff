"""Run every bundled reference configuration and diff it against the bundled reference values.

    python scripts/reproduce_tables.py [--out results] [--only f1_hier_d22 ...]
"""
import argparse
import time
from pathlib import Path

from hermite_qi.harness import (
    DEFAULT_TOLERANCES,
    compare_tables,
    config_from_stem,
    reference_names,
    reference_table,
    reports_as_rows,
    run_experiment,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", default="results", help="directory for CSV/text/SVG outputs")
    ap.add_argument("--only", nargs="*", help="run names (see `hermite-qi tables list`)")
    ap.add_argument("--membership", choices=["owner", "closed"], default="owner")
    args = ap.parse_args()

    tol = dict(DEFAULT_TOLERANCES, dim_hier=0.0, evals=0.0)
    total_bad = 0
    for stem in args.only or reference_names():
        t0 = time.perf_counter()
        res = run_experiment(config_from_stem(stem, out=args.out, membership=args.membership))
        rows = compare_tables(reports_as_rows(res.reports), reference_table(stem), tol)
        bad = [r for r in rows if not r[-1]]
        total_bad += len(bad)
        stop = ""
        if res.epsilon is not None:
            stop = f", eps={res.epsilon:.3e}, stopped by {'tolerance' if res.stopped_by_tolerance else 'level limit'}"
        print(f"{stem}: {len(rows) - len(bad)}/{len(rows)} cells within tolerance "
              f"({time.perf_counter() - t0:.1f}s{stop})")
        for M, col, got, want, rel, _ in bad:
            print(f"    M={M} {col:8s} got {got:.4g} want {want:.4g} ({rel:.1%})")
    print(f"outputs in {Path(args.out).resolve()}; {total_bad} cells outside tolerance")


if __name__ == "__main__":
    main()
