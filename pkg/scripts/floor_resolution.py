"""Shift drift of the unperturbed single shock under grid refinement.

Prints X(T) of the zero-perturbation run for a few cell sizes and writes
runs/floor_resolution/floor_resolution.csv.
"""

import argparse
from dataclasses import replace
from pathlib import Path

from relaxcns.harness import ExperimentConfig, Table, prepare, simulate

ROOT = Path(__file__).resolve().parents[1]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--half-width", type=float, default=400.0)
    ap.add_argument("--end-time", type=float, default=50.0)
    ap.add_argument("--cells", type=int, nargs="+", default=[512, 1024, 2048])
    ap.add_argument("--out", type=Path, default=ROOT / "runs" / "floor_resolution")
    args = ap.parse_args()

    base = replace(
        ExperimentConfig(), v_minus=1.0, shape="zero", amplitude=0.0,
        L=args.half_width, end_time=args.end_time,
    )
    table = Table(["N", "dx", "X_T"])
    for n in args.cells:
        cfg = replace(base, N=n)
        traj = simulate(cfg, prepare(cfg))
        row = [n, 2.0 * args.half_width / n, float(traj.shift.column("X")[-1])]
        table.rows.append(row)
        print(f"N={row[0]:6d} dx={row[1]:.4f} X(T)={row[2]:+.3e}")
    args.out.mkdir(parents=True, exist_ok=True)
    lines = [",".join(table.columns)] + [",".join(f"{x:.17g}" for x in r) for r in table.rows]
    (args.out / "floor_resolution.csv").write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
