"""
reproduce_tables.py
===================
Run the replication studies for the built-in designs at desk scale and write
one metrics CSV per design under ``outputs/tables/``, plus one simulated
curve per low-dimensional design under ``outputs/curves/``.

The low-dimensional designs (C1-C3) use plain logistic nuisances and
``rho`` in {0, 0.1, 0.2, 0.3, 0.4}; the high-dimensional ones (C4-C6) use
L1-penalised nuisances with a cross-validated penalty at ``rho = 0.3``.

Usage
-----
    python scripts/reproduce_tables.py \\
        --cases C1 C2 C3 \\
        --n 1000 --reps 500 --jobs 4 --seed 2024 \\
        --output-dir outputs

Pass ``--full`` for the full grid of sample sizes (500, 1000, 2000) with
1000 replications.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

# Allow running from the repo root without installing the package
sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from fna_sensitivity.simulation.dgp import case_spec
from fna_sensitivity.simulation.study import curve_data, metrics_frame, run_study

LOW_DIM_RHOS = (0.0, 0.1, 0.2, 0.3, 0.4)
HIGH_DIM_RHOS = (0.3,)


def reproduce(case: str, sizes, reps: int, jobs: int, seed: int, output_dir: Path) -> None:
    spec = case_spec(case)
    rhos = LOW_DIM_RHOS if spec.p <= 2 else HIGH_DIM_RHOS
    tables = output_dir / "tables"
    tables.mkdir(parents=True, exist_ok=True)
    for n in sizes:
        rows = run_study(spec, n=n, rho_list=rhos, replications=reps,
                         master_seed=seed, n_jobs=jobs)
        out_file = tables / f"{spec.case_id}_n{n}.csv"
        metrics_frame(rows).to_csv(out_file, index=False)
        print(f"  wrote {out_file}")

    if spec.p <= 2:
        curves = output_dir / "curves"
        curves.mkdir(parents=True, exist_ok=True)
        frame = curve_data(spec, n=max(sizes), rho_grid=[i / 100 for i in range(0, 41, 2)], seed=seed)
        out_file = curves / f"{spec.case_id}.csv"
        frame.to_csv(out_file, index=False)
        print(f"  wrote {out_file}")


def main() -> None:
    parser = argparse.ArgumentParser(description="Reproduce the simulation tables")
    parser.add_argument("--cases", nargs="+", default=["C1", "C2", "C3"], metavar="CASE")
    parser.add_argument("--n", type=int, default=1000)
    parser.add_argument("--reps", type=int, default=500)
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--seed", type=int, default=2024)
    parser.add_argument("--full", action="store_true",
                        help="n in (500, 1000, 2000) with 1000 replications")
    parser.add_argument("--output-dir", "-o", default="outputs", metavar="DIR")
    parser.add_argument("--verbose", "-v", action="store_true")
    args = parser.parse_args()

    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    sizes = (500, 1000, 2000) if args.full else (args.n,)
    reps = 1000 if args.full else args.reps

    for case in args.cases:
        print(f"\n=== {case} ===")
        reproduce(case, sizes, reps, args.jobs, args.seed, Path(args.output_dir))


if __name__ == "__main__":
    main()
