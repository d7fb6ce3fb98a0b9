"""Modality ablation: mean F1 per modality subset.

Each trial draws a multimodality suite whose modalities have complementary
failure modes (inconclusive, noisy, inverted, weak).  Every single modality
is solved on its own, then modalities are added strongest first, and each
subset is also scored with two thresholding baselines for contrast.

Run:
    python scripts/run_modality_ablation.py
    python scripts/run_modality_ablation.py --trials 50 --csv ablation.csv
"""

from __future__ import annotations

import argparse
from dataclasses import replace

from fusematch import ablation, write_ablation_csv
from fusematch.bench import format_ablation_table
from fusematch.synth import DEFAULT_SUITE_BASE


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--trials", type=int, default=30)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--universe-size", type=int,
                        default=DEFAULT_SUITE_BASE.universe_size)
    parser.add_argument("--num-sets", type=int,
                        default=DEFAULT_SUITE_BASE.num_sets)
    parser.add_argument("--observe-prob", type=float,
                        default=DEFAULT_SUITE_BASE.observe_prob)
    parser.add_argument("--outliers", type=int,
                        default=DEFAULT_SUITE_BASE.outliers_per_run)
    parser.add_argument("--csv", help="also write the rows to this CSV path")
    args = parser.parse_args()

    base = replace(
        DEFAULT_SUITE_BASE,
        universe_size=args.universe_size,
        num_sets=args.num_sets,
        observe_prob=args.observe_prob,
        outliers_per_run=args.outliers,
    )
    rows = ablation(args.trials, args.seed, base=base)
    print(format_ablation_table(rows))
    if args.csv:
        write_ablation_csv(rows, args.csv)
        print(f"wrote {args.csv}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
