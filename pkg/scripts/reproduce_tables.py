#!/usr/bin/env python3
"""Reproduce the optimal-fidelity tables and the deviation report.

Writes table_seq.csv, table_par.csv, deviations.csv, tables.json, and a
run manifest into the output directory (default: results/tables).
"""

import argparse
import sys

from unitary_inversion.cli import main as cli_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results/tables")
    parser.add_argument("--n-max", type=int, default=5)
    parser.add_argument("--d-max", type=int, default=6)
    parser.add_argument("--svec-cap", type=int, default=2000)
    args = parser.parse_args()
    return cli_main(
        [
            "tables",
            "--d-min", "2",
            "--d-max", str(args.d_max),
            "--n-min", "1",
            "--n-max", str(args.n_max),
            "--svec-cap", str(args.svec_cap),
            "--out", args.out,
        ]
    )


if __name__ == "__main__":
    sys.exit(main())
