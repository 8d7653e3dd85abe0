#!/usr/bin/env python3
"""Exercise the seven-qubit inversion circuit in all three simulation modes.

Prints per-mode fidelity summaries; honest runs sit at 1 up to rounding,
mismatched catalysts visibly fail.
"""

import argparse
import sys

from unitary_inversion.cli import main as cli_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=100)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--out", default=None)
    args = parser.parse_args()
    worst = 0
    for mode in ("standard", "catalytic", "adversarial"):
        argv = [
            "simulate",
            "--trials", str(args.trials),
            "--seed", str(args.seed),
            "--mode", mode,
        ]
        if args.out:
            argv += ["--out", f"{args.out}/{mode}"]
        worst = max(worst, cli_main(argv))
    return worst


if __name__ == "__main__":
    sys.exit(main())
