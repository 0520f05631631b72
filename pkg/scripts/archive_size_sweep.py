#!/usr/bin/env python3
"""Archive-size sensitivity sweep for dtel on one stream preset.

    python3 scripts/archive_size_sweep.py --preset SEA200A --out results/sweep.csv
"""

import argparse
import sys

from driftel.cli import main as cli_main


def parse_args():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--preset", default="SEA200A")
    parser.add_argument("--m-values", default="1,5,10,20,25,30")
    parser.add_argument("--seeds", default="1,2,3,4,5")
    parser.add_argument("--out", default="results/sweep.csv")
    return parser.parse_args()


def main():
    args = parse_args()
    return cli_main(
        [
            "sweep",
            "--preset", args.preset,
            "--m-values", args.m_values,
            "--seeds", args.seeds,
            "--out", args.out,
        ]
    )


if __name__ == "__main__":
    sys.exit(main())
