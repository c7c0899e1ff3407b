#!/usr/bin/env python3
"""Fetch the canonical archives (network) or synthesize stand-in datasets
(offline) into a data directory."""
import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from vqclab.data import DataError, fetch_dataset
from vqclab.synth import make_synthetic_idx


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--data-dir", default="data")
    parser.add_argument("--dataset", action="append", choices=("digits", "fashion"))
    parser.add_argument("--fetch", action="store_true", help="download real archives")
    parser.add_argument("--n-train", type=int, default=12_000)
    parser.add_argument("--n-test", type=int, default=3_000)
    args = parser.parse_args()
    for name in args.dataset or ("digits", "fashion"):
        if args.fetch:
            try:
                fetch_dataset(args.data_dir, name)
                print(f"{name}: fetched canonical archives")
                continue
            except DataError as e:
                print(f"{name}: fetch failed ({e}); falling back to synthetic")
        base = make_synthetic_idx(args.data_dir, name, args.n_train, args.n_test)
        print(f"{name}: synthetic IDX files in {base}")


if __name__ == "__main__":
    main()
