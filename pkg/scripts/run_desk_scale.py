#!/usr/bin/env python3
"""Desk-scale replication: the CNN8/CNN9 forward-vs-reversed grid on a
2000/500 subsample, two pairs, two seeds per cell, with the aggregated
accuracy table and the distribution/receptive-field shape checks printed
at the end.  Uses the sweep harness end to end, so results land in the
same resumable layout as `vqclab sweep`.
"""
import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

import numpy as np

from vqclab.sweep import SweepConfig, run_sweep
from vqclab.synth import make_synthetic_idx


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--data-dir", default="data")
    parser.add_argument("--out-dir", default="results/desk-scale")
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--steps", type=int, default=250)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--synthetic", action="store_true",
                        help="generate stand-in data if the archives are absent")
    args = parser.parse_args()

    if args.synthetic:
        make_synthetic_idx(args.data_dir, "digits")

    config = SweepConfig(
        datasets=("digits",),
        conv_kinds=("CNN8", "CNN9"),
        directions=("forward", "reversed"),
        n_pairs=2,
        repeats=2,
        train_subsample=2000,
        test_subsample=500,
        master_seed=args.seed,
        n_steps=args.steps,
        batch_size=25,
        learning_rate=0.05,
        workers=args.workers,
        redraw_pairs_per_unitary=False,
    )
    outcome = run_sweep(config, args.data_dir, args.out_dir)
    rows = outcome["rows"]
    print("\n--- cells (mean over pairs x seeds) ---")
    for kind in config.conv_kinds:
        for direction in config.directions:
            cell = [r for r in rows if r["conv_kind"] == kind and r["direction"] == direction]
            samp = np.mean([r["sampling_accuracy"] for r in cell])
            expv = np.mean([r["expectation_accuracy"] for r in cell])
            print(f"{kind} {direction:8s}: sampling {samp:.3f}  expectation {expv:.3f}")
    for kind in config.conv_kinds:
        fwd = np.mean([r["sampling_accuracy"] for r in rows
                       if r["conv_kind"] == kind and r["direction"] == "forward"])
        rev = np.mean([r["sampling_accuracy"] for r in rows
                       if r["conv_kind"] == kind and r["direction"] == "reversed"])
        print(f"{kind}: reversed - forward single-shot gain = {100 * (rev - fwd):+.1f} pp")
    return 0 if not outcome["failures"] else 3


if __name__ == "__main__":
    sys.exit(main())
