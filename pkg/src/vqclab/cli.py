"""Command-line experiment runner.

Subcommands: ``prepare`` (dataset + feature cache), ``run`` (one training
run plus evaluation), ``sweep`` (the full experiment grid with aggregated
tables), ``export`` (visualization data from a saved model).

Exit codes: 0 success, 1 usage error, 2 data error, 3 run failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, fields
from pathlib import Path

import numpy as np

from . import evaluate, synth
from .data import DataError, fetch_dataset, sample_class_pairs
from .sweep import FeatureCache, SweepConfig, derive_seed, run_sweep
from .train import TrainConfig, TrainingDivergedError, load_model, save_model, train

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_RUN = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        raise UsageError(message)


def _parse_pair(text: str) -> tuple[int, int]:
    try:
        a, b = (int(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"--pair expects 'a,b' with two class indices, got {text!r}")
    if not (0 <= a <= 9 and 0 <= b <= 9 and a != b):
        raise UsageError(f"--pair classes must be distinct digits 0-9, got {text!r}")
    return a, b


def build_parser() -> _Parser:
    parser = _Parser(prog="vqclab", description=__doc__.splitlines()[0])
    parser.add_argument("--data-dir", default="data", help="dataset root directory")
    parser.add_argument("--out-dir", default="results", help="output root directory")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="fetch or synthesize datasets and warm the feature cache")
    p.add_argument("--dataset", action="append", choices=("digits", "fashion"),
                   help="dataset(s) to prepare (repeatable; default both)")
    source = p.add_mutually_exclusive_group()
    source.add_argument("--fetch", action="store_true", help="download the canonical archives")
    source.add_argument("--synthetic", action="store_true",
                        help="generate offline stand-in data in IDX format")
    p.add_argument("--pair", action="append", help="class pair 'a,b' to featurize (repeatable)")
    p.add_argument("--n-pairs", type=int, default=5, help="random pairs when --pair not given")
    p.add_argument("--seed", type=int, default=0, help="master seed for pair selection")
    p.add_argument("--subsample", type=int, default=None, help="training subsample size")
    p.add_argument("--test-subsample", type=int, default=None, help="test subsample size")

    p = sub.add_parser("run", help="train one model and evaluate it")
    p.add_argument("--dataset", default="digits", choices=("digits", "fashion"))
    p.add_argument("--pair", required=True, help="class pair 'a,b'")
    p.add_argument("--conv", default="CNN8", choices=("CNN7", "CNN8", "CNN9"))
    p.add_argument("--direction", default="forward", choices=("forward", "reversed"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--batch", type=int, default=25)
    p.add_argument("--learning-rate", type=float, default=0.05)
    p.add_argument("--subsample", type=int, default=None)
    p.add_argument("--test-subsample", type=int, default=None)
    p.add_argument("--export-histogram", action="store_true")
    p.add_argument("--export-receptive-field", action="store_true")

    p = sub.add_parser("sweep", help="run the experiment grid and aggregate tables")
    p.add_argument("--config", default=None, help="key=value sweep config file")
    p.add_argument("--dataset", action="append", choices=("digits", "fashion"))
    p.add_argument("--conv", action="append", choices=("CNN7", "CNN8", "CNN9"))
    p.add_argument("--direction", action="append", choices=("forward", "reversed"))
    p.add_argument("--n-pairs", type=int, default=None)
    p.add_argument("--repeats", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--batch", type=int, default=None)
    p.add_argument("--learning-rate", type=float, default=None)
    p.add_argument("--subsample", type=int, default=None)
    p.add_argument("--test-subsample", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--shared-pairs", action="store_true",
                   help="use one pair draw for all unitaries instead of redrawing")

    p = sub.add_parser("export", help="export plotting data from a saved model")
    p.add_argument("--model", required=True, help="path to a saved model.json")
    p.add_argument("--dataset", default="digits", choices=("digits", "fashion"))
    p.add_argument("--pair", required=True, help="class pair 'a,b'")
    p.add_argument("--subsample", type=int, default=None)
    p.add_argument("--test-subsample", type=int, default=None)
    p.add_argument("--seed", type=int, default=0, help="subsample seed used at prepare time")
    p.add_argument("--export-histogram", action="store_true")
    p.add_argument("--export-receptive-field", action="store_true")
    return parser


# ---------------------------------------------------------------------------
# Sweep config file: one `key = value` per line, '#' comments, lists
# comma-separated.  Flags override file values, which override defaults.

_LIST_KEYS = {"datasets", "conv_kinds", "directions"}
_INT_KEYS = {"n_pairs", "repeats", "train_subsample", "test_subsample",
             "master_seed", "n_steps", "batch_size", "workers"}
_FLOAT_KEYS = {"learning_rate"}
_BOOL_KEYS = {"redraw_pairs_per_unitary"}


def parse_sweep_file(path) -> dict:
    values: dict = {}
    known = {f.name for f in fields(SweepConfig)}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in known:
            raise UsageError(f"{path}:{lineno}: unknown sweep key {key!r}")
        if key in _LIST_KEYS:
            values[key] = tuple(v.strip() for v in raw.split(",") if v.strip())
        elif key in _INT_KEYS:
            values[key] = None if raw.lower() == "none" else int(raw)
        elif key in _FLOAT_KEYS:
            values[key] = float(raw)
        elif key in _BOOL_KEYS:
            values[key] = raw.lower() in ("1", "true", "yes", "on")
        else:
            values[key] = raw
    return values


def sweep_config_from_args(args) -> SweepConfig:
    values = parse_sweep_file(args.config) if args.config else {}
    overrides = {
        "datasets": tuple(args.dataset) if args.dataset else None,
        "conv_kinds": tuple(args.conv) if args.conv else None,
        "directions": tuple(args.direction) if args.direction else None,
        "n_pairs": args.n_pairs,
        "repeats": args.repeats,
        "master_seed": args.seed,
        "n_steps": args.steps,
        "batch_size": args.batch,
        "learning_rate": args.learning_rate,
        "train_subsample": args.subsample,
        "test_subsample": args.test_subsample,
        "workers": args.workers,
    }
    for key, value in overrides.items():
        if value is not None:
            values[key] = value
    if args.shared_pairs:
        values["redraw_pairs_per_unitary"] = False
    try:
        return SweepConfig(**values)
    except (TypeError, ValueError) as e:
        raise UsageError(str(e))


# ---------------------------------------------------------------------------
# Subcommand bodies.


def cmd_prepare(args) -> int:
    datasets = args.dataset or ["digits", "fashion"]
    for name in datasets:
        if args.fetch:
            print(f"fetching {name} ...")
            fetch_dataset(args.data_dir, name)
        elif args.synthetic:
            print(f"synthesizing {name} ...")
            synth.make_synthetic_idx(args.data_dir, name)
        cache = FeatureCache(args.data_dir, Path(args.out_dir) / "features")
        if args.pair:
            pairs = [_parse_pair(p) for p in args.pair]
        else:
            rng = np.random.default_rng(derive_seed(args.seed, "pairs", name, "prepare"))
            pairs = sample_class_pairs(rng, args.n_pairs)
        for pair in pairs:
            _, _, hit = cache.get(name, pair, args.subsample, args.test_subsample,
                                  derive_seed(args.seed, "subsample", name, pair))
            print(f"  {name} pair {pair}: {'cache hit' if hit else 'featurized'}")
    return EXIT_OK


def cmd_run(args) -> int:
    pair = _parse_pair(args.pair)
    cache = FeatureCache(args.data_dir, Path(args.out_dir) / "features")
    fs_train, fs_test, _ = cache.get(
        args.dataset, pair, args.subsample, args.test_subsample,
        derive_seed(args.seed, "subsample", args.dataset, pair),
    )
    config = TrainConfig(
        direction=args.direction,
        conv_kind=args.conv,
        learning_rate=args.learning_rate,
        batch_size=args.batch,
        n_steps=args.steps,
        seed=args.seed,
    )
    model = train(config, fs_train)
    report = evaluate.evaluate(model, fs_test, sample_seed=derive_seed(args.seed, "shot"))
    tag = f"{args.dataset}-{pair[0]}{pair[1]}-{args.conv}-{args.direction}-s{args.seed}"
    run_dir = Path(args.out_dir) / "single" / tag
    run_dir.mkdir(parents=True, exist_ok=True)
    save_model(model, run_dir / "model.json")
    evaluate.report_to_json(report, run_dir / "report.json")
    evaluate.report_to_csv(report, run_dir / "report.csv")
    _maybe_export(args, model, fs_test, run_dir)
    print(f"run {tag}: sampling={report.sampling_accuracy:.4f} "
          f"expectation={report.expectation_accuracy:.4f}")
    print(f"artifacts in {run_dir}")
    return EXIT_OK


def _maybe_export(args, model, fs_test, run_dir: Path) -> None:
    if getattr(args, "export_histogram", False):
        hist = evaluate.expectation_histogram(model, fs_test)
        evaluate.histogram_to_csv(hist, run_dir / "histogram.csv")
        print(f"histogram -> {run_dir / 'histogram.csv'}")
    if getattr(args, "export_receptive_field", False):
        rf = evaluate.reversal_distances(model, fs_test)
        evaluate.receptive_field_to_csv(
            rf, run_dir / "centers.csv", run_dir / "distances.csv"
        )
        print(f"receptive field -> {run_dir / 'centers.csv'}, {run_dir / 'distances.csv'}")


def cmd_sweep(args) -> int:
    config = sweep_config_from_args(args)
    (Path(args.out_dir)).mkdir(parents=True, exist_ok=True)
    (Path(args.out_dir) / "sweep-config.json").write_text(json.dumps(asdict(config), indent=1))
    outcome = run_sweep(config, args.data_dir, args.out_dir)
    print(f"rows: {len(outcome['rows'])}, failures: {len(outcome['failures'])}")
    print(f"tables in {Path(args.out_dir) / 'tables.csv'}")
    return EXIT_RUN if outcome["failures"] else EXIT_OK


def cmd_export(args) -> int:
    model = load_model(args.model)
    pair = _parse_pair(args.pair)
    cache = FeatureCache(args.data_dir, Path(args.out_dir) / "features")
    _, fs_test, _ = cache.get(
        args.dataset, pair, args.subsample, args.test_subsample,
        derive_seed(args.seed, "subsample", args.dataset, pair),
    )
    out_dir = Path(args.out_dir) / "export"
    out_dir.mkdir(parents=True, exist_ok=True)
    if not args.export_histogram and not args.export_receptive_field:
        raise UsageError("export: pass --export-histogram and/or --export-receptive-field")
    _maybe_export(args, model, fs_test, out_dir)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        handler = {
            "prepare": cmd_prepare,
            "run": cmd_run,
            "sweep": cmd_sweep,
            "export": cmd_export,
        }[args.command]
        return handler(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except (TrainingDivergedError, RuntimeError, ValueError) as e:
        print(f"run failure: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUN


if __name__ == "__main__":
    sys.exit(main())
