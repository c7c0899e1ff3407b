"""Experiment sweep harness: feature caching, seeded run scheduling,
resumable content-addressed results, and table aggregation.

A sweep executes |datasets| x |conv kinds| x |directions| x pairs x repeats
training runs.  Every run's seed derives deterministically from the master
seed and the run's coordinates, so a sweep is bit-reproducible and can be
resumed after interruption: a finished run leaves its report on disk under
a directory named by the hash of its configuration, and is skipped on the
next invocation.
"""
from __future__ import annotations

import csv
import hashlib
import json
import os
import zipfile
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import evaluate
from .data import FeatureSet, featurize, fit_pca, load_dataset, sample_class_pairs, subsample
from .train import TrainConfig, save_model, train

DATASET_NAMES = ("digits", "fashion")


@dataclass(frozen=True)
class SweepConfig:
    datasets: tuple[str, ...] = ("digits", "fashion")
    conv_kinds: tuple[str, ...] = ("CNN7", "CNN8", "CNN9")
    directions: tuple[str, ...] = ("forward", "reversed")
    n_pairs: int = 5
    repeats: int = 3
    train_subsample: int | None = None
    test_subsample: int | None = None
    master_seed: int = 0
    n_steps: int = 200
    batch_size: int = 25
    learning_rate: float = 0.05
    workers: int = 1
    redraw_pairs_per_unitary: bool = True

    def __post_init__(self):
        if not self.datasets or not self.conv_kinds or not self.directions:
            raise ValueError("datasets, conv_kinds, and directions must be non-empty")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        for name in self.datasets:
            if name not in DATASET_NAMES:
                raise ValueError(f"unknown dataset {name!r}")


@dataclass(frozen=True)
class RunSpec:
    dataset: str
    pair: tuple[int, int]
    conv_kind: str
    direction: str
    repeat: int
    seed: int
    n_steps: int
    batch_size: int
    learning_rate: float
    train_subsample: int | None
    test_subsample: int | None
    subsample_seed: int


def derive_seed(master_seed: int, *tags) -> int:
    """Stable 32-bit seed from the master seed and a tag path."""
    entropy = [int(master_seed) & 0xFFFFFFFF]
    for tag in tags:
        entropy.append(zlib.crc32(str(tag).encode()))
    return int(np.random.SeedSequence(entropy).generate_state(1)[0])


def run_hash(spec: RunSpec) -> str:
    payload = json.dumps(asdict(spec), sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()[:12]


# ---------------------------------------------------------------------------
# Feature cache: PCA + featurization per (dataset, pair, subsampling).


class FeatureCache:
    """Disk-backed features keyed by dataset, pair, and subsampling; entries
    carry a content hash so corruption is detected and recomputed."""

    def __init__(self, data_dir, cache_dir):
        self.data_dir = Path(data_dir)
        self.cache_dir = Path(cache_dir)
        self._datasets: dict[tuple[str, str], object] = {}

    def _raw(self, dataset: str, split: str):
        key = (dataset, split)
        if key not in self._datasets:
            self._datasets[key] = load_dataset(self.data_dir, dataset, split)
        return self._datasets[key]

    def _key(self, dataset, pair, train_subsample, test_subsample, subsample_seed) -> str:
        tag = f"{dataset}-{pair[0]}-{pair[1]}-tr{train_subsample}-te{test_subsample}-s{subsample_seed}"
        return tag

    def entry_path(self, *key_parts) -> Path:
        return self.cache_dir / (self._key(*key_parts) + ".npz")

    def get(self, dataset, pair, train_subsample=None, test_subsample=None,
            subsample_seed=0) -> tuple[FeatureSet, FeatureSet, bool]:
        """(train features, test features, cache_hit)."""
        path = self.entry_path(dataset, pair, train_subsample, test_subsample, subsample_seed)
        cached = self._load(path, pair)
        if cached is not None:
            return cached + (True,)
        train_raw = self._raw(dataset, "train")
        test_raw = self._raw(dataset, "test")
        rng = np.random.default_rng(subsample_seed)
        train_raw = subsample(train_raw, train_subsample, rng)
        test_raw = subsample(test_raw, test_subsample, rng)
        pca = fit_pca(train_raw, pair)
        fs_train = featurize(pca, train_raw, pair)
        fs_test = featurize(pca, test_raw, pair)
        self._store(path, fs_train, fs_test)
        return fs_train, fs_test, False

    @staticmethod
    def _digest(arrays: dict[str, np.ndarray]) -> str:
        h = hashlib.sha256()
        for name in sorted(arrays):
            h.update(name.encode())
            h.update(np.ascontiguousarray(arrays[name]).tobytes())
        return h.hexdigest()

    def _store(self, path: Path, fs_train: FeatureSet, fs_test: FeatureSet) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        arrays = {
            "train_features": fs_train.features,
            "train_labels": fs_train.labels,
            "test_features": fs_test.features,
            "test_labels": fs_test.labels,
        }
        digest = self._digest(arrays)
        tmp = path.with_suffix(".tmp.npz")
        np.savez(tmp, pair=np.array(fs_train.class_pair), digest=np.bytes_(digest), **arrays)
        os.replace(tmp, path)

    def _load(self, path: Path, pair):
        if not path.exists():
            return None
        try:
            with np.load(path) as z:
                arrays = {k: z[k] for k in
                          ("train_features", "train_labels", "test_features", "test_labels")}
                stored = z["digest"].item()
                if isinstance(stored, bytes):
                    stored = stored.decode()
        except (OSError, KeyError, ValueError, zlib.error, zipfile.BadZipFile):
            path.unlink(missing_ok=True)
            return None
        if self._digest(arrays) != stored:
            path.unlink(missing_ok=True)
            return None
        pair = tuple(pair)
        return (
            FeatureSet(arrays["train_features"], arrays["train_labels"], pair),
            FeatureSet(arrays["test_features"], arrays["test_labels"], pair),
        )


# ---------------------------------------------------------------------------
# Single runs.


def run_spec_list(config: SweepConfig) -> list[RunSpec]:
    specs = []
    for dataset in config.datasets:
        for kind in config.conv_kinds:
            pair_tag = kind if config.redraw_pairs_per_unitary else "shared"
            pair_rng = np.random.default_rng(derive_seed(config.master_seed, "pairs", dataset, pair_tag))
            pairs = sample_class_pairs(pair_rng, config.n_pairs)
            for direction in config.directions:
                for pair in pairs:
                    for repeat in range(config.repeats):
                        seed = derive_seed(
                            config.master_seed, "run", dataset, kind, direction, pair, repeat
                        )
                        specs.append(
                            RunSpec(
                                dataset=dataset,
                                pair=pair,
                                conv_kind=kind,
                                direction=direction,
                                repeat=repeat,
                                seed=seed,
                                n_steps=config.n_steps,
                                batch_size=config.batch_size,
                                learning_rate=config.learning_rate,
                                train_subsample=config.train_subsample,
                                test_subsample=config.test_subsample,
                                subsample_seed=derive_seed(config.master_seed, "subsample", dataset, pair),
                            )
                        )
    return specs


def execute_run(spec: RunSpec, data_dir, out_dir) -> dict:
    """Train + evaluate one run; idempotent via its content-addressed dir."""
    out_dir = Path(out_dir)
    run_dir = out_dir / "runs" / run_hash(spec)
    report_path = run_dir / "report.json"
    if report_path.exists():
        report = evaluate.report_from_json(report_path)
        return _row(spec, report, cached=True)
    cache = FeatureCache(data_dir, out_dir / "features")
    fs_train, fs_test, _ = cache.get(
        spec.dataset, spec.pair, spec.train_subsample, spec.test_subsample, spec.subsample_seed
    )
    config = TrainConfig(
        direction=spec.direction,
        conv_kind=spec.conv_kind,
        learning_rate=spec.learning_rate,
        batch_size=spec.batch_size,
        n_steps=spec.n_steps,
        seed=spec.seed,
    )
    model = train(config, fs_train)
    report = evaluate.evaluate(model, fs_test, sample_seed=derive_seed(spec.seed, "shot"))
    run_dir.mkdir(parents=True, exist_ok=True)
    (run_dir / "config.json").write_text(json.dumps(asdict(spec), indent=1))
    save_model(model, run_dir / "model.json")
    evaluate.report_to_json(report, report_path)
    return _row(spec, report, cached=False)


def _row(spec: RunSpec, report: evaluate.EvalReport, cached: bool) -> dict:
    return {
        "dataset": spec.dataset,
        "conv_kind": spec.conv_kind,
        "direction": spec.direction,
        "pair": f"{spec.pair[0]},{spec.pair[1]}",
        "repeat": spec.repeat,
        "seed": spec.seed,
        "sampling_accuracy": report.sampling_accuracy,
        "expectation_accuracy": report.expectation_accuracy,
        "run_id": run_hash(spec),
        "cached": cached,
    }


def _execute_for_pool(args):
    spec, data_dir, out_dir = args
    try:
        return execute_run(spec, data_dir, out_dir), None
    except Exception as e:  # collected into the partial-failure report
        return None, f"{run_hash(spec)}: {type(e).__name__}: {e}"


# ---------------------------------------------------------------------------
# The sweep driver and its output tables.

ROW_COLUMNS = (
    "dataset", "conv_kind", "direction", "pair", "repeat", "seed",
    "sampling_accuracy", "expectation_accuracy", "run_id",
)


def run_sweep(config: SweepConfig, data_dir, out_dir, log=print) -> dict:
    """Execute all runs (resuming finished ones), write tables, and return
    {"rows": [...], "failures": [...]}."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    specs = run_spec_list(config)
    log(f"sweep: {len(specs)} runs ({config.workers} worker(s))")
    rows, failures = [], []
    tasks = [(spec, str(data_dir), str(out_dir)) for spec in specs]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            outcomes = list(pool.map(_execute_for_pool, tasks))
    else:
        outcomes = [_execute_for_pool(t) for t in tasks]
    for (row, failure), spec in zip(outcomes, specs):
        if failure is not None:
            failures.append(failure)
            log(f"  FAILED {failure}")
        else:
            rows.append(row)
            tag = "cached" if row["cached"] else "done"
            log(
                f"  {tag} {row['dataset']} {row['conv_kind']} {row['direction']:8s} "
                f"pair {row['pair']} rep {row['repeat']}: "
                f"samp={row['sampling_accuracy']:.4f} exp={row['expectation_accuracy']:.4f}"
            )
    write_rows_csv(rows, out_dir / "rows.csv")
    write_appendix_csv(rows, out_dir / "appendix.csv")
    write_tables_csv(rows, out_dir / "tables.csv")
    if failures:
        (out_dir / "failures.txt").write_text("\n".join(failures) + "\n")
    return {"rows": rows, "failures": failures}


def write_rows_csv(rows: list[dict], path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(ROW_COLUMNS)
        for row in rows:
            writer.writerow([row[c] for c in ROW_COLUMNS])


def read_rows_csv(path) -> list[dict]:
    with open(path, newline="") as f:
        rows = []
        for record in csv.DictReader(f):
            record["repeat"] = int(record["repeat"])
            record["seed"] = int(record["seed"])
            record["sampling_accuracy"] = float(record["sampling_accuracy"])
            record["expectation_accuracy"] = float(record["expectation_accuracy"])
            rows.append(record)
        return rows


def _stats(values) -> tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    return float(arr.mean()), float(arr.std(ddof=1)) if len(arr) > 1 else 0.0


def write_appendix_csv(rows: list[dict], path) -> None:
    """Per (dataset, kind, direction, pair): mean +- std over repeats."""
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        groups.setdefault(
            (row["dataset"], row["conv_kind"], row["direction"], row["pair"]), []
        ).append(row)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(
            ["dataset", "test", "digits", "sample_acc_mean", "sample_acc_std",
             "expval_acc_mean", "expval_acc_std"]
        )
        for (dataset, kind, direction, pair), group in sorted(groups.items()):
            label = "Reversed" if direction == "reversed" else "Standard"
            samp_mean, samp_std = _stats([r["sampling_accuracy"] for r in group])
            exp_mean, exp_std = _stats([r["expectation_accuracy"] for r in group])
            writer.writerow(
                [dataset, f"{kind} {label}", pair.replace(",", ", "),
                 f"{samp_mean:.6f}", f"{samp_std:.6f}", f"{exp_mean:.6f}", f"{exp_std:.6f}"]
            )


def write_tables_csv(rows: list[dict], path) -> None:
    """Per (dataset, kind, direction): mean +- std over all models."""
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        groups.setdefault((row["dataset"], row["conv_kind"], row["direction"]), []).append(row)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(
            ["dataset", "conv_kind", "direction", "n_models",
             "sample_acc_mean", "sample_acc_std", "expval_acc_mean", "expval_acc_std"]
        )
        for (dataset, kind, direction), group in sorted(groups.items()):
            samp_mean, samp_std = _stats([r["sampling_accuracy"] for r in group])
            exp_mean, exp_std = _stats([r["expectation_accuracy"] for r in group])
            writer.writerow(
                [dataset, kind, direction, len(group),
                 f"{samp_mean:.6f}", f"{samp_std:.6f}", f"{exp_mean:.6f}", f"{exp_std:.6f}"]
            )
