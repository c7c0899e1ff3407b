"""Dataset ingestion (IDX files), PCA-16 features normalized to [0, pi],
and random binary class-pair subset construction."""
from __future__ import annotations

import csv
import gzip
import hashlib
import struct
import urllib.request
from dataclasses import dataclass
from pathlib import Path

import numpy as np

IDX_IMAGE_MAGIC = 0x00000803
IDX_LABEL_MAGIC = 0x00000801
IMAGE_SHAPE = (28, 28)


class DataError(Exception):
    """Base class for dataset problems."""


class IdxMagicError(DataError):
    pass


class IdxTruncatedError(DataError):
    pass


class IdxCountMismatchError(DataError):
    pass


@dataclass(frozen=True)
class RawDataset:
    images: np.ndarray  # (N, 28, 28) uint8
    labels: np.ndarray  # (N,) int64
    split: str

    def __len__(self) -> int:
        return len(self.labels)


def _open_maybe_gz(path):
    path = Path(path)
    return gzip.open(path, "rb") if path.suffix == ".gz" else open(path, "rb")


def _read_exact(f, nbytes: int, path) -> bytes:
    data = f.read(nbytes)
    if len(data) != nbytes:
        raise IdxTruncatedError(f"{path}: expected {nbytes} more bytes, got {len(data)}")
    return data


def load_idx(images_path, labels_path, split: str = "train") -> RawDataset:
    """Decode a big-endian IDX image/label file pair (gzipped or raw)."""
    with _open_maybe_gz(images_path) as f:
        magic, count, rows, cols = struct.unpack(">IIII", _read_exact(f, 16, images_path))
        if magic != IDX_IMAGE_MAGIC:
            raise IdxMagicError(f"{images_path}: image magic {magic:#010x}, expected {IDX_IMAGE_MAGIC:#010x}")
        if (rows, cols) != IMAGE_SHAPE:
            raise DataError(f"{images_path}: {rows}x{cols} images, expected 28x28")
        raw = _read_exact(f, count * rows * cols, images_path)
        images = np.frombuffer(raw, dtype=np.uint8).reshape(count, rows, cols)
    with _open_maybe_gz(labels_path) as f:
        magic, label_count = struct.unpack(">II", _read_exact(f, 8, labels_path))
        if magic != IDX_LABEL_MAGIC:
            raise IdxMagicError(f"{labels_path}: label magic {magic:#010x}, expected {IDX_LABEL_MAGIC:#010x}")
        if label_count != count:
            raise IdxCountMismatchError(f"{label_count} labels for {count} images")
        labels = np.frombuffer(_read_exact(f, label_count, labels_path), dtype=np.uint8)
    return RawDataset(images, labels.astype(np.int64), split)


def write_idx(images: np.ndarray, labels: np.ndarray, images_path, labels_path) -> None:
    """Inverse of load_idx (gzipped when the path ends in .gz)."""
    images = np.asarray(images, dtype=np.uint8)
    labels = np.asarray(labels, dtype=np.uint8)
    n, rows, cols = images.shape
    with _open_maybe_gz_w(images_path) as f:
        f.write(struct.pack(">IIII", IDX_IMAGE_MAGIC, n, rows, cols))
        f.write(images.tobytes())
    with _open_maybe_gz_w(labels_path) as f:
        f.write(struct.pack(">II", IDX_LABEL_MAGIC, len(labels)))
        f.write(labels.tobytes())


def _open_maybe_gz_w(path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return gzip.open(path, "wb") if path.suffix == ".gz" else open(path, "wb")


# ---------------------------------------------------------------------------
# Canonical archives.

IDX_FILES = {
    "train": ("train-images-idx3-ubyte.gz", "train-labels-idx1-ubyte.gz"),
    "test": ("t10k-images-idx3-ubyte.gz", "t10k-labels-idx1-ubyte.gz"),
}

#: Download bases plus per-file MD5 checksums of the published archives.
DATASET_SOURCES = {
    "digits": {
        "mirrors": (
            "https://ossci-datasets.s3.amazonaws.com/mnist/",
            "http://yann.lecun.com/exdb/mnist/",
        ),
        "md5": {
            "train-images-idx3-ubyte.gz": "f68b3c2dcbeaaa9fbdd348bbdeb94873",
            "train-labels-idx1-ubyte.gz": "d53e105ee54ea40749a09fcbcd1e9432",
            "t10k-images-idx3-ubyte.gz": "9fb629c4189551a2d022fa330f9573f3",
            "t10k-labels-idx1-ubyte.gz": "ec29112dd5afa0611ce80d1b7f02629c",
        },
    },
    "fashion": {
        "mirrors": ("http://fashion-mnist.s3-website.eu-central-1.amazonaws.com/",),
        "md5": {
            "train-images-idx3-ubyte.gz": "8d4fb7e6c68d591d4c3dfef9ec88bf0d",
            "train-labels-idx1-ubyte.gz": "25c81989df183df01b3e8a0aad5dffbe",
            "t10k-images-idx3-ubyte.gz": "bef4ecab320f06d8554ea6380940ec79",
            "t10k-labels-idx1-ubyte.gz": "bb300cfdad3c16e7a12a480ee83cd310",
        },
    },
}


def dataset_dir(data_dir, name: str) -> Path:
    return Path(data_dir) / name


def dataset_paths(data_dir, name: str, split: str) -> tuple[Path, Path]:
    base = dataset_dir(data_dir, name)
    images, labels = IDX_FILES[split]
    pair = (base / images, base / labels)
    if not pair[0].exists() and pair[0].with_suffix("").exists():
        pair = (pair[0].with_suffix(""), pair[1].with_suffix(""))
    return pair


def _md5(path) -> str:
    h = hashlib.md5()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def fetch_dataset(data_dir, name: str, checksums: dict[str, str] | None = None) -> None:
    """Download the canonical archives for a dataset and verify checksums.

    Files already present with a matching checksum are kept.
    """
    if name not in DATASET_SOURCES:
        raise DataError(f"unknown dataset {name!r} (have {tuple(DATASET_SOURCES)})")
    source = DATASET_SOURCES[name]
    checksums = checksums or source["md5"]
    base = dataset_dir(data_dir, name)
    base.mkdir(parents=True, exist_ok=True)
    for filename, want in checksums.items():
        dest = base / filename
        if dest.exists() and _md5(dest) == want:
            continue
        last_err: Exception | None = None
        for mirror in source["mirrors"]:
            try:
                urllib.request.urlretrieve(mirror + filename, dest)
                last_err = None
                break
            except OSError as e:  # includes URLError
                last_err = e
        if last_err is not None:
            raise DataError(f"could not download {filename}: {last_err}")
        got = _md5(dest)
        if got != want:
            dest.unlink(missing_ok=True)
            raise DataError(f"{filename}: checksum {got} != expected {want}")


def load_dataset(data_dir, name: str, split: str) -> RawDataset:
    images_path, labels_path = dataset_paths(data_dir, name, split)
    if not images_path.exists() or not labels_path.exists():
        raise DataError(
            f"{name} {split} files not found under {dataset_dir(data_dir, name)}; "
            "run 'vqclab prepare' with --fetch or --synthetic first"
        )
    return load_idx(images_path, labels_path, split)


# ---------------------------------------------------------------------------
# PCA features.


@dataclass(frozen=True)
class PcaModel:
    """Top-k principal components of a pair-filtered training split, plus the
    per-feature projection ranges used for min-max normalization."""

    mean: np.ndarray             # (784,)
    components: np.ndarray       # (k, 784), rows orthonormal
    per_feature_min: np.ndarray  # (k,)
    per_feature_max: np.ndarray  # (k,)
    explained_variance: np.ndarray  # (k,), non-increasing

    @property
    def n_features(self) -> int:
        return len(self.components)


@dataclass(frozen=True)
class FeatureSet:
    features: np.ndarray  # (N, k), every entry in [0, pi]
    labels: np.ndarray    # (N,) in {0, 1}
    class_pair: tuple[int, int]

    def __len__(self) -> int:
        return len(self.labels)


def _select_pair(dataset: RawDataset, pair: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
    a, b = pair
    if a == b:
        raise DataError(f"class pair must be distinct, got {pair}")
    mask = (dataset.labels == a) | (dataset.labels == b)
    images = dataset.images[mask].reshape(-1, IMAGE_SHAPE[0] * IMAGE_SHAPE[1])
    labels = np.where(dataset.labels[mask] == a, 0, 1)
    return images.astype(np.float64) / 255.0, labels


def fit_pca(train: RawDataset, pair: tuple[int, int], k: int = 16) -> PcaModel:
    """Principal components of the pair-filtered training images.

    Component signs follow a deterministic convention (largest-magnitude
    entry positive) so repeated fits are bit-identical.
    """
    xs, _ = _select_pair(train, pair)
    if len(xs) < k:
        raise DataError(f"need at least {k} samples for {k} components, got {len(xs)}")
    mean = xs.mean(axis=0)
    centered = xs - mean
    _, svals, vt = np.linalg.svd(centered, full_matrices=False)
    if svals[0] <= 0.0 or svals[k - 1] <= svals[0] * 1e-12:
        raise DataError(f"degenerate spectrum: fewer than {k} informative directions")
    components = vt[:k].copy()
    for row in components:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    projections = centered @ components.T
    lo, hi = projections.min(axis=0), projections.max(axis=0)
    if np.any(hi - lo <= 0.0):
        raise DataError("zero-variance feature in training projections")
    explained = (svals[:k] ** 2) / (len(xs) - 1)
    return PcaModel(mean, components, lo, hi, explained)


def featurize(model: PcaModel, dataset: RawDataset, pair: tuple[int, int]) -> FeatureSet:
    """Project onto the components, min-max normalize with the training
    ranges (clamping overshoot), and scale to [0, pi]."""
    xs, labels = _select_pair(dataset, pair)
    projections = (xs - model.mean) @ model.components.T
    span = model.per_feature_max - model.per_feature_min
    unit = (projections - model.per_feature_min) / span
    features = np.pi * np.clip(unit, 0.0, 1.0)
    return FeatureSet(features, labels, tuple(pair))


def sample_class_pairs(rng: np.random.Generator, n_pairs: int = 5) -> list[tuple[int, int]]:
    """Disjoint random class pairs: a uniform perfect matching of {0..9}."""
    if not 1 <= n_pairs <= 5:
        raise ValueError(f"n_pairs must be in [1, 5], got {n_pairs}")
    order = rng.permutation(10)
    return [(int(order[2 * i]), int(order[2 * i + 1])) for i in range(n_pairs)]


def subsample(dataset: RawDataset, n: int | None, rng: np.random.Generator) -> RawDataset:
    """Random subset without replacement, preserving the original order."""
    if n is None or n >= len(dataset):
        return dataset
    keep = np.sort(rng.choice(len(dataset), size=n, replace=False))
    return RawDataset(dataset.images[keep], dataset.labels[keep], dataset.split)


def export_features_csv(feature_set: FeatureSet, path) -> None:
    k = feature_set.features.shape[1]
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow([f"f{i}" for i in range(k)] + ["label"])
        for row, label in zip(feature_set.features, feature_set.labels):
            writer.writerow([repr(float(v)) for v in row] + [int(label)])
