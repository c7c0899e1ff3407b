"""IDX ingestion, PCA features, pair sampling, CSV export."""
import gzip
import struct

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vqclab import synth
from vqclab.data import (
    DataError,
    IdxCountMismatchError,
    IdxMagicError,
    IdxTruncatedError,
    RawDataset,
    export_features_csv,
    featurize,
    fit_pca,
    load_dataset,
    load_idx,
    sample_class_pairs,
    subsample,
    write_idx,
)

RNG = np.random.default_rng(99)


def tiny_dataset(n=40, seed=0):
    rng = np.random.default_rng(seed)
    images = rng.integers(0, 256, size=(n, 28, 28), dtype=np.uint8)
    labels = rng.integers(0, 10, size=n).astype(np.int64)
    return images, labels


class TestIdxRoundTrip:
    @pytest.mark.parametrize("suffix", ["", ".gz"])
    def test_write_then_load(self, tmp_path, suffix):
        images, labels = tiny_dataset()
        ip = tmp_path / f"images-idx3-ubyte{suffix}"
        lp = tmp_path / f"labels-idx1-ubyte{suffix}"
        write_idx(images, labels, ip, lp)
        loaded = load_idx(ip, lp, split="train")
        assert np.array_equal(loaded.images, images)
        assert np.array_equal(loaded.labels, labels)
        assert loaded.split == "train"

    def test_swapped_paths_magic_mismatch(self, tmp_path):
        images, labels = tiny_dataset()
        ip, lp = tmp_path / "i", tmp_path / "l"
        write_idx(images, labels, ip, lp)
        with pytest.raises(IdxMagicError):
            load_idx(lp, ip)

    def test_truncated_file(self, tmp_path):
        images, labels = tiny_dataset()
        ip, lp = tmp_path / "i", tmp_path / "l"
        write_idx(images, labels, ip, lp)
        data = ip.read_bytes()
        ip.write_bytes(data[: len(data) // 2])
        with pytest.raises(IdxTruncatedError):
            load_idx(ip, lp)

    def test_count_mismatch(self, tmp_path):
        images, labels = tiny_dataset()
        ip, lp = tmp_path / "i", tmp_path / "l"
        write_idx(images, labels, ip, lp)
        with open(lp, "r+b") as f:  # rewrite the label count header
            f.seek(4)
            f.write(struct.pack(">I", len(labels) + 1))
        with pytest.raises(IdxCountMismatchError):
            load_idx(ip, lp)

    def test_wrong_image_shape(self, tmp_path):
        ip, lp = tmp_path / "i", tmp_path / "l"
        with open(ip, "wb") as f:
            f.write(struct.pack(">IIII", 0x803, 1, 14, 14))
            f.write(bytes(14 * 14))
        with open(lp, "wb") as f:
            f.write(struct.pack(">II", 0x801, 1))
            f.write(bytes(1))
        with pytest.raises(DataError, match="28x28"):
            load_idx(ip, lp)

    def test_gzip_truncation_detected(self, tmp_path):
        ip, lp = tmp_path / "i.gz", tmp_path / "l.gz"
        images, labels = tiny_dataset()
        write_idx(images, labels, ip, lp)
        raw = gzip.decompress(ip.read_bytes())
        ip.write_bytes(gzip.compress(raw[:10]))
        with pytest.raises(IdxTruncatedError):
            load_idx(ip, lp)


def class_structured_dataset(n_per_class=30, seed=3):
    rng = np.random.default_rng(seed)
    images, labels = [], []
    for c in range(10):
        base = np.zeros((28, 28))
        base[2 + 2 * c : 6 + 2 * c, 4:24] = 150
        noise = rng.integers(0, 80, size=(n_per_class, 28, 28))
        img = np.clip(base[None] + noise, 0, 255).astype(np.uint8)
        images.append(img)
        labels.append(np.full(n_per_class, c))
    return RawDataset(np.concatenate(images), np.concatenate(labels), "train")


class TestFitPca:
    def test_components_orthonormal(self):
        model = fit_pca(class_structured_dataset(), (3, 8))
        gram = model.components @ model.components.T
        assert np.max(np.abs(gram - np.eye(16))) < 1e-8

    def test_explained_variance_non_increasing(self):
        model = fit_pca(class_structured_dataset(), (0, 9))
        assert np.all(np.diff(model.explained_variance) <= 1e-12)

    def test_deterministic_sign_convention(self):
        model = fit_pca(class_structured_dataset(), (1, 2))
        for row in model.components:
            assert row[np.argmax(np.abs(row))] > 0

    def test_refit_bit_identical(self):
        a = fit_pca(class_structured_dataset(), (3, 8))
        b = fit_pca(class_structured_dataset(), (3, 8))
        assert np.array_equal(a.components, b.components)
        assert np.array_equal(a.per_feature_min, b.per_feature_min)

    def test_identical_images_degenerate(self):
        images = np.tile(np.arange(784, dtype=np.uint8).reshape(28, 28), (30, 1, 1))
        labels = np.array([0, 1] * 15, dtype=np.int64)
        with pytest.raises(DataError, match="degenerate|zero-variance"):
            fit_pca(RawDataset(images, labels, "train"), (0, 1))

    def test_too_few_samples(self):
        ds = class_structured_dataset(n_per_class=5)
        with pytest.raises(DataError, match="at least 16"):
            fit_pca(ds, (0, 1))

    def test_same_class_pair_rejected(self):
        with pytest.raises(DataError, match="distinct"):
            fit_pca(class_structured_dataset(), (4, 4))


class TestFeaturize:
    def test_range_and_endpoints(self):
        train = class_structured_dataset()
        model = fit_pca(train, (3, 8))
        feats = featurize(model, train, (3, 8))
        assert feats.features.min() >= 0.0
        assert feats.features.max() <= np.pi
        # training split attains both endpoints per feature
        assert np.allclose(feats.features.min(axis=0), 0.0)
        assert np.allclose(feats.features.max(axis=0), np.pi)

    def test_labels_follow_pair_order(self):
        train = class_structured_dataset()
        model = fit_pca(train, (8, 3))
        feats = featurize(model, train, (8, 3))
        original = train.labels[(train.labels == 8) | (train.labels == 3)]
        assert np.array_equal(feats.labels, np.where(original == 8, 0, 1))

    def test_test_split_clamped(self):
        train = class_structured_dataset(seed=3)
        shifted = class_structured_dataset(seed=4)
        test = RawDataset(
            np.clip(shifted.images.astype(int) * 2, 0, 255).astype(np.uint8),
            shifted.labels,
            "test",
        )
        model = fit_pca(train, (3, 8))
        feats = featurize(model, test, (3, 8))
        assert feats.features.min() >= 0.0
        assert feats.features.max() <= np.pi

    def test_bit_identical(self):
        train = class_structured_dataset()
        model = fit_pca(train, (3, 8))
        a = featurize(model, train, (3, 8))
        b = featurize(model, train, (3, 8))
        assert np.array_equal(a.features, b.features)

    def test_reconstruction_error_non_increasing_in_k(self):
        train = class_structured_dataset()
        xs, _ = train.images[:500].reshape(-1, 784) / 255.0, None
        mean = xs.mean(axis=0)
        errors = []
        for k in (1, 4, 16):
            model = fit_pca(train, (3, 8), k=k)
            centered = xs - model.mean
            recon = centered @ model.components.T @ model.components
            errors.append(float(np.sum((centered - recon) ** 2)))
        assert errors[0] >= errors[1] >= errors[2]


class TestSampleClassPairs:
    def test_partition_property(self):
        pairs = sample_class_pairs(np.random.default_rng(0), 5)
        flat = [c for pair in pairs for c in pair]
        assert sorted(flat) == list(range(10))

    def test_deterministic_under_seed(self):
        a = sample_class_pairs(np.random.default_rng(7), 5)
        b = sample_class_pairs(np.random.default_rng(7), 5)
        assert a == b

    def test_n_pairs_bounds(self):
        assert len(sample_class_pairs(np.random.default_rng(0), 2)) == 2
        with pytest.raises(ValueError):
            sample_class_pairs(np.random.default_rng(0), 6)

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_disjoint_for_any_seed(self, seed):
        pairs = sample_class_pairs(np.random.default_rng(seed), 5)
        flat = [c for pair in pairs for c in pair]
        assert len(set(flat)) == 10


class TestSubsample:
    def test_preserves_order_and_size(self):
        ds = class_structured_dataset()
        sub = subsample(ds, 50, np.random.default_rng(1))
        assert len(sub) == 50
        # order preserved: labels appear in original class-block order
        assert np.array_equal(sub.labels, np.sort(sub.labels))

    def test_noop_when_larger(self):
        ds = class_structured_dataset()
        assert subsample(ds, 10_000, np.random.default_rng(1)) is ds


def test_export_features_csv(tmp_path):
    train = class_structured_dataset()
    model = fit_pca(train, (3, 8))
    feats = featurize(model, train, (3, 8))
    path = tmp_path / "features.csv"
    export_features_csv(feats, path)
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join([f"f{i}" for i in range(16)] + ["label"])
    assert len(lines) == len(feats) + 1
    first = lines[1].split(",")
    assert len(first) == 17 and first[-1] in ("0", "1")


def test_synthetic_dataset_loads_and_balances(synthetic_data_dir):
    train = load_dataset(synthetic_data_dir, "digits", "train")
    test = load_dataset(synthetic_data_dir, "digits", "test")
    assert train.images.shape == (1200, 28, 28)
    assert np.array_equal(np.unique(train.labels), np.arange(10))
    for pair in [(0, 1), (4, 7)]:
        for split in (train, test):
            labels = split.labels[(split.labels == pair[0]) | (split.labels == pair[1])]
            assert (labels == pair[0]).any() and (labels == pair[1]).any()


def test_synthetic_regeneration_is_cached(synthetic_data_dir):
    before = sorted(p.stat().st_mtime for p in (synthetic_data_dir / "digits").iterdir())
    synth.make_synthetic_idx(synthetic_data_dir, "digits", n_train=1200, n_test=400)
    after = sorted(p.stat().st_mtime for p in (synthetic_data_dir / "digits").iterdir())
    assert before == after
