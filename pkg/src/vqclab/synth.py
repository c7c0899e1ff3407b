"""Synthetic IDX-format image datasets for offline environments.

Each class is a fixed prototype of smooth intensity bumps.  Samples jitter
the bump positions, widths, and amplitudes, add class-independent clutter
bumps and pixel noise, and vary the global intensity, giving heavy
intra-class variance on top of the class structure (surface statistics in
the spirit of the handwritten-digit archives: 28x28 uint8, ten classes,
binary pairs separable but far from noise-free).  This exercises the full
pipeline end to end when the real archives are out of reach; it is a
stand-in, not a substitute for the published datasets.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .data import IDX_FILES, IMAGE_SHAPE, dataset_dir, write_idx

N_CLASSES = 10

#: Per-dataset generator styles; "fashion" is blobbier and slightly harder.
_DATASET_STYLE = {
    "digits": {
        "seed": 20_240_101,
        "class_bumps": 3,
        "clutter_bumps": 3,
        "clutter_amp": 0.9,
        "noise": 0.06,
    },
    "fashion": {
        "seed": 20_240_202,
        "class_bumps": 4,
        "clutter_bumps": 4,
        "clutter_amp": 1.0,
        "noise": 0.07,
    },
}


def _render(rng, centers, widths, count, style):
    n_bumps = len(centers)
    yy, xx = np.mgrid[0 : IMAGE_SHAPE[0], 0 : IMAGE_SHAPE[1]]
    grid = np.stack([yy, xx], axis=-1).astype(float)
    ctr = (
        centers[None, :, :]
        + rng.uniform(-2.5, 2.5, size=(count, 1, 2))          # whole-image shift
        + rng.uniform(-2.0, 2.0, size=(count, n_bumps, 2))    # per-bump wobble
    )
    wid = widths[None, :] * rng.uniform(0.75, 1.35, size=(count, n_bumps))
    amp = rng.uniform(0.5, 1.1, size=(count, n_bumps))
    n_clutter = style["clutter_bumps"]
    ctr = np.concatenate([ctr, rng.uniform(4.0, 24.0, size=(count, n_clutter, 2))], axis=1)
    wid = np.concatenate([wid, rng.uniform(2.0, 4.5, size=(count, n_clutter))], axis=1)
    amp = np.concatenate([amp, rng.uniform(0.2, style["clutter_amp"], size=(count, n_clutter))], axis=1)
    d2 = ((grid[None, None, :, :, :] - ctr[:, :, None, None, :]) ** 2).sum(-1)
    img = (amp[:, :, None, None] * np.exp(-d2 / (2.0 * wid[:, :, None, None] ** 2))).sum(1)
    img *= rng.uniform(0.7, 1.0, size=(count, 1, 1))
    img += rng.normal(0.0, style["noise"], size=img.shape)
    return (np.clip(img, 0.0, 1.0) * 255.0).round().astype(np.uint8)


def generate(name: str, n_train: int = 12_000, n_test: int = 3_000, seed: int | None = None):
    """Balanced train/test image and label arrays for one dataset name."""
    style = _DATASET_STYLE[name]
    rng = np.random.default_rng(style["seed"] if seed is None else seed)
    protos = [
        (
            rng.uniform(6.0, 22.0, size=(style["class_bumps"], 2)),
            rng.uniform(2.0, 4.0, size=style["class_bumps"]),
        )
        for _ in range(N_CLASSES)
    ]
    out = []
    for total in (n_train, n_test):
        per_class = total // N_CLASSES
        images = np.concatenate(
            [_render(rng, c, w, per_class, style) for c, w in protos]
        )
        labels = np.repeat(np.arange(N_CLASSES, dtype=np.uint8), per_class)
        order = rng.permutation(len(labels))
        out.append((images[order], labels[order]))
    return out[0], out[1]


def make_synthetic_idx(data_dir, name: str, n_train: int = 12_000, n_test: int = 3_000,
                       seed: int | None = None, overwrite: bool = False) -> Path:
    """Write a synthetic dataset in canonical IDX layout; returns its dir."""
    base = dataset_dir(data_dir, name)
    paths = {split: [base / fn for fn in IDX_FILES[split]] for split in IDX_FILES}
    if not overwrite and all(p.exists() for pair in paths.values() for p in pair):
        return base
    (train_images, train_labels), (test_images, test_labels) = generate(name, n_train, n_test, seed)
    write_idx(train_images, train_labels, *paths["train"])
    write_idx(test_images, test_labels, *paths["test"])
    return base
