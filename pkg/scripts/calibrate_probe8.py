"""Scratch probe: class offsets spread across many low-variance dims."""
import sys
import time

import numpy as np

sys.path.insert(0, "src")
from vqclab import data, train
from calibrate_probe4 import lin_acc, split_sets, train_snapshots


def make_spread_dataset(seed, n_per_class, n_bumps=16, complement_only=True,
                        style_scales=(0.8, 0.7, 0.6, 0.5, 0.4),
                        offset_norm=0.55, amp_noise=0.12,
                        wobble=0.4, shift=0.6, noise=0.025):
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:28, 0:28]
    grid = np.stack([yy, xx], -1).astype(float)
    lattice = np.array([(6 + 5.3 * i, 6 + 5.3 * j) for i in range(4) for j in range(4)])
    centers = lattice + rng.uniform(-1.5, 1.5, lattice.shape)
    widths = rng.uniform(2.2, 3.2, n_bumps)
    base = rng.uniform(0.5, 0.8, n_bumps)
    n_style = len(style_scales)
    frame, _ = np.linalg.qr(rng.normal(size=(n_bumps, n_bumps)))
    style_dirs = frame[:, :n_style].T
    complement = frame[:, n_style:]  # (16, 11)
    offsets = []
    for _ in range(10):
        if complement_only:
            v = complement @ rng.normal(size=complement.shape[1])
        else:
            v = rng.normal(size=n_bumps)
        offsets.append(offset_norm * v / np.linalg.norm(v))
    images, labels = [], []
    for c in range(10):
        S = n_per_class
        z = rng.normal(size=(S, n_style)) * np.asarray(style_scales)
        amps = base[None] + offsets[c][None] + z @ style_dirs
        amps += rng.normal(0, amp_noise, (S, n_bumps))
        amps = np.clip(amps, 0.02, 2.1)
        ctr = centers[None] + rng.uniform(-shift, shift, (S, 1, 2)) + rng.uniform(-wobble, wobble, (S, n_bumps, 2))
        wid = widths[None] * rng.uniform(0.96, 1.04, (S, n_bumps))
        d2 = ((grid[None, None] - ctr[:, :, None, None, :])**2).sum(-1)
        img = (amps[:, :, None, None] * np.exp(-d2/(2*wid[:, :, None, None]**2))).sum(1)
        img *= rng.uniform(0.92, 1.0, (S, 1, 1))
        img += rng.normal(0, noise, img.shape)
        images.append(np.clip(img / 2.4, 0, 1))
        labels.append(np.full(S, c))
    X = (np.concatenate(images) * 255).round().astype(np.uint8)
    return X, np.concatenate(labels).astype(np.int64)


if __name__ == "__main__":
    t0 = time.time()
    for variant, kw in {
        "G1 complement spread": dict(complement_only=True, offset_norm=0.55),
        "G2 fullspace spread": dict(complement_only=False, offset_norm=0.5),
    }.items():
        X, y = make_spread_dataset(51, 330, **kw)
        tr, te = split_sets(X, y, 80)
        print(f"--- {variant}", flush=True)
        for pair in [(3, 8), (0, 1)]:
            pca = data.fit_pca(tr, pair)
            fs_tr = data.featurize(pca, tr, pair)
            fs_te = data.featurize(pca, te, pair)
            gap = np.abs(fs_tr.features[fs_tr.labels == 0].mean(0) - fs_tr.features[fs_tr.labels == 1].mean(0))
            print(f"  pair{pair}: linear={lin_acc(fs_tr, fs_te):.3f} "
                  f"gaps={np.round(gap, 2).tolist()}", flush=True)
            snaps = (200, 400, 800, 1200)
            for kind in ("CNN8", "CNN9"):
                for direction in ("forward", "reversed"):
                    cfg = train.TrainConfig(direction=direction, conv_kind=kind, n_steps=max(snaps),
                                            batch_size=25, learning_rate=0.05, seed=5)
                    traj = train_snapshots(cfg, fs_tr, fs_te, set(snaps))
                    line = " ".join(f"{s}:[{v[0]:.2f}/{v[1]:.2f}]" for s, v in sorted(traj.items()))
                    print(f"    {kind} {direction:8s} samp/exp: {line}", flush=True)
    print(f"total {time.time()-t0:.0f}s")
