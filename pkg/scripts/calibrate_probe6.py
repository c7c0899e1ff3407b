"""Scratch probe: clean-render orthogonal generator, budget asymmetry."""
import sys
import time

import numpy as np

sys.path.insert(0, "src")
from vqclab import data, train
from calibrate_probe4 import lin_acc, split_sets, train_snapshots


def make_clean_dataset(seed, n_per_class, n_bumps=16, class_dim=6, n_style=6,
                       style_scale=0.55, class_scale=0.35, amp_noise=0.15,
                       wobble=0.4, shift=0.6, noise=0.025):
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:28, 0:28]
    grid = np.stack([yy, xx], -1).astype(float)
    lattice = np.array([(6 + 5.3 * i, 6 + 5.3 * j) for i in range(4) for j in range(4)])
    centers = lattice + rng.uniform(-1.5, 1.5, lattice.shape)
    widths = rng.uniform(2.2, 3.2, n_bumps)
    base = rng.uniform(0.5, 0.8, n_bumps)
    frame, _ = np.linalg.qr(rng.normal(size=(n_bumps, class_dim + n_style)))
    class_basis = frame[:, :class_dim]
    style_dirs = frame[:, class_dim:].T
    offsets = [class_basis @ rng.normal(size=class_dim) * class_scale / np.sqrt(class_dim)
               for _ in range(10)]
    images, labels = [], []
    for c in range(10):
        S = n_per_class
        z = rng.normal(size=(S, n_style)) * style_scale
        amps = base[None] + offsets[c][None] + z @ style_dirs
        amps += rng.normal(0, amp_noise, (S, n_bumps))
        amps = np.clip(amps, 0.02, 1.9)
        ctr = centers[None] + rng.uniform(-shift, shift, (S, 1, 2)) + rng.uniform(-wobble, wobble, (S, n_bumps, 2))
        wid = widths[None] * rng.uniform(0.96, 1.04, (S, n_bumps))
        d2 = ((grid[None, None] - ctr[:, :, None, None, :])**2).sum(-1)
        img = (amps[:, :, None, None] * np.exp(-d2/(2*wid[:, :, None, None]**2))).sum(1)
        img *= rng.uniform(0.92, 1.0, (S, 1, 1))
        img += rng.normal(0, noise, img.shape)
        images.append(np.clip(img / 2.2, 0, 1))
        labels.append(np.full(S, c))
    X = (np.concatenate(images) * 255).round().astype(np.uint8)
    return X, np.concatenate(labels).astype(np.int64)


if __name__ == "__main__":
    t0 = time.time()
    for variant, kw in {
        "F1 gap.35 noise.15": dict(class_scale=0.35, amp_noise=0.15),
        "F2 gap.5 noise.18 style.7": dict(class_scale=0.5, amp_noise=0.18, style_scale=0.7, n_style=7, class_dim=5),
    }.items():
        X, y = make_clean_dataset(31, 330, **kw)
        tr, te = split_sets(X, y, 80)
        print(f"--- {variant}", flush=True)
        for pair in [(3, 8), (0, 1)]:
            pca = data.fit_pca(tr, pair)
            fs_tr = data.featurize(pca, tr, pair)
            fs_te = data.featurize(pca, te, pair)
            gap = np.abs(fs_tr.features[fs_tr.labels == 0].mean(0) - fs_tr.features[fs_tr.labels == 1].mean(0))
            top = np.argsort(gap)[::-1][:3]
            print(f"  pair{pair}: linear={lin_acc(fs_tr, fs_te):.3f} "
                  f"gap-feats {top.tolist()} gaps {gap[top].round(2).tolist()}", flush=True)
            snaps = (100, 200, 300, 500)
            for kind in ("CNN8", "CNN9"):
                for direction in ("forward", "reversed"):
                    for seed in (5, 6):
                        cfg = train.TrainConfig(direction=direction, conv_kind=kind, n_steps=max(snaps),
                                                batch_size=25, learning_rate=0.05, seed=seed)
                        traj = train_snapshots(cfg, fs_tr, fs_te, set(snaps))
                        line = " ".join(f"{s}:[{v[0]:.2f}/{v[1]:.2f}]" for s, v in sorted(traj.items()))
                        print(f"    {kind} {direction:8s} seed{seed} samp/exp: {line}", flush=True)
    print(f"total {time.time()-t0:.0f}s")
