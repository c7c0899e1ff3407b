"""Scratch probe: class offsets orthogonal to dominant style variance."""
import sys
import time

import numpy as np

sys.path.insert(0, "src")
from vqclab import data, train
from calibrate_probe4 import eval_params, lin_acc, split_sets, train_snapshots


def make_orthogonal_dataset(seed, n_per_class, n_bumps=16, class_dim=6, n_style=5,
                            style_scale=0.5, class_scale=0.30, amp_noise=0.06,
                            wobble=0.8, shift=1.2, noise=0.05):
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:28, 0:28]
    grid = np.stack([yy, xx], -1).astype(float)
    # bump centers on a jittered 4x4 lattice covering the frame
    lattice = np.array([(6 + 5.3 * i, 6 + 5.3 * j) for i in range(4) for j in range(4)])
    centers = lattice + rng.uniform(-1.5, 1.5, lattice.shape)
    widths = rng.uniform(2.2, 3.4, n_bumps)
    base = rng.uniform(0.45, 0.85, n_bumps)
    # orthonormal frame: first class_dim columns host class offsets,
    # the next n_style columns host the shared style directions
    frame, _ = np.linalg.qr(rng.normal(size=(n_bumps, class_dim + n_style)))
    class_basis = frame[:, :class_dim]
    style_dirs = frame[:, class_dim:].T
    offsets = [class_basis @ (rng.normal(size=class_dim) * class_scale / np.sqrt(class_dim))
               for _ in range(10)]
    images, labels = [], []
    for c in range(10):
        S = n_per_class
        z = rng.normal(size=(S, n_style)) * style_scale
        amps = base[None] + offsets[c][None] + z @ style_dirs
        amps += rng.normal(0, amp_noise, (S, n_bumps))
        amps = np.clip(amps, 0.03, 1.8)
        ctr = centers[None] + rng.uniform(-shift, shift, (S, 1, 2)) + rng.uniform(-wobble, wobble, (S, n_bumps, 2))
        wid = widths[None] * rng.uniform(0.93, 1.07, (S, n_bumps))
        d2 = ((grid[None, None] - ctr[:, :, None, None, :])**2).sum(-1)
        img = (amps[:, :, None, None] * np.exp(-d2/(2*wid[:, :, None, None]**2))).sum(1)
        img *= rng.uniform(0.88, 1.0, (S, 1, 1))
        img += rng.normal(0, noise, img.shape)
        images.append(np.clip(img / 2.2, 0, 1))
        labels.append(np.full(S, c))
    X = (np.concatenate(images) * 255).round().astype(np.uint8)
    return X, np.concatenate(labels).astype(np.int64)


if __name__ == "__main__":
    t0 = time.time()
    for variant, kw in {
        "E1 gap .30 style .5": dict(class_scale=0.30, style_scale=0.5),
        "E2 gap .45 style .6": dict(class_scale=0.45, style_scale=0.6),
    }.items():
        X, y = make_orthogonal_dataset(21, 330, **kw)
        tr, te = split_sets(X, y, 80)
        print(f"--- {variant}", flush=True)
        for pair in [(3, 8), (0, 1)]:
            pca = data.fit_pca(tr, pair)
            fs_tr = data.featurize(pca, tr, pair)
            fs_te = data.featurize(pca, te, pair)
            # where does the class signal sit in the 16 features?
            gap = np.abs(fs_tr.features[fs_tr.labels == 0].mean(0) - fs_tr.features[fs_tr.labels == 1].mean(0))
            top = np.argsort(gap)[::-1][:3]
            print(f"  pair{pair}: linear={lin_acc(fs_tr, fs_te):.3f} "
                  f"class-gap features {top.tolist()} gaps {gap[top].round(2).tolist()}", flush=True)
            snaps = (50, 100, 200, 300)
            for kind in ("CNN8", "CNN9"):
                for direction in ("forward", "reversed"):
                    for seed in (5, 6):
                        cfg = train.TrainConfig(direction=direction, conv_kind=kind, n_steps=max(snaps),
                                                batch_size=25, learning_rate=0.05, seed=seed)
                        traj = train_snapshots(cfg, fs_tr, fs_te, set(snaps))
                        line = " ".join(f"{s}:[{v[0]:.2f}/{v[1]:.2f}]" for s, v in sorted(traj.items()))
                        print(f"    {kind} {direction:8s} seed{seed} samp/exp: {line}", flush=True)
    print(f"total {time.time()-t0:.0f}s")
