"""Scratch probe: style-variance-dominated generator."""
import sys
import tempfile
import time

import numpy as np

sys.path.insert(0, "src")
from vqclab import data, train


def make_style_dataset(seed, n_per_class, class_amp=(0.35, 0.75), style_amp=(0.2, 1.2),
                       n_style=4, n_class=3, n_clutter=2, noise=0.06,
                       class_wobble=1.5, style_wobble=2.0):
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:28, 0:28]
    grid = np.stack([yy, xx], -1).astype(float)
    style_centers = rng.uniform(6, 22, (n_style, 2))
    style_widths = rng.uniform(2.5, 4.5, n_style)
    protos = [(rng.uniform(6, 22, (n_class, 2)), rng.uniform(2.0, 3.5, n_class)) for _ in range(10)]
    images, labels = [], []
    for c, (centers, widths) in enumerate(protos):
        S = n_per_class
        # class bumps: weak, moderately stable
        ctr = centers[None] + rng.uniform(-class_wobble, class_wobble, (S, n_class, 2))
        wid = widths[None] * rng.uniform(0.85, 1.2, (S, n_class))
        amp = rng.uniform(*class_amp, (S, n_class))
        # shared style bumps: big amplitude variance, same locations for all classes
        sctr = style_centers[None] + rng.uniform(-style_wobble, style_wobble, (S, n_style, 2))
        swid = style_widths[None] * rng.uniform(0.8, 1.3, (S, n_style))
        samp_ = rng.uniform(*style_amp, (S, n_style))
        # clutter
        cctr = rng.uniform(4, 24, (S, n_clutter, 2))
        cwid = rng.uniform(2.0, 4.0, (S, n_clutter))
        camp = rng.uniform(0.1, 0.6, (S, n_clutter))
        allc = np.concatenate([ctr, sctr, cctr], 1)
        allw = np.concatenate([wid, swid, cwid], 1)
        alla = np.concatenate([amp, samp_, camp], 1)
        d2 = ((grid[None, None] - allc[:, :, None, None, :])**2).sum(-1)
        img = (alla[:, :, None, None] * np.exp(-d2/(2*allw[:, :, None, None]**2))).sum(1)
        img *= rng.uniform(0.8, 1.0, (S, 1, 1))
        img += rng.normal(0, noise, img.shape)
        images.append(np.clip(img, 0, 1))
        labels.append(np.full(S, c))
    X = (np.concatenate(images) * 255).round().astype(np.uint8)
    return X, np.concatenate(labels).astype(np.int64)


def split_sets(X, y, n_test_per_class):
    tr_idx, te_idx = [], []
    for c in range(10):
        idx = np.where(y == c)[0]
        te_idx.append(idx[:n_test_per_class])
        tr_idx.append(idx[n_test_per_class:])
    tr = np.concatenate(tr_idx); te = np.concatenate(te_idx)
    return (data.RawDataset(X[tr], y[tr], "train"), data.RawDataset(X[te], y[te], "test"))


def eval_model(m, fs):
    cfg_f = train.TrainConfig(direction="forward", conv_kind=m.config.conv_kind, seed=0)
    batch, _ = train.training_batch(cfg_f, fs)
    e = batch.expectations(m.params, [("Z", 0)])[:, 0]
    exp_acc = float(np.mean(np.where(e > 0, 0, 1) == fs.labels))
    s = np.where(fs.labels == 0, 1.0, -1.0)
    return float(np.mean(0.5*(1+s*e))), exp_acc, float(e[fs.labels==0].mean()), float(e[fs.labels==1].mean())


def lin_acc(fs_tr, fs_te):
    A = np.hstack([fs_tr.features, np.ones((len(fs_tr), 1))])
    w, *_ = np.linalg.lstsq(A, 2.0*fs_tr.labels-1.0, rcond=None)
    At = np.hstack([fs_te.features, np.ones((len(fs_te), 1))])
    return float(np.mean((At@w > 0).astype(int) == fs_te.labels))


if __name__ == "__main__":
    t0 = time.time()
    variants = {
        "C1 weak-class": dict(class_amp=(0.35, 0.75)),
        "C2 weaker-class": dict(class_amp=(0.25, 0.55), n_style=5),
    }
    for name, kw in variants.items():
        X, y = make_style_dataset(101, 330, **kw)
        tr, te = split_sets(X, y, 80)
        print(f"--- {name}", flush=True)
        for pair in [(3, 8), (0, 1)]:
            pca = data.fit_pca(tr, pair)
            fs_tr = data.featurize(pca, tr, pair)
            fs_te = data.featurize(pca, te, pair)
            print(f"  pair{pair}: linear={lin_acc(fs_tr, fs_te):.3f}", flush=True)
            for kind in ("CNN8", "CNN9"):
                for direction in ("forward", "reversed"):
                    for seed in (5, 6):
                        cfg = train.TrainConfig(direction=direction, conv_kind=kind, n_steps=300,
                                                batch_size=25, learning_rate=0.05, seed=seed)
                        m = train.train(cfg, fs_tr)
                        samp, expv, m0, m1 = eval_model(m, fs_te)
                        print(f"    {kind} {direction:8s} seed{seed}: samp={samp:.3f} exp={expv:.3f} "
                              f"means=({m0:+.2f},{m1:+.2f})", flush=True)
    print(f"total {time.time()-t0:.0f}s")
