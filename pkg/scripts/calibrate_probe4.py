"""Scratch probe: shared-location generator with style-dominated variance
and class signal in low-variance amplitude offsets."""
import sys
import time

import numpy as np

sys.path.insert(0, "src")
from vqclab import data, train


def make_shared_bump_dataset(seed, n_per_class, n_bumps=8, n_style=3,
                             style_scale=0.35, class_offset=0.15, amp_noise=0.04,
                             wobble=1.0, shift=1.5, noise=0.05):
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:28, 0:28]
    grid = np.stack([yy, xx], -1).astype(float)
    centers = rng.uniform(6, 22, (n_bumps, 2))
    widths = rng.uniform(2.2, 4.0, n_bumps)
    base = rng.uniform(0.4, 0.9, n_bumps)
    # shared style directions (high variance, class independent)
    style_dirs = rng.normal(size=(n_style, n_bumps))
    style_dirs /= np.linalg.norm(style_dirs, axis=1, keepdims=True)
    # class offsets: +-class_offset on a class-specific subset of bumps
    offsets = []
    for _ in range(10):
        mask = rng.choice(n_bumps, size=3, replace=False)
        delta = np.zeros(n_bumps)
        delta[mask] = rng.choice([-1.0, 1.0], size=3) * class_offset
        offsets.append(delta)
    images, labels = [], []
    for c in range(10):
        S = n_per_class
        z = rng.normal(size=(S, n_style)) * style_scale
        amps = base[None] + offsets[c][None] + z @ style_dirs
        amps += rng.normal(0, amp_noise, (S, n_bumps))
        amps = np.clip(amps, 0.05, 1.6)
        ctr = centers[None] + rng.uniform(-shift, shift, (S, 1, 2)) + rng.uniform(-wobble, wobble, (S, n_bumps, 2))
        wid = widths[None] * rng.uniform(0.9, 1.1, (S, n_bumps))
        d2 = ((grid[None, None] - ctr[:, :, None, None, :])**2).sum(-1)
        img = (amps[:, :, None, None] * np.exp(-d2/(2*wid[:, :, None, None]**2))).sum(1)
        img *= rng.uniform(0.85, 1.0, (S, 1, 1))
        img += rng.normal(0, noise, img.shape)
        images.append(np.clip(img / 2.0, 0, 1))  # /2: overlapping bumps sum above 1
        labels.append(np.full(S, c))
    X = (np.concatenate(images) * 255).round().astype(np.uint8)
    return X, np.concatenate(labels).astype(np.int64)


def split_sets(X, y, n_test_per_class):
    tr_idx, te_idx = [], []
    for c in range(10):
        idx = np.where(y == c)[0]
        te_idx.append(idx[:n_test_per_class]); tr_idx.append(idx[n_test_per_class:])
    return (data.RawDataset(X[np.concatenate(tr_idx)], y[np.concatenate(tr_idx)], "train"),
            data.RawDataset(X[np.concatenate(te_idx)], y[np.concatenate(te_idx)], "test"))


def eval_params(kind, params, fs):
    cfg_f = train.TrainConfig(direction="forward", conv_kind=kind, seed=0)
    batch, _ = train.training_batch(cfg_f, fs)
    e = batch.expectations(params, [("Z", 0)])[:, 0]
    exp_acc = float(np.mean(np.where(e > 0, 0, 1) == fs.labels))
    s = np.where(fs.labels == 0, 1.0, -1.0)
    return float(np.mean(0.5*(1+s*e))), exp_acc, float(e[fs.labels==0].mean()), float(e[fs.labels==1].mean())


def lin_acc(fs_tr, fs_te):
    A = np.hstack([fs_tr.features, np.ones((len(fs_tr), 1))])
    w, *_ = np.linalg.lstsq(A, 2.0*fs_tr.labels-1.0, rcond=None)
    At = np.hstack([fs_te.features, np.ones((len(fs_te), 1))])
    return float(np.mean((At@w > 0).astype(int) == fs_te.labels))


def train_snapshots(cfg, features, fs_te, snapshots):
    seeds = train._derived_seeds(cfg.seed)
    rng_init = np.random.default_rng(seeds["init"])
    rng_batch = np.random.default_rng(seeds["batch"])
    batch_circuits, observables = train.training_batch(cfg, features)
    params = rng_init.uniform(0.0, 2.0*np.pi, batch_circuits.template.param_count)
    m1 = np.zeros_like(params); m2 = np.zeros_like(params)
    out = {}
    bsz = min(cfg.batch_size, len(features))
    for step in range(max(snapshots)):
        idx = rng_batch.choice(len(features), size=bsz, replace=False)
        loss, grad = train.batch_loss_and_grad(cfg, params, batch_circuits, observables, features.labels, idx)
        m1 = cfg.beta1*m1 + (1-cfg.beta1)*grad
        m2 = cfg.beta2*m2 + (1-cfg.beta2)*grad**2
        t = step + 1
        params -= cfg.learning_rate * (m1/(1-cfg.beta1**t)) / (np.sqrt(m2/(1-cfg.beta2**t)) + cfg.adam_eps)
        if (step+1) in snapshots:
            out[step+1] = eval_params(cfg.conv_kind, params, fs_te)
    return out


if __name__ == "__main__":
    t0 = time.time()
    for variant, kw in {
        "D1 offset .15 style .35": dict(class_offset=0.15, style_scale=0.35),
        "D2 offset .22 style .45": dict(class_offset=0.22, style_scale=0.45),
    }.items():
        X, y = make_shared_bump_dataset(11, 330, **kw)
        tr, te = split_sets(X, y, 80)
        print(f"--- {variant}", flush=True)
        for pair in [(3, 8), (0, 1)]:
            pca = data.fit_pca(tr, pair)
            fs_tr = data.featurize(pca, tr, pair)
            fs_te = data.featurize(pca, te, pair)
            print(f"  pair{pair}: linear={lin_acc(fs_tr, fs_te):.3f}", flush=True)
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
