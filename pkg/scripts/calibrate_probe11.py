"""Scratch probe: plain gradient descent on the G1 spread-offset data."""
import sys
import time

import numpy as np

sys.path.insert(0, "src")
from vqclab import data, train
from calibrate_probe4 import eval_params, lin_acc, split_sets
from calibrate_probe8 import make_spread_dataset


def train_snapshots_sgd(cfg, features, fs_te, snapshots):
    seeds = train._derived_seeds(cfg.seed)
    rng_init = np.random.default_rng(seeds["init"])
    rng_batch = np.random.default_rng(seeds["batch"])
    batch_circuits, observables = train.training_batch(cfg, features)
    params = rng_init.uniform(0.0, 2.0 * np.pi, batch_circuits.template.param_count)
    out = {}
    bsz = min(cfg.batch_size, len(features))
    for step in range(max(snapshots)):
        idx = rng_batch.choice(len(features), size=bsz, replace=False)
        loss, grad = train.batch_loss_and_grad(cfg, params, batch_circuits, observables, features.labels, idx)
        params = params - cfg.learning_rate * grad
        if (step + 1) in snapshots:
            out[step + 1] = eval_params(cfg.conv_kind, params, fs_te)
    return out


if __name__ == "__main__":
    t0 = time.time()
    X, y = make_spread_dataset(51, 330, complement_only=True, offset_norm=0.55, amp_noise=0.12)
    tr, te = split_sets(X, y, 80)
    snaps = (100, 200, 400, 600)
    for pair in [(3, 8), (0, 1)]:
        pca = data.fit_pca(tr, pair)
        fs_tr = data.featurize(pca, tr, pair)
        fs_te = data.featurize(pca, te, pair)
        print(f"pair{pair}: linear={lin_acc(fs_tr, fs_te):.3f}", flush=True)
        for lr in (0.2, 0.5):
            for kind in ("CNN8", "CNN9"):
                for direction in ("forward", "reversed"):
                    for seed in (5, 6):
                        cfg = train.TrainConfig(direction=direction, conv_kind=kind,
                                                optimizer="sgd", n_steps=max(snaps),
                                                batch_size=25, learning_rate=lr, seed=seed)
                        traj = train_snapshots_sgd(cfg, fs_tr, fs_te, set(snaps))
                        line = " ".join(f"{s}:[{v[0]:.2f}/{v[1]:.2f}]" for s, v in sorted(traj.items()))
                        print(f"  lr{lr} {kind} {direction:8s} s{seed} samp/exp: {line}", flush=True)
    print(f"total {time.time()-t0:.0f}s")
