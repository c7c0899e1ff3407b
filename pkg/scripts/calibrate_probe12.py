"""Scratch probe: low learning rates on spread-offset data variants."""
import sys
import time

import numpy as np

sys.path.insert(0, "src")
from vqclab import data, train
from calibrate_probe4 import lin_acc, split_sets, train_snapshots
from calibrate_probe8 import make_spread_dataset

if __name__ == "__main__":
    t0 = time.time()
    for variant, kw in {
        "G1 norm.55 noise.12": dict(offset_norm=0.55, amp_noise=0.12),
        "G1h norm.48 noise.135": dict(offset_norm=0.48, amp_noise=0.135),
    }.items():
        X, y = make_spread_dataset(51, 330, complement_only=True, **kw)
        tr, te = split_sets(X, y, 80)
        print(f"--- {variant}", flush=True)
        for pair in [(3, 8), (0, 1)]:
            pca = data.fit_pca(tr, pair)
            fs_tr = data.featurize(pca, tr, pair)
            fs_te = data.featurize(pca, te, pair)
            print(f"  pair{pair}: linear={lin_acc(fs_tr, fs_te):.3f}", flush=True)
            snaps = (100, 200, 400, 600)
            for lr in (0.01, 0.02):
                for kind in ("CNN8", "CNN9"):
                    for direction in ("forward", "reversed"):
                        cfg = train.TrainConfig(direction=direction, conv_kind=kind, n_steps=max(snaps),
                                                batch_size=25, learning_rate=lr, seed=5)
                        traj = train_snapshots(cfg, fs_tr, fs_te, set(snaps))
                        line = " ".join(f"{s}:[{v[0]:.2f}/{v[1]:.2f}]" for s, v in sorted(traj.items()))
                        print(f"    lr{lr} {kind} {direction:8s} samp/exp: {line}", flush=True)
    print(f"total {time.time()-t0:.0f}s")
