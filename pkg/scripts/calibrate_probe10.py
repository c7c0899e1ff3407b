"""Scratch probe: few-step regime on the G1 spread-offset generator."""
import sys
import time

import numpy as np

sys.path.insert(0, "src")
from vqclab import data, train
from calibrate_probe4 import lin_acc, split_sets, train_snapshots
from calibrate_probe8 import make_spread_dataset

if __name__ == "__main__":
    t0 = time.time()
    X, y = make_spread_dataset(51, 330, complement_only=True, offset_norm=0.55, amp_noise=0.12)
    tr, te = split_sets(X, y, 80)
    snaps = (25, 50, 75, 100, 150, 250)
    for pair in [(3, 8), (0, 1), (5, 9), (2, 7)]:
        pca = data.fit_pca(tr, pair)
        fs_tr = data.featurize(pca, tr, pair)
        fs_te = data.featurize(pca, te, pair)
        print(f"pair{pair}: linear={lin_acc(fs_tr, fs_te):.3f}", flush=True)
        for kind in ("CNN8", "CNN9"):
            for direction in ("forward", "reversed"):
                for seed in (5, 6):
                    cfg = train.TrainConfig(direction=direction, conv_kind=kind, n_steps=max(snaps),
                                            batch_size=25, learning_rate=0.05, seed=seed)
                    traj = train_snapshots(cfg, fs_tr, fs_te, set(snaps))
                    line = " ".join(f"{s}:[{v[0]:.2f}/{v[1]:.2f}]" for s, v in sorted(traj.items()))
                    print(f"  {kind} {direction:8s} s{seed} samp/exp: {line}", flush=True)
    print(f"total {time.time()-t0:.0f}s")
