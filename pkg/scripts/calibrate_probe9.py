"""Scratch probe: hardness scan of the complement-spread generator."""
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
        "H1 norm.42 noise.15": dict(offset_norm=0.42, amp_noise=0.15,
                                    style_scales=(0.85, 0.75, 0.65, 0.55, 0.45, 0.4)),
        "H2 norm.35 noise.15": dict(offset_norm=0.35, amp_noise=0.15,
                                    style_scales=(0.85, 0.75, 0.65, 0.55, 0.45, 0.4)),
    }.items():
        X, y = make_spread_dataset(51, 330, complement_only=True, **kw)
        tr, te = split_sets(X, y, 80)
        print(f"--- {variant}", flush=True)
        for pair in [(3, 8), (0, 1), (5, 9)]:
            pca = data.fit_pca(tr, pair)
            fs_tr = data.featurize(pca, tr, pair)
            fs_te = data.featurize(pca, te, pair)
            print(f"  pair{pair}: linear={lin_acc(fs_tr, fs_te):.3f}", flush=True)
            snaps = (300, 600)
            for kind in ("CNN8", "CNN9"):
                for direction in ("forward", "reversed"):
                    cfg = train.TrainConfig(direction=direction, conv_kind=kind, n_steps=max(snaps),
                                            batch_size=25, learning_rate=0.05, seed=5)
                    traj = train_snapshots(cfg, fs_tr, fs_te, set(snaps))
                    line = " ".join(f"{s}:[{v[0]:.2f}/{v[1]:.2f}]" for s, v in sorted(traj.items()))
                    print(f"    {kind} {direction:8s} samp/exp: {line}", flush=True)
    print(f"total {time.time()-t0:.0f}s")
