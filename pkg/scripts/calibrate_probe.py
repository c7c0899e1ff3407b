"""Scratch calibration driver: data hardness x training hyperparameters."""
import sys
import tempfile
import time

import numpy as np

sys.path.insert(0, "src")
from vqclab import data, synth, train


def eval_model(m, fs):
    cfg_f = train.TrainConfig(direction="forward", conv_kind=m.config.conv_kind, seed=0)
    batch, _ = train.training_batch(cfg_f, fs)
    e = batch.expectations(m.params, [("Z", 0)])[:, 0]
    exp_acc = float(np.mean(np.where(e > 0, 0, 1) == fs.labels))
    s = np.where(fs.labels == 0, 1.0, -1.0)
    samp = float(np.mean(0.5 * (1 + s * e)))
    return samp, exp_acc, float(e[fs.labels == 0].mean()), float(e[fs.labels == 1].mean())


def run_grid(style_override, lr, steps, batch, pairs, seeds, kinds, n_train=2000, n_test=500):
    synth._DATASET_STYLE["digits"].update(style_override)
    tmp = tempfile.mkdtemp()
    synth.make_synthetic_idx(tmp, "digits", n_train=6000, n_test=1500)
    tr = data.load_dataset(tmp, "digits", "train")
    te = data.load_dataset(tmp, "digits", "test")
    rows = []
    for pair in pairs:
        trs = data.subsample(tr, n_train, np.random.default_rng(11))
        tes = data.subsample(te, n_test, np.random.default_rng(12))
        pca = data.fit_pca(trs, pair)
        fs_tr = data.featurize(pca, trs, pair)
        fs_te = data.featurize(pca, tes, pair)
        for kind in kinds:
            for direction in ("forward", "reversed"):
                for seed in seeds:
                    cfg = train.TrainConfig(direction=direction, conv_kind=kind,
                                            n_steps=steps, batch_size=batch,
                                            learning_rate=lr, seed=seed)
                    m = train.train(cfg, fs_tr)
                    samp, expv, m0, m1 = eval_model(m, fs_te)
                    rows.append((pair, kind, direction, seed, samp, expv, m0, m1))
                    print(f"  pair{pair} {kind} {direction:8s} seed{seed}: "
                          f"samp={samp:.3f} exp={expv:.3f} means=({m0:+.2f},{m1:+.2f})",
                          flush=True)
    # summary per (kind, direction)
    for kind in kinds:
        for direction in ("forward", "reversed"):
            sel = [r for r in rows if r[1] == kind and r[2] == direction]
            samp = np.mean([r[4] for r in sel]); expv = np.mean([r[5] for r in sel])
            print(f"  == {kind} {direction:8s}: samp={samp:.3f} exp={expv:.3f}", flush=True)
    return rows


if __name__ == "__main__":
    t0 = time.time()
    grids = {
        "A: medium data, lr.05 s300": (dict(), 0.05, 300, 25),
        "B: heavy clutter, lr.05 s300": (dict(clutter_bumps=5, clutter_amp=1.3, noise=0.08), 0.05, 300, 25),
    }
    for name, (style, lr, steps, batch) in grids.items():
        print(f"--- {name}", flush=True)
        run_grid(style, lr, steps, batch, pairs=[(3, 8), (0, 1)], seeds=(5, 6), kinds=("CNN8", "CNN9"))
    print(f"total {time.time()-t0:.0f}s")
