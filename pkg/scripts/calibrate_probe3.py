"""Scratch probe: accuracy trajectories vs training step budget."""
import sys
import tempfile
import time

import numpy as np

sys.path.insert(0, "src")
from vqclab import data, synth, train
from vqclab.grad import CircuitBatch


def eval_model_params(config, params, fs):
    cfg_f = train.TrainConfig(direction="forward", conv_kind=config.conv_kind, seed=0)
    batch, _ = train.training_batch(cfg_f, fs)
    e = batch.expectations(params, [("Z", 0)])[:, 0]
    exp_acc = float(np.mean(np.where(e > 0, 0, 1) == fs.labels))
    s = np.where(fs.labels == 0, 1.0, -1.0)
    samp = float(np.mean(0.5 * (1 + s * e)))
    return samp, exp_acc, float(e[fs.labels == 0].mean()), float(e[fs.labels == 1].mean())


def train_with_snapshots(config, features, fs_te, snapshots):
    """Replica of train.train that records eval metrics at snapshot steps."""
    seeds = train._derived_seeds(config.seed)
    rng_init = np.random.default_rng(seeds["init"])
    rng_batch = np.random.default_rng(seeds["batch"])
    batch_circuits, observables = train.training_batch(config, features)
    params = rng_init.uniform(0.0, 2.0 * np.pi, batch_circuits.template.param_count)
    m1 = np.zeros_like(params); m2 = np.zeros_like(params)
    out = {}
    batch = min(config.batch_size, len(features))
    for step in range(max(snapshots)):
        idx = rng_batch.choice(len(features), size=batch, replace=False)
        loss, grad = train.batch_loss_and_grad(config, params, batch_circuits,
                                               observables, features.labels, idx)
        m1 = config.beta1 * m1 + (1 - config.beta1) * grad
        m2 = config.beta2 * m2 + (1 - config.beta2) * grad ** 2
        t = step + 1
        params = params - config.learning_rate * (m1 / (1 - config.beta1 ** t)) / (
            np.sqrt(m2 / (1 - config.beta2 ** t)) + config.adam_eps)
        if (step + 1) in snapshots:
            out[step + 1] = (loss,) + eval_model_params(config, params, fs_te)
    return out


if __name__ == "__main__":
    t0 = time.time()
    tmp = tempfile.mkdtemp()
    synth.make_synthetic_idx(tmp, "digits", n_train=6000, n_test=1500)
    tr = data.load_dataset(tmp, "digits", "train")
    te = data.load_dataset(tmp, "digits", "test")
    snapshots = (25, 50, 75, 100, 150, 200, 300)
    for pair in [(3, 8), (0, 1)]:
        trs = data.subsample(tr, 2000, np.random.default_rng(11))
        tes = data.subsample(te, 500, np.random.default_rng(12))
        pca = data.fit_pca(trs, pair)
        fs_tr = data.featurize(pca, trs, pair)
        fs_te = data.featurize(pca, tes, pair)
        for kind in ("CNN8", "CNN9"):
            for direction in ("forward", "reversed"):
                for seed in (5, 6):
                    cfg = train.TrainConfig(direction=direction, conv_kind=kind,
                                            n_steps=max(snapshots), batch_size=25,
                                            learning_rate=0.05, seed=seed)
                    traj = train_with_snapshots(cfg, fs_tr, fs_te, set(snapshots))
                    line = " ".join(
                        f"{s}:[samp={v[1]:.2f} exp={v[2]:.2f}]" for s, v in sorted(traj.items())
                    )
                    print(f"pair{pair} {kind} {direction:8s} seed{seed}: {line}", flush=True)
    print(f"total {time.time()-t0:.0f}s")
