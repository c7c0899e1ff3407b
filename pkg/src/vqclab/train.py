"""Training loops for both directions.

Standard direction: embedding then QCNN, MSE on the wire-0 outcome
probability against the class target.  Reversed direction: target encoding,
adjoint QCNN, adjoint embedding, MSE of all Pauli-Z expectations against
the ground state.  Either way the learned parameter vector binds directly
into the forward circuit for inference and into the reversed circuit for
receptive-field analysis; the adjoint handles angle negation internally.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .circuits import AnsatzConfig, Circuit, GateOp, adjoint, build_qcnn
from .data import FeatureSet
from .grad import CircuitBatch

MODEL_FORMAT = "vqclab-model"
MODEL_VERSION = 1


class TrainingDivergedError(RuntimeError):
    def __init__(self, step: int):
        super().__init__(f"non-finite loss at step {step}")
        self.step = step


@dataclass(frozen=True)
class TrainConfig:
    direction: str = "forward"
    conv_kind: str = "CNN8"
    n_qubits: int = 8
    optimizer: str = "adam"  # "adam" or "sgd" (plain gradient descent)
    learning_rate: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    batch_size: int = 25
    n_steps: int = 200
    seed: int = 0
    wrap_pairs: bool = True

    def __post_init__(self):
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError(f"optimizer must be 'adam' or 'sgd', got {self.optimizer!r}")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size < 1 or self.n_steps < 0:
            raise ValueError("batch_size must be >= 1 and n_steps >= 0")

    @property
    def ansatz(self) -> AnsatzConfig:
        return AnsatzConfig(
            conv_kind=self.conv_kind,
            n_qubits=self.n_qubits,
            direction=self.direction,
            wrap_pairs=self.wrap_pairs,
        )


@dataclass
class TrainedModel:
    config: TrainConfig
    params: np.ndarray
    loss_history: list[float] = field(default_factory=list)
    seeds: dict[str, int] = field(default_factory=dict)


def forward_loss(expectation_z0: float, label: int) -> tuple[float, float]:
    """(p - t)^2 with p = (1 + <Z_0>)/2 and t = 1 for class 0, 0 for class 1.

    Returns the loss and its derivative w.r.t. the expectation value.
    """
    p = 0.5 * (1.0 + expectation_z0)
    t = 1.0 if label == 0 else 0.0
    return (p - t) ** 2, (p - t)


def reversed_loss(expectations_z: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean squared distance of all wire expectations from the ground state."""
    e = np.asarray(expectations_z, dtype=float)
    diff = e - 1.0
    return float(np.mean(diff**2)), (2.0 / len(e)) * diff


def _derived_seeds(seed: int) -> dict[str, int]:
    init_ss, batch_ss = np.random.SeedSequence(seed).spawn(2)
    return {
        "master": int(seed),
        "init": int(init_ss.generate_state(1)[0]),
        "batch": int(batch_ss.generate_state(1)[0]),
    }


def training_batch(config: TrainConfig, features: FeatureSet) -> tuple[CircuitBatch, list]:
    """All sample circuits of a run as one skeleton-sharing batch.

    Forward: per-sample embedding angles feed a shared QCNN.  Reversed: the
    target encoding is written as RX(pi * label) on the measured wire (a
    global phase away from the Pauli-X encoding, so every expectation
    matches), then the adjoint QCNN, then the adjoint embedding with the
    sample's negated angles.
    """
    qcnn = build_qcnn(config.ansatz)
    n = config.n_qubits
    feats = features.features
    if feats.shape[1] != 2 * n:
        raise ValueError(f"need {2 * n} features per sample, got {feats.shape[1]}")
    if config.direction == "forward":
        ops = [GateOp("rx", (w,)) for w in range(n)]
        ops += [GateOp("ry", (w,)) for w in range(n)]
        ops += list(qcnn.ops)
        angles = np.zeros((len(feats), len(ops)))
        angles[:, : 2 * n] = feats
        observables = [("Z", 0)]
    else:
        adj_ops = adjoint(qcnn).ops
        ops = [GateOp("rx", (0,))]
        ops += list(adj_ops)
        ops += [GateOp("ry", (w,)) for w in reversed(range(n))]
        ops += [GateOp("rx", (w,)) for w in reversed(range(n))]
        angles = np.zeros((len(feats), len(ops)))
        angles[:, 0] = np.pi * features.labels
        base = 1 + len(adj_ops)
        for j, w in enumerate(reversed(range(n))):
            angles[:, base + j] = -feats[:, n + w]
            angles[:, base + n + j] = -feats[:, w]
        observables = [("Z", w) for w in range(n)]
    template = Circuit(n, tuple(ops), qcnn.param_count)
    return CircuitBatch(template, angles), observables


def _forward_batch_loss(labels: np.ndarray):
    def loss_fn(values: np.ndarray):
        p = 0.5 * (1.0 + values[:, 0])
        t = np.where(labels == 0, 1.0, 0.0)
        loss = float(np.mean((p - t) ** 2))
        dloss = ((p - t) / len(labels))[:, None]  # dloss/dE, (B, 1)
        return loss, dloss

    return loss_fn


def _reversed_batch_loss(values: np.ndarray):
    diff = values - 1.0
    loss = float(np.mean(diff**2))
    dloss = (2.0 / values.shape[1]) * diff / len(values)
    return loss, dloss


def batch_loss_and_grad(
    config: TrainConfig,
    params: np.ndarray,
    batch: CircuitBatch,
    observables: list,
    labels: np.ndarray,
    indices: np.ndarray,
) -> tuple[float, np.ndarray]:
    """Mean loss and gradient over one mini-batch of sample indices."""
    if config.direction == "forward":
        loss_fn = _forward_batch_loss(labels[indices])
    else:
        loss_fn = _reversed_batch_loss
    loss, grad, _ = batch.loss_and_grad(params, observables, loss_fn, rows=indices)
    return loss, grad


def train(config: TrainConfig, features: FeatureSet) -> TrainedModel:
    """Mini-batch Adam over the chosen direction's circuits."""
    if len(features) == 0:
        raise ValueError("empty feature set")
    seeds = _derived_seeds(config.seed)
    rng_init = np.random.default_rng(seeds["init"])
    rng_batch = np.random.default_rng(seeds["batch"])

    batch_circuits, observables = training_batch(config, features)
    params = rng_init.uniform(0.0, 2.0 * np.pi, batch_circuits.template.param_count)

    m1 = np.zeros_like(params)
    m2 = np.zeros_like(params)
    loss_history: list[float] = []
    batch = min(config.batch_size, len(features))
    for step in range(config.n_steps):
        indices = rng_batch.choice(len(features), size=batch, replace=False)
        loss, grad = batch_loss_and_grad(
            config, params, batch_circuits, observables, features.labels, indices
        )
        if not np.isfinite(loss):
            raise TrainingDivergedError(step)
        loss_history.append(loss)
        if config.optimizer == "adam":
            m1 = config.beta1 * m1 + (1.0 - config.beta1) * grad
            m2 = config.beta2 * m2 + (1.0 - config.beta2) * grad**2
            t = step + 1
            m1_hat = m1 / (1.0 - config.beta1**t)
            m2_hat = m2 / (1.0 - config.beta2**t)
            params = params - config.learning_rate * m1_hat / (np.sqrt(m2_hat) + config.adam_eps)
        else:
            params = params - config.learning_rate * grad
    return TrainedModel(config, params, loss_history, seeds)


# ---------------------------------------------------------------------------
# Persistence: versioned JSON, the unit consumed by eval and the CLI.


def save_model(model: TrainedModel, path) -> None:
    payload = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "config": asdict(model.config),
        "params": [float(v) for v in model.params],
        "loss_history": [float(v) for v in model.loss_history],
        "seeds": model.seeds,
    }
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(json.dumps(payload, indent=1))


def load_model(path) -> TrainedModel:
    payload = json.loads(Path(path).read_text())
    if payload.get("format") != MODEL_FORMAT:
        raise ValueError(f"{path}: not a {MODEL_FORMAT} file")
    if payload.get("version") != MODEL_VERSION:
        raise ValueError(f"{path}: unsupported version {payload.get('version')!r}")
    config = TrainConfig(**payload["config"])
    return TrainedModel(
        config,
        np.asarray(payload["params"], dtype=float),
        [float(v) for v in payload["loss_history"]],
        {k: int(v) for k, v in payload["seeds"].items()},
    )
