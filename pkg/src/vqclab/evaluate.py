"""Inference-time metrics and analyses.

Accuracy comes in two flavors: thresholding the exact wire-0 expectation at
zero, and drawing a single computational-basis shot per input.  Models from
either training direction are evaluated the same way (forward circuit); the
reversed circuit is additionally used to extract the learned class centers
and per-input reversal distances.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .circuits import Circuit, adjoint, build_qcnn, simulate, target_encoding
from .data import FeatureSet
from .grad import CircuitBatch
from .sim import pauli_expectation
from .train import TrainConfig, TrainedModel, training_batch


@dataclass
class EvalReport:
    sampling_accuracy: float
    expectation_accuracy: float
    per_input: list[tuple[int, float, int]]  # (label, <Z_0>, sampled outcome)
    seeds: dict[str, int] = field(default_factory=dict)


@dataclass
class ReceptiveField:
    center_0: np.ndarray   # (16,) input-space coordinates in [0, pi]
    center_1: np.ndarray
    distances: np.ndarray  # (N, 2): reversal distance per hypothesized label
    labels: np.ndarray     # (N,) true labels


def _forward_batch(model: TrainedModel, features: FeatureSet) -> CircuitBatch:
    inference_config = TrainConfig(
        direction="forward",
        conv_kind=model.config.conv_kind,
        n_qubits=model.config.n_qubits,
        wrap_pairs=model.config.wrap_pairs,
    )
    batch, _ = training_batch(inference_config, features)
    return batch


def predict_expectations(model: TrainedModel, features: FeatureSet) -> np.ndarray:
    """<Z_0> of the forward circuit for every input."""
    batch = _forward_batch(model, features)
    return batch.expectations(model.params, [("Z", 0)])[:, 0]


def classify(expectations_z0: np.ndarray) -> np.ndarray:
    """Threshold rule: positive -> class 0, negative -> class 1.

    Exactly zero goes to class 1 (a measure-zero tie, fixed for determinism).
    """
    return np.where(np.asarray(expectations_z0) > 0.0, 0, 1)


def expectation_accuracy(model: TrainedModel, features: FeatureSet) -> float:
    e = predict_expectations(model, features)
    return float(np.mean(classify(e) == features.labels))


def sampling_accuracy(
    model: TrainedModel,
    features: FeatureSet,
    rng: np.random.Generator,
    shots_per_input: int = 1,
) -> float:
    """Single-shot accuracy: one Pauli-Z sample of wire 0 per input.

    With ``shots_per_input`` > 1 the per-input correctness probability is
    estimated instead (diagnostic mode); each shot consumes one uniform
    variate, in input order.
    """
    e = predict_expectations(model, features)
    p_plus = 0.5 * (1.0 + e)
    correct = np.empty(len(e))
    for i, (p, label) in enumerate(zip(p_plus, features.labels)):
        draws = rng.random(shots_per_input)
        outcomes = np.where(draws < p, 1, -1)
        predicted = np.where(outcomes == 1, 0, 1)
        correct[i] = np.mean(predicted == label)
    return float(np.mean(correct))


def evaluate(model: TrainedModel, features: FeatureSet, sample_seed: int = 0) -> EvalReport:
    """Both accuracies plus the per-input record, with a replayable seed."""
    e = predict_expectations(model, features)
    predicted = classify(e)
    rng = np.random.default_rng(sample_seed)
    outcomes = np.where(rng.random(len(e)) < 0.5 * (1.0 + e), 1, -1)
    sampled_class = np.where(outcomes == 1, 0, 1)
    report = EvalReport(
        sampling_accuracy=float(np.mean(sampled_class == features.labels)),
        expectation_accuracy=float(np.mean(predicted == features.labels)),
        per_input=[
            (int(lab), float(ez), int(out))
            for lab, ez, out in zip(features.labels, e, outcomes)
        ],
        seeds={"sample": int(sample_seed)},
    )
    return report


def expectation_histogram(model: TrainedModel, features: FeatureSet) -> dict[int, list[float]]:
    """Raw <Z_0> values grouped by true class, for external plotting."""
    e = predict_expectations(model, features)
    return {
        0: [float(v) for v in e[features.labels == 0]],
        1: [float(v) for v in e[features.labels == 1]],
    }


def _reversed_no_embedding(model: TrainedModel, label: int) -> np.ndarray:
    """State of target encoding followed by the adjoint QCNN."""
    qcnn = build_qcnn(model.config.ansatz)
    circuit = Circuit(
        qcnn.n_qubits,
        target_encoding(label, qcnn.n_qubits).ops + adjoint(qcnn).ops,
        qcnn.param_count,
    )
    return simulate(circuit, model.params)


def center_points(model: TrainedModel) -> tuple[np.ndarray, np.ndarray]:
    """The learned class centers in input-feature coordinates.

    Runs the reversed circuit without the input embedding for each target,
    reads all <X_i> then all <Y_i>, and maps each from [-1, 1] to [0, pi]
    via pi * (1 - v) / 2 (so the identity circuit's center lands at pi/2,
    the midpoint of the embedding's angle range).
    """
    centers = []
    n = model.config.n_qubits
    for label in (0, 1):
        amps = _reversed_no_embedding(model, label)
        values = [pauli_expectation(amps, "X", w) for w in range(n)]
        values += [pauli_expectation(amps, "Y", w) for w in range(n)]
        centers.append(np.pi * (1.0 - np.asarray(values)) / 2.0)
    return centers[0], centers[1]


def reversal_distances(model: TrainedModel, features: FeatureSet) -> ReceptiveField:
    """Angular distance of every input's reversed state from the ground state,
    once per hypothesized label.

    Per wire, a_i = arccos(<Z_i>) (clamped); the distance is the vector
    magnitude sqrt(sum a_i^2).  A perfectly reversed input scores 0.
    """
    n = model.config.n_qubits
    observables = [("Z", w) for w in range(n)]
    distances = np.empty((len(features), 2))
    for label in (0, 1):
        hypothesized = FeatureSet(
            features.features,
            np.full(len(features), label),
            features.class_pair,
        )
        reversed_config = TrainConfig(
            direction="reversed",
            conv_kind=model.config.conv_kind,
            n_qubits=n,
            wrap_pairs=model.config.wrap_pairs,
        )
        batch, _ = training_batch(reversed_config, hypothesized)
        e = batch.expectations(model.params, observables)
        angles = np.arccos(np.clip(e, -1.0, 1.0))
        distances[:, label] = np.sqrt((angles**2).sum(axis=1))
    center_0, center_1 = center_points(model)
    return ReceptiveField(center_0, center_1, distances, features.labels.copy())


# ---------------------------------------------------------------------------
# Aggregation (tables of mean +- std over models).


def aggregate(reports_by_cell: dict, metric: str = "sampling_accuracy") -> dict:
    """Sample mean and standard deviation (n-1 denominator) per cell."""
    out = {}
    for cell, reports in reports_by_cell.items():
        if len(reports) < 2:
            raise ValueError(f"cell {cell!r} needs at least 2 reports, got {len(reports)}")
        values = np.array([getattr(r, metric) for r in reports], dtype=float)
        out[cell] = (float(values.mean()), float(values.std(ddof=1)))
    return out


def format_cell(mean: float, std: float) -> str:
    return f"{100.0 * mean:.2f}% ± {100.0 * std:.2f}"


# ---------------------------------------------------------------------------
# Exports.


def report_to_json(report: EvalReport, path) -> None:
    payload = {
        "sampling_accuracy": report.sampling_accuracy,
        "expectation_accuracy": report.expectation_accuracy,
        "seeds": report.seeds,
        "per_input": [
            {"label": lab, "expectation_z0": ez, "outcome": out}
            for lab, ez, out in report.per_input
        ],
    }
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(json.dumps(payload, indent=1))


def report_from_json(path) -> EvalReport:
    payload = json.loads(Path(path).read_text())
    return EvalReport(
        payload["sampling_accuracy"],
        payload["expectation_accuracy"],
        [(r["label"], r["expectation_z0"], r["outcome"]) for r in payload["per_input"]],
        {k: int(v) for k, v in payload.get("seeds", {}).items()},
    )


def report_to_csv(report: EvalReport, path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["label", "expectation_z0", "outcome"])
        for lab, ez, out in report.per_input:
            writer.writerow([lab, repr(ez), out])


def histogram_to_csv(histogram: dict[int, list[float]], path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["value", "label"])
        for label in (0, 1):
            for value in histogram[label]:
                writer.writerow([repr(value), label])


def receptive_field_to_csv(rf: ReceptiveField, centers_path, distances_path) -> None:
    with open(centers_path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow([f"f{i}" for i in range(len(rf.center_0))])
        writer.writerow([repr(float(v)) for v in rf.center_0])
        writer.writerow([repr(float(v)) for v in rf.center_1])
    with open(distances_path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["d_center0", "d_center1", "label"])
        for (d0, d1), lab in zip(rf.distances, rf.labels):
            writer.writerow([repr(float(d0)), repr(float(d1)), int(lab)])
