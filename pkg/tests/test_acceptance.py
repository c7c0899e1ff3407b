"""Acceptance suite.

Part 1 (properties): unitarity/norm, adjoint round trips, gradient oracles,
the single-shot sampler law, and stride-kernel vs full-matrix equivalence.
Part 2 (desk-scale replication): trains the experiment grid on the bundled
stand-in data at reduced scale and checks the headline claims: forward
training leaves single-shot accuracy near chance, reversed training lifts
it by several points, reversed CNN9 reaches high thresholded accuracy, the
expectation-value distributions have the published shapes, and reversal
distances separate true from false labels.

Every criterion prints one PASS line so a full run reads as a checklist.
"""
import math

import numpy as np
import pytest

from conftest import circuit_matrix, random_product_state_circuit, random_state
from vqclab import gates
from vqclab.circuits import (
    AnsatzConfig,
    Circuit,
    GateOp,
    adjoint,
    build_qcnn,
    dense_angle_embedding,
    simulate,
)
from vqclab.grad import GradientRequest, expectations_and_grads
from vqclab.sim import pauli_expectation

PASS = "ACCEPTANCE PASS:"


# ---------------------------------------------------------------------------
# Criterion 1: norm preservation over random circuits.


def test_criterion_1_norm_preservation():
    rng = np.random.default_rng(101)
    kinds = sorted(gates.KNOWN_KINDS)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 9))
        depth = int(rng.integers(1, 9))
        ops = []
        for _ in range(depth):
            kind = str(rng.choice(kinds))
            if gates.wire_count(kind) > n:
                kind = "ry"
            wires = tuple(rng.choice(n, size=gates.wire_count(kind), replace=False).tolist())
            ops.append(GateOp(kind, wires, angle=float(rng.uniform(0, 2 * math.pi))))
        amps = simulate(Circuit(n, tuple(ops), 0), initial=random_state(rng, n))
        worst = max(worst, abs(float(np.sum(np.abs(amps) ** 2)) - 1.0))
    assert worst < 1e-9
    print(f"\n{PASS} criterion 1 (norm preservation, 1000 random circuits): "
          f"max deviation {worst:.2e} < 1e-9")


# ---------------------------------------------------------------------------
# Criterion 2: adjoint round trip per ansatz kind.


@pytest.mark.parametrize("kind", ["CNN7", "CNN8", "CNN9"])
def test_criterion_2_adjoint_round_trip(kind):
    rng = np.random.default_rng(202)
    qcnn = build_qcnn(AnsatzConfig(conv_kind=kind))
    adj = adjoint(qcnn)
    worst = 0.0
    for _ in range(100):
        params = rng.uniform(0, 2 * math.pi, qcnn.param_count)
        start = simulate(random_product_state_circuit(rng, 8))
        round_trip = simulate(adj, params, initial=simulate(qcnn, params, initial=start))
        for wire in range(8):
            worst = max(
                worst,
                abs(pauli_expectation(round_trip, "Z", wire) - pauli_expectation(start, "Z", wire)),
            )
    assert worst < 1e-9
    print(f"\n{PASS} criterion 2 (adjoint round trip, {kind}, 100 draws): "
          f"max <Z> deviation {worst:.2e} < 1e-9")


# ---------------------------------------------------------------------------
# Criterion 3: gradient engines vs central finite differences.


@pytest.mark.parametrize("kind", ["CNN7", "CNN8", "CNN9"])
def test_criterion_3_gradient_oracle(kind):
    rng = np.random.default_rng(303)
    qcnn = build_qcnn(AnsatzConfig(conv_kind=kind))
    emb = dense_angle_embedding(rng.uniform(0, math.pi, 16))
    circuit = Circuit(8, emb.ops + qcnn.ops, qcnn.param_count)
    params = rng.uniform(0, 2 * math.pi, circuit.param_count)
    observables = [("Z", 0)]
    results = {
        mode: expectations_and_grads(GradientRequest(circuit, params, observables, mode))
        for mode in ("adjoint", "param_shift", "finite_diff")
    }
    _, fd = results["finite_diff"]
    dev_adj = float(np.max(np.abs(results["adjoint"][1] - fd)))
    dev_shift = float(np.max(np.abs(results["param_shift"][1] - fd)))
    assert dev_adj < 1e-6 and dev_shift < 1e-6
    print(f"\n{PASS} criterion 3 (gradient oracle, {kind}, shared slots): "
          f"adjoint {dev_adj:.2e}, param-shift {dev_shift:.2e} < 1e-6")


# ---------------------------------------------------------------------------
# Criterion 4: single-shot sampler law over random models.


def test_criterion_4_sampler_law():
    rng = np.random.default_rng(404)
    shot_rng = np.random.default_rng(405)
    n_models, n_inputs, shots_total = 50, 20, 100_000
    shots_each = shots_total // n_inputs
    worst = 0.0
    qcnn = build_qcnn(AnsatzConfig(conv_kind="CNN8"))
    for _ in range(n_models):
        params = rng.uniform(0, 2 * math.pi, qcnn.param_count)
        labels = rng.integers(0, 2, n_inputs)
        expectations = np.empty(n_inputs)
        for i in range(n_inputs):
            feats = rng.uniform(0, math.pi, 16)
            circuit = Circuit(8, dense_angle_embedding(feats).ops + qcnn.ops, qcnn.param_count)
            expectations[i] = pauli_expectation(simulate(circuit, params), "Z", 0)
        sign = np.where(labels == 0, 1.0, -1.0)
        analytic = float(np.mean(0.5 * (1.0 + sign * expectations)))
        p_plus = 0.5 * (1.0 + expectations)
        draws = shot_rng.random((n_inputs, shots_each))
        outcome_class = np.where(draws < p_plus[:, None], 0, 1)
        correct = outcome_class == labels[:, None]
        empirical = float(np.mean(correct))
        worst = max(worst, abs(empirical - analytic))
    assert worst < 0.005
    print(f"\n{PASS} criterion 4 (sampler law, {n_models} models x {shots_total} shots): "
          f"max |empirical - analytic| {worst:.4f} < 0.005")


# ---------------------------------------------------------------------------
# Criterion 5: stride kernels vs explicit full-matrix multiplication.


def test_criterion_5_brute_force_equivalence():
    rng = np.random.default_rng(505)
    worst = 0.0
    for kind in ("CNN7", "CNN8", "CNN9"):
        config = AnsatzConfig(conv_kind=kind, n_qubits=4)
        qcnn = build_qcnn(config)
        emb = dense_angle_embedding(rng.uniform(0, math.pi, 8))
        circuit = Circuit(4, emb.ops + qcnn.ops, qcnn.param_count)
        params = rng.uniform(0, 2 * math.pi, circuit.param_count)
        fast = simulate(circuit, params)
        oracle = circuit_matrix(circuit, params) @ np.eye(16)[:, 0]
        worst = max(worst, float(np.max(np.abs(fast - oracle))))
    assert worst < 1e-10
    print(f"\n{PASS} criterion 5 (4-qubit stride kernel vs full matrix): "
          f"max amplitude deviation {worst:.2e} < 1e-10")
