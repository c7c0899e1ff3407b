"""Losses, the Adam loop, determinism, persistence."""
import math

import numpy as np
import pytest

from vqclab.data import FeatureSet
from vqclab.train import (
    TrainConfig,
    TrainedModel,
    TrainingDivergedError,
    batch_loss_and_grad,
    forward_loss,
    load_model,
    reversed_loss,
    save_model,
    train,
    training_batch,
)

RNG = np.random.default_rng(2718)


def toy_features(n=30, seed=0, n_qubits=8):
    rng = np.random.default_rng(seed)
    features = rng.uniform(0.2, math.pi - 0.2, size=(n, 2 * n_qubits))
    labels = np.arange(n) % 2
    return FeatureSet(features, labels, (0, 1))


class TestForwardLoss:
    def test_perfect_class0(self):
        loss, _ = forward_loss(1.0, 0)
        assert loss == 0.0

    def test_centered_expectation(self):
        loss, _ = forward_loss(0.0, 0)
        assert loss == 0.25

    def test_half_expectation_quarter_error(self):
        # <Z> = 0.5 maps to p = 0.75: a class-0 shot is wrong 25% of the time
        loss, _ = forward_loss(0.5, 0)
        assert loss == pytest.approx(0.25**2)
        assert 0.5 * (1 + 0.5) == 0.75

    def test_derivative_matches_finite_difference(self):
        h = 1e-7
        for e in (-0.8, -0.1, 0.3, 0.9):
            for label in (0, 1):
                _, de = forward_loss(e, label)
                numeric = (forward_loss(e + h, label)[0] - forward_loss(e - h, label)[0]) / (2 * h)
                assert de == pytest.approx(numeric, abs=1e-6)


class TestReversedLoss:
    def test_ground_state_reached(self):
        loss, grad = reversed_loss(np.ones(8))
        assert loss == 0.0 and np.all(grad == 0.0)

    def test_maximally_wrong(self):
        loss, _ = reversed_loss(-np.ones(8))
        assert loss == 4.0

    def test_single_detuned_wire(self):
        e = np.ones(8)
        e[7] = 0.0
        loss, _ = reversed_loss(e)
        assert loss == pytest.approx(1 / 8)

    def test_gradient_matches_finite_difference(self):
        e = RNG.uniform(-1, 1, 8)
        _, grad = reversed_loss(e)
        h = 1e-7
        for i in range(8):
            bumped = e.copy()
            bumped[i] += h
            numeric = (reversed_loss(bumped)[0] - reversed_loss(e)[0]) / h
            assert grad[i] == pytest.approx(numeric, abs=1e-5)


class TestTrainLoop:
    def test_zero_steps_returns_initialization(self):
        feats = toy_features()
        config = TrainConfig(n_steps=0, seed=11)
        model = train(config, feats)
        assert model.loss_history == []
        # initialization is the seeded uniform draw on [0, 2*pi)
        from vqclab.train import _derived_seeds

        rng = np.random.default_rng(_derived_seeds(11)["init"])
        expected = rng.uniform(0, 2 * math.pi, len(model.params))
        assert np.array_equal(model.params, expected)

    def test_bit_identical_reruns(self):
        feats = toy_features()
        config = TrainConfig(n_steps=12, batch_size=8, seed=3)
        a = train(config, feats)
        b = train(config, feats)
        assert a.loss_history == b.loss_history
        assert np.array_equal(a.params, b.params)
        assert a.seeds == b.seeds

    def test_loss_history_length(self):
        model = train(TrainConfig(n_steps=7, batch_size=4, seed=0), toy_features(12))
        assert len(model.loss_history) == 7

    def test_forward_overfits_single_sample(self):
        feats = toy_features(1, seed=5)
        config = TrainConfig(direction="forward", n_steps=200, batch_size=1,
                             learning_rate=0.05, seed=1)
        model = train(config, feats)
        assert model.loss_history[-1] < model.loss_history[0]
        assert model.loss_history[-1] < 0.01

    def test_reversed_overfits_single_sample(self):
        feats = toy_features(1, seed=6)
        config = TrainConfig(direction="reversed", conv_kind="CNN9", n_steps=300,
                             batch_size=1, learning_rate=0.05, seed=2)
        model = train(config, feats)
        assert model.loss_history[-1] < 0.05

    @pytest.mark.parametrize("direction", ["forward", "reversed"])
    def test_negative_gradient_step_decreases_frozen_batch_loss(self, direction):
        feats = toy_features(20, seed=8)
        config = TrainConfig(direction=direction, conv_kind="CNN8", seed=4)
        batch, observables = training_batch(config, feats)
        params = RNG.uniform(0, 2 * math.pi, batch.template.param_count)
        indices = np.arange(10)
        loss, grad = batch_loss_and_grad(config, params, batch, observables, feats.labels, indices)
        stepped, _ = batch_loss_and_grad(
            config, params - 1e-6 * grad, batch, observables, feats.labels, indices
        )
        assert stepped < loss

    def test_nan_loss_aborts_with_step_index(self, monkeypatch):
        feats = toy_features(8)

        calls = {"n": 0}

        def poisoned(*args, **kwargs):
            calls["n"] += 1
            if calls["n"] >= 3:
                return float("nan"), np.zeros(36)
            return 0.5, np.zeros(36)

        monkeypatch.setattr("vqclab.train.batch_loss_and_grad", poisoned)
        with pytest.raises(TrainingDivergedError) as err:
            train(TrainConfig(n_steps=10, batch_size=4, seed=0), feats)
        assert err.value.step == 2

    def test_empty_features_rejected(self):
        empty = FeatureSet(np.zeros((0, 16)), np.zeros(0, dtype=int), (0, 1))
        with pytest.raises(ValueError, match="empty"):
            train(TrainConfig(), empty)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            TrainConfig(learning_rate=0.0)
        with pytest.raises(ValueError):
            TrainConfig(batch_size=0)
        with pytest.raises(ValueError):
            TrainConfig(optimizer="lbfgs")

    def test_sgd_option_takes_plain_steps(self):
        feats = toy_features(10, seed=2)
        config = TrainConfig(optimizer="sgd", n_steps=2, batch_size=5, seed=3,
                             learning_rate=0.1)
        model = train(config, feats)
        assert len(model.loss_history) == 2
        assert np.all(np.isfinite(model.params))


class TestPersistence:
    def test_round_trip(self, tmp_path):
        model = train(TrainConfig(n_steps=3, batch_size=4, seed=9), toy_features(8))
        path = tmp_path / "model.json"
        save_model(model, path)
        loaded = load_model(path)
        assert loaded.config == model.config
        assert np.array_equal(loaded.params, model.params)
        assert loaded.loss_history == model.loss_history
        assert loaded.seeds == model.seeds

    def test_rejects_foreign_json(self, tmp_path):
        path = tmp_path / "other.json"
        path.write_text('{"format": "something-else", "version": 1}')
        with pytest.raises(ValueError, match="not a"):
            load_model(path)

    def test_rejects_future_version(self, tmp_path):
        model = train(TrainConfig(n_steps=1, batch_size=2, seed=0), toy_features(4))
        path = tmp_path / "model.json"
        save_model(model, path)
        import json

        payload = json.loads(path.read_text())
        payload["version"] = 99
        path.write_text(json.dumps(payload))
        with pytest.raises(ValueError, match="version"):
            load_model(path)


def test_direction_symmetry_of_parameters():
    """A reversed-trained parameter vector binds into the forward circuit
    unchanged (the adjoint handles angle negation internally)."""
    from vqclab.circuits import AnsatzConfig, adjoint, build_qcnn, simulate
    from vqclab.sim import pauli_expectation
    from conftest import random_product_state_circuit

    feats = toy_features(6, seed=13)
    model = train(
        TrainConfig(direction="reversed", conv_kind="CNN8", n_steps=5, batch_size=3, seed=7),
        feats,
    )
    qcnn = build_qcnn(AnsatzConfig(conv_kind="CNN8"))
    start = simulate(random_product_state_circuit(np.random.default_rng(1), 8))
    forward = simulate(qcnn, model.params, initial=start)
    back = simulate(adjoint(qcnn), model.params, initial=forward)
    for wire in range(8):
        assert pauli_expectation(back, "Z", wire) == pytest.approx(
            pauli_expectation(start, "Z", wire), abs=1e-9
        )
