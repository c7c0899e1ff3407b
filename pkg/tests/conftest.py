"""Shared test helpers: an explicit full-matrix circuit oracle, independent
of the simulator's stride kernels, plus small dataset fixtures."""
from __future__ import annotations

import numpy as np
import pytest

from vqclab import gates
from vqclab.circuits import Circuit, bound_angle


def embed_one(u2: np.ndarray, wire: int, n: int) -> np.ndarray:
    """Full 2^n matrix of a 1-wire gate via Kronecker products (wire 0 = MSB)."""
    m = np.eye(1, dtype=complex)
    for w in range(n):
        m = np.kron(m, u2 if w == wire else np.eye(2))
    return m


def embed_two(u4: np.ndarray, wires: tuple[int, int], n: int) -> np.ndarray:
    """Full 2^n matrix of a 2-wire gate by explicit basis bookkeeping."""
    a, b = wires
    dim = 1 << n
    m = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        bits = [(col >> (n - 1 - w)) & 1 for w in range(n)]
        local = 2 * bits[a] + bits[b]
        for target in range(4):
            amp = u4[target, local]
            if amp == 0:
                continue
            new_bits = list(bits)
            new_bits[a], new_bits[b] = target >> 1, target & 1
            row = sum(bit << (n - 1 - w) for w, bit in enumerate(new_bits))
            m[row, col] += amp
    return m


def circuit_matrix(circuit: Circuit, params=None) -> np.ndarray:
    """Brute-force 2^n x 2^n unitary of a circuit (test oracle)."""
    n = circuit.n_qubits
    m = np.eye(1 << n, dtype=complex)
    for op in circuit.ops:
        u = gates.gate_matrix(op.kind, bound_angle(op, params))
        if len(op.wires) == 1:
            full = embed_one(u, op.wires[0], n)
        else:
            full = embed_two(u, op.wires, n)
        m = full @ m
    return m


def random_state(rng: np.random.Generator, n: int) -> np.ndarray:
    amps = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return amps / np.linalg.norm(amps)


def random_product_state_circuit(rng: np.random.Generator, n: int) -> Circuit:
    """Random per-wire RX/RY preparation (a product state, no parameters)."""
    from vqclab.circuits import GateOp

    ops = []
    for w in range(n):
        ops.append(GateOp("rx", (w,), angle=float(rng.uniform(0, np.pi))))
        ops.append(GateOp("ry", (w,), angle=float(rng.uniform(0, np.pi))))
    return Circuit(n, tuple(ops), 0)


@pytest.fixture(scope="session")
def synthetic_data_dir(tmp_path_factory):
    """Small synthetic dataset pair in IDX format, shared across tests."""
    from vqclab import synth

    base = tmp_path_factory.mktemp("data")
    synth.make_synthetic_idx(base, "digits", n_train=1200, n_test=400)
    synth.make_synthetic_idx(base, "fashion", n_train=1200, n_test=400)
    return base
