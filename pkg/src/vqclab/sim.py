"""Dense statevector simulation: state creation, gate application, Pauli
expectation values, and single-shot sampling.

The basis-index convention is fixed here once for the whole package:
**wire 0 is the most significant bit** of the basis index, so for n wires
the basis state |b_0 b_1 ... b_{n-1}> sits at index sum_w b_w << (n-1-w).

Gates are applied with stride-indexed kernels that touch only the affected
amplitude pairs/quads; correctness of the kernels is anchored by an explicit
full-matrix oracle in the test suite.  The kernels index the *last* axis, so
they also work on stacked batches of statevectors.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .gates import PAULI, wire_count

#: Tolerance on | ||amplitudes||^2 - 1 | for a valid state.
NORM_ATOL = 1e-10
#: Tolerance on || U^dag U - I ||_max for a valid gate matrix.
UNITARY_ATOL = 1e-12
#: Practical bound on the register size (dense amplitudes).
MAX_QUBITS = 24


class SimulationError(RuntimeError):
    """Amplitudes went non-finite or a resource bound was exceeded."""


def _n_qubits_of(amps: np.ndarray) -> int:
    dim = amps.shape[-1]
    n = dim.bit_length() - 1
    if 1 << n != dim:
        raise ValueError(f"amplitude axis of length {dim} is not a power of two")
    return n


def _bitpos(n_qubits: int, wire: int) -> int:
    """Bit position of a wire in the basis index (wire 0 = MSB)."""
    return n_qubits - 1 - wire


def _check_wire(n_qubits: int, wire: int) -> None:
    if not 0 <= wire < n_qubits:
        raise ValueError(f"wire {wire} out of range for {n_qubits} qubits")


def _qubit_view(amps: np.ndarray, wire: int) -> np.ndarray:
    """Reshape so the wire's basis bit becomes its own axis (index -2).

    The amplitude axis of length 2^n splits into (blocks, 2, stride); the
    result is a view, so writes go straight into ``amps``.
    """
    if not amps.flags.c_contiguous:
        raise ValueError("amplitude buffers must be C-contiguous")
    n = _n_qubits_of(amps)
    p = _bitpos(n, wire)
    return amps.reshape(amps.shape[:-1] + (1 << (n - 1 - p), 2, 1 << p))


def _two_qubit_blocks(amps: np.ndarray, wire_a: int, wire_b: int) -> list[np.ndarray]:
    """Views of the four local-basis blocks |ab> in {00, 01, 10, 11}, where
    wire_a is the high bit of the local index."""
    if not amps.flags.c_contiguous:
        raise ValueError("amplitude buffers must be C-contiguous")
    n = _n_qubits_of(amps)
    pa, pb = _bitpos(n, wire_a), _bitpos(n, wire_b)
    hi, lo = (pa, pb) if pa > pb else (pb, pa)
    v = amps.reshape(
        amps.shape[:-1] + (1 << (n - 1 - hi), 2, 1 << (hi - 1 - lo), 2, 1 << lo)
    )
    if pa > pb:
        order = ((0, 0), (0, 1), (1, 0), (1, 1))
    else:
        order = ((0, 0), (1, 0), (0, 1), (1, 1))
    return [v[..., i, :, j, :] for i, j in order]


def _apply_1q(amps: np.ndarray, u: np.ndarray, wire: int) -> None:
    """In-place 2x2 gate on one wire; batched over leading axes."""
    v = _qubit_view(amps, wire)
    a, b = v[..., 0, :], v[..., 1, :]
    new_a = u[0, 0] * a + u[0, 1] * b
    new_b = u[1, 0] * a + u[1, 1] * b
    v[..., 0, :] = new_a
    v[..., 1, :] = new_b


def _apply_2q(amps: np.ndarray, u: np.ndarray, wire_a: int, wire_b: int) -> None:
    """In-place 4x4 gate; wire_a is the high bit of the local 2-bit index."""
    blocks = _two_qubit_blocks(amps, wire_a, wire_b)
    new = [
        u[r, 0] * blocks[0] + u[r, 1] * blocks[1] + u[r, 2] * blocks[2] + u[r, 3] * blocks[3]
        for r in range(4)
    ]
    for blk, val in zip(blocks, new):
        blk[...] = val


def apply_matrix(amps: np.ndarray, u: np.ndarray, wires: tuple[int, ...]) -> None:
    """In-place unitary application on raw amplitudes (no validation)."""
    if len(wires) == 1:
        _apply_1q(amps, u, wires[0])
    else:
        _apply_2q(amps, u, wires[0], wires[1])


def apply_pauli(amps: np.ndarray, axis: str, wire: int) -> np.ndarray:
    """sigma_axis on one wire; returns a new array."""
    out = amps.copy()
    _apply_1q(out, PAULI[axis], wire)
    return out


def apply_rotation_rows(amps: np.ndarray, axis: str, angles: np.ndarray, wire: int) -> None:
    """In-place Pauli rotation with a separate angle per leading row.

    ``angles`` has the length of the first axis of ``amps``; trailing axes
    (observable stacks, the amplitude axis) broadcast.
    """
    v = _qubit_view(amps, wire)
    a, b = v[..., 0, :], v[..., 1, :]
    col = np.asarray(angles, dtype=float).reshape((-1,) + (1,) * (a.ndim - 1))
    c, s = np.cos(col / 2.0), np.sin(col / 2.0)
    if axis == "X":
        new_a = c * a - 1j * s * b
        new_b = -1j * s * a + c * b
    elif axis == "Y":
        new_a = c * a - s * b
        new_b = s * a + c * b
    elif axis == "Z":
        new_a = (c - 1j * s) * a
        new_b = (c + 1j * s) * b
    else:
        raise ValueError(f"unknown Pauli axis {axis!r}")
    v[..., 0, :] = new_a
    v[..., 1, :] = new_b


def zero_bit_block(amps: np.ndarray, wire: int, bit: int) -> None:
    """Zero every amplitude whose wire bit has the given value (in place)."""
    _qubit_view(amps, wire)[..., bit, :] = 0.0


def z_plus_probability(amps: np.ndarray, wire: int) -> float:
    """P(+1) of a computational-basis measurement, by basis-index summation."""
    v = _qubit_view(amps, wire)
    return float(np.sum(np.abs(v[..., 0, :]) ** 2))


def pauli_expectation(amps: np.ndarray, axis: str, wire: int) -> float:
    """Exact <sigma_axis> on one wire of a raw amplitude vector."""
    if axis == "Z":
        return 2.0 * z_plus_probability(amps, wire) - 1.0
    return float(np.vdot(amps, apply_pauli(amps, axis, wire)).real)


def pauli_expectation_rows(amps: np.ndarray, axis: str, wire: int) -> np.ndarray:
    """<sigma_axis> per leading row of a stacked amplitude array."""
    if axis == "Z":
        v = _qubit_view(amps, wire)
        block = v[..., 0, :]
        p_plus = np.sum(np.abs(block) ** 2, axis=(-2, -1))
        return 2.0 * p_plus - 1.0
    return np.einsum("...d,...d->...", amps.conj(), apply_pauli(amps, axis, wire)).real


# ---------------------------------------------------------------------------
# Value-semantics surface.


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized complex amplitudes over the 2^n_qubits basis states."""

    n_qubits: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        object.__setattr__(self, "amplitudes", amps)
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise SimulationError(
                f"n_qubits={self.n_qubits} outside supported range [1, {MAX_QUBITS}]"
            )
        if amps.shape != (1 << self.n_qubits,):
            raise ValueError(
                f"expected {1 << self.n_qubits} amplitudes, got shape {amps.shape}"
            )
        norm_sq = float(np.sum(np.abs(amps) ** 2))
        if abs(norm_sq - 1.0) > NORM_ATOL:
            raise ValueError(f"state not normalized: ||amps||^2 = {norm_sq!r}")


@dataclass(frozen=True, eq=False)
class GateMatrix:
    """Unitary 2x2 or 4x4 matrix acting on one or two wires."""

    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        u = np.asarray(self.entries, dtype=complex)
        object.__setattr__(self, "entries", u)
        if u.shape not in ((2, 2), (4, 4)):
            raise ValueError(f"gate must be 2x2 or 4x4, got shape {u.shape}")
        dev = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))
        if dev > UNITARY_ATOL:
            raise ValueError(f"matrix is not unitary (deviation {dev:.3e})")

    @property
    def dimension(self) -> int:
        return self.entries.shape[0]


def ground_state(n_qubits: int) -> StateVector:
    """|0...0>: amplitude 1 at basis index 0."""
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise SimulationError(
            f"n_qubits={n_qubits} outside supported range [1, {MAX_QUBITS}]"
        )
    amps = np.zeros(1 << n_qubits, dtype=complex)
    amps[0] = 1.0
    return StateVector(n_qubits, amps)


def apply_gate(state: StateVector, gate: GateMatrix, wires: tuple[int, ...]) -> StateVector:
    """Apply a gate at the given wires; returns a new validated state."""
    wires = tuple(wires)
    if len(set(wires)) != len(wires):
        raise ValueError(f"wire indices must be distinct, got {wires}")
    for w in wires:
        _check_wire(state.n_qubits, w)
    if gate.dimension != (2 if len(wires) == 1 else 4):
        raise ValueError(
            f"gate dimension {gate.dimension} does not match {len(wires)} wire(s)"
        )
    amps = state.amplitudes.copy()
    apply_matrix(amps, gate.entries, wires)
    return StateVector(state.n_qubits, amps)


def expectation(state: StateVector, axis: str, wire: int) -> float:
    """Exact <sigma_axis> on a wire; always in [-1, +1]."""
    if axis not in PAULI:
        raise ValueError(f"unknown Pauli axis {axis!r}")
    _check_wire(state.n_qubits, wire)
    value = pauli_expectation(state.amplitudes, axis, wire)
    return float(min(1.0, max(-1.0, value)))


def sample_wire(state: StateVector, wire: int, rng: np.random.Generator) -> int:
    """One computational-basis shot: +1 with probability (1 + <Z>)/2.

    Consumes exactly one uniform variate from ``rng``, so runs are
    reproducible under a fixed seed.
    """
    _check_wire(state.n_qubits, wire)
    p_plus = z_plus_probability(state.amplitudes, wire)
    return 1 if rng.random() < p_plus else -1
