"""Gradients of Pauli expectations with respect to circuit parameters.

Three interchangeable engines:

* ``adjoint``     - one forward pass plus one backward sweep over the op
                    list, rolling the ket back gate by gate while the bra
                    (observable-applied state) is rolled back alongside.
* ``param_shift`` - exact shift-rule evaluation per gate occurrence; shared
                    slots accumulate their occurrences' contributions.
* ``finite_diff`` - central differences on the slot vector.  Test oracle
                    only; never used for training.

All engines return the same (values, jacobian) pair and handle slots that
are shared between gates and slots bound with negated sign (adjoint
circuits) via the chain rule.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import gates
from .circuits import Circuit, GateOp, bound_angle, simulate
from .sim import (
    SimulationError,
    apply_matrix,
    apply_pauli,
    apply_rotation_rows,
    pauli_expectation,
    pauli_expectation_rows,
    zero_bit_block,
)

MODES = ("adjoint", "param_shift", "finite_diff")

#: Central-difference step for the finite-difference oracle.
FD_STEP = 1e-5


@dataclass
class GradientRequest:
    circuit: Circuit
    params: np.ndarray
    observables: list[tuple[str, int]] = field(default_factory=list)
    mode: str = "adjoint"

    def __post_init__(self):
        self.params = np.asarray(self.params, dtype=float)
        if len(self.params) != self.circuit.param_count:
            raise ValueError(
                f"circuit has {self.circuit.param_count} parameters, got {len(self.params)}"
            )
        if not self.observables:
            raise ValueError("at least one observable is required")
        for axis, wire in self.observables:
            if axis not in gates.PAULI:
                raise ValueError(f"unknown Pauli axis {axis!r}")
            if not 0 <= wire < self.circuit.n_qubits:
                raise ValueError(f"observable wire {wire} out of range")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")


def expectations_and_grads(req: GradientRequest) -> tuple[np.ndarray, np.ndarray]:
    """Values <O_j> and jacobian d<O_j>/d theta_k for the requested mode."""
    if req.mode == "adjoint":
        return _adjoint(req)
    if req.mode == "param_shift":
        return _param_shift(req)
    return _finite_diff(req)


def _expectations(amps: np.ndarray, observables) -> np.ndarray:
    return np.array([pauli_expectation(amps, axis, wire) for axis, wire in observables])


def _apply_generator(amps: np.ndarray, op: GateOp) -> np.ndarray:
    """G |psi> for the gate's generator, where the gate is exp(-i angle G / 2).

    Plain rotations: the Pauli (word) itself.  Controlled rotations:
    |1><1| on the control tensored with the Pauli on the target.
    """
    kind = op.kind
    if kind in gates.ROTATIONS:
        return apply_pauli(amps, gates.ROTATIONS[kind], op.wires[0])
    if kind in gates.PAULI_WORDS:
        out = amps.copy()
        for axis, wire in zip(gates.PAULI_WORDS[kind], op.wires):
            apply_matrix(out, gates.PAULI[axis], (wire,))
        return out
    if kind in gates.CONTROLLED:
        control, target = op.wires
        out = amps.copy()
        zero_bit_block(out, control, 0)
        apply_matrix(out, gates.PAULI[gates.CONTROLLED[kind]], (target,))
        return out
    raise ValueError(f"gate kind {kind!r} is not differentiable")


def _adjoint(req: GradientRequest) -> tuple[np.ndarray, np.ndarray]:
    circuit, params = req.circuit, req.params
    ket = simulate(circuit, params)
    values = _expectations(ket, req.observables)
    # One bra per observable, swept backward together as a stacked batch.
    bras = np.stack([apply_pauli(ket, axis, wire) for axis, wire in req.observables])
    jac = np.zeros((len(req.observables), circuit.param_count))
    ket = ket.copy()
    for k in range(len(circuit.ops) - 1, -1, -1):
        op = circuit.ops[k]
        if op.slot is not None:
            # d<O>/d(angle) = Im <bra| G |ket>; chain rule adds the bind scale.
            g_ket = _apply_generator(ket, op)
            jac[:, op.slot] += op.scale * (bras.conj() @ g_ket).imag
        u_dag = gates.gate_matrix(op.kind, bound_angle(op, params)).conj().T
        apply_matrix(ket, u_dag, op.wires)
        apply_matrix(bras, u_dag, op.wires)
    return values, jac


def _param_shift(req: GradientRequest) -> tuple[np.ndarray, np.ndarray]:
    circuit, params = req.circuit, req.params
    values = _expectations(simulate(circuit, params), req.observables)
    jac = np.zeros((len(req.observables), circuit.param_count))
    for k, op in enumerate(circuit.ops):
        if op.slot is None:
            continue
        for coeff, shift in gates.shift_rule(op.kind):
            shifted = simulate(circuit, params, offsets={k: shift})
            jac[:, op.slot] += op.scale * coeff * _expectations(shifted, req.observables)
    return values, jac


def _finite_diff(req: GradientRequest) -> tuple[np.ndarray, np.ndarray]:
    circuit, params = req.circuit, req.params
    values = _expectations(simulate(circuit, params), req.observables)
    jac = np.zeros((len(req.observables), circuit.param_count))
    for s in range(circuit.param_count):
        shifted = params.copy()
        shifted[s] = params[s] + FD_STEP
        plus = _expectations(simulate(circuit, shifted), req.observables)
        shifted[s] = params[s] - FD_STEP
        minus = _expectations(simulate(circuit, shifted), req.observables)
        jac[:, s] = (plus - minus) / (2 * FD_STEP)
    return values, jac


# ---------------------------------------------------------------------------
# Vectorized adjoint engine over inputs that share one op skeleton.


class CircuitBatch:
    """Many circuits that differ only in their fixed gate angles, evaluated
    together: slotted ops bind one shared parameter vector, fixed-angle ops
    take their angles per row from an angle matrix.

    This is how a training batch looks (one embedding angle set per sample,
    one ansatz for all), and it is algebraically identical to running the
    per-sample adjoint engine row by row.
    """

    def __init__(self, template: Circuit, fixed_angles: np.ndarray):
        fixed_angles = np.asarray(fixed_angles, dtype=float)
        if fixed_angles.ndim != 2 or fixed_angles.shape[1] != len(template.ops):
            raise ValueError(
                f"angle matrix must be (rows, {len(template.ops)}), got {fixed_angles.shape}"
            )
        for op in template.ops:
            if op.slot is None and op.kind in gates.TWO_WIRE and op.kind in gates.PARAMETERIZED:
                raise ValueError("per-row angles are only supported on one-wire rotations")
        self.template = template
        self.fixed_angles = fixed_angles

    @classmethod
    def from_circuits(cls, circuits) -> "CircuitBatch":
        """Build from per-sample circuits, checking they share a skeleton."""
        circuits = list(circuits)
        template = circuits[0]
        skeleton = [(op.kind, op.wires, op.slot, op.scale) for op in template.ops]
        for c in circuits[1:]:
            if c.n_qubits != template.n_qubits or c.param_count != template.param_count:
                raise ValueError("circuits do not share register/parameter shape")
            if [(op.kind, op.wires, op.slot, op.scale) for op in c.ops] != skeleton:
                raise ValueError("circuits do not share an op skeleton")
        angles = np.array([[op.angle for op in c.ops] for c in circuits])
        return cls(template, angles)

    def __len__(self) -> int:
        return len(self.fixed_angles)

    def _row_angles(self, rows) -> np.ndarray:
        return self.fixed_angles if rows is None else self.fixed_angles[rows]

    def _apply(self, amps, op, angle, inverse=False):
        if op.slot is not None or np.isscalar(angle):
            theta = -angle if inverse else angle
            u = gates.gate_matrix(op.kind, theta)
            if inverse and op.kind not in gates.PARAMETERIZED:
                u = u.conj().T
            apply_matrix(amps, u, op.wires)
        else:
            axis = gates.ROTATIONS[op.kind]
            apply_rotation_rows(amps, axis, -angle if inverse else angle, op.wires[0])

    def _op_angle(self, k, op, params, row_angles):
        if op.slot is not None:
            return op.scale * float(params[op.slot])
        if op.kind in gates.PARAMETERIZED:
            return row_angles[:, k]
        return 0.0

    def states(self, params, rows=None) -> np.ndarray:
        """Final amplitudes, one row per input."""
        row_angles = self._row_angles(rows)
        amps = np.zeros((len(row_angles), 1 << self.template.n_qubits), dtype=complex)
        amps[:, 0] = 1.0
        for k, op in enumerate(self.template.ops):
            self._apply(amps, op, self._op_angle(k, op, params, row_angles))
        if not np.all(np.isfinite(amps.view(float))):
            raise SimulationError("non-finite amplitudes after circuit execution")
        return amps

    def expectations(self, params, observables, rows=None) -> np.ndarray:
        amps = self.states(params, rows)
        return np.stack(
            [pauli_expectation_rows(amps, axis, wire) for axis, wire in observables], axis=1
        )

    def expectations_and_grads(self, params, observables, rows=None):
        """Per-row values (B, m) and jacobians (B, m, P), adjoint mode."""
        row_angles = self._row_angles(rows)
        ket = self.states(params, rows)
        values = np.stack(
            [pauli_expectation_rows(ket, axis, wire) for axis, wire in observables], axis=1
        )
        bras = np.stack([apply_pauli(ket, axis, wire) for axis, wire in observables], axis=1)
        jac = np.zeros((len(row_angles), len(observables), self.template.param_count))
        for k in range(len(self.template.ops) - 1, -1, -1):
            op = self.template.ops[k]
            if op.slot is not None:
                g_ket = _apply_generator(ket, op)
                contrib = np.einsum("bmd,bd->bm", bras.conj(), g_ket).imag
                jac[:, :, op.slot] += op.scale * contrib
            angle = self._op_angle(k, op, params, row_angles)
            self._apply(ket, op, angle, inverse=True)
            self._apply(bras, op, angle, inverse=True)
        return values, jac

    def loss_and_grad(self, params, observables, loss_fn, rows=None):
        """Scalar loss and its parameter gradient in one weighted sweep.

        ``loss_fn(values)`` maps the (B, m) expectations to a scalar loss and
        its derivative array dloss/dE of the same shape.  Equivalent to
        contracting that derivative with the full jacobian, but the backward
        pass carries a single weighted bra per row instead of one per
        observable.
        """
        row_angles = self._row_angles(rows)
        n_rows = len(row_angles)
        ket = self.states(params, rows)
        values = np.stack(
            [pauli_expectation_rows(ket, axis, wire) for axis, wire in observables], axis=1
        )
        loss, weights = loss_fn(values)
        bras = np.zeros_like(ket)
        for j, (axis, wire) in enumerate(observables):
            bras += weights[:, j : j + 1] * apply_pauli(ket, axis, wire)
        # Ket rows and bra rows share every unapply step; fuse them.
        buf = np.concatenate([ket, bras], axis=0)
        ket, bras = buf[:n_rows], buf[n_rows:]
        grad = np.zeros(self.template.param_count)
        for k in range(len(self.template.ops) - 1, -1, -1):
            op = self.template.ops[k]
            if op.slot is not None:
                g_ket = _apply_generator(ket, op)
                grad[op.slot] += op.scale * np.einsum("bd,bd->", bras.conj(), g_ket).imag
            angle = self._op_angle(k, op, params, row_angles)
            if not np.isscalar(angle):
                angle = np.tile(angle, 2)
            self._apply(buf, op, angle, inverse=True)
        return loss, grad, values
