"""Circuit IR, the convolution/pooling ansatz family, angle embeddings,
target encoding, and adjoint construction.

A circuit is an ordered list of gate ops.  Parameterized ops either carry a
fixed angle (e.g. embedding gates) or reference a slot in an external
parameter vector; the bound angle is ``scale * params[slot]``, and taking
the adjoint of a circuit flips ``scale`` so that one parameter vector binds
into a circuit and its inverse without transformation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import gates
from .sim import SimulationError, apply_matrix

#: Trainable angles per convolution block, by kind.
CONV_PARAMS = {"CNN7": 10, "CNN8": 10, "CNN9": 15}
#: Trainable angles per pooling block.
POOL_PARAMS = 2

CONV_KINDS = tuple(CONV_PARAMS)
DIRECTIONS = ("forward", "reversed")


@dataclass(frozen=True)
class GateOp:
    """One gate application: kind, wires, and its angle binding.

    ``slot`` indexes the external parameter vector (``None`` for fixed gates
    and fixed-angle rotations); ``angle`` is used only when ``slot`` is None;
    ``scale`` multiplies the slot value at bind time.
    """

    kind: str
    wires: tuple[int, ...]
    slot: int | None = None
    angle: float = 0.0
    scale: float = 1.0


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    ops: tuple[GateOp, ...]
    param_count: int = 0

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))
        for op in self.ops:
            if op.kind not in gates.KNOWN_KINDS:
                raise ValueError(f"unknown gate kind {op.kind!r}")
            if len(op.wires) != gates.wire_count(op.kind):
                raise ValueError(f"{op.kind} takes {gates.wire_count(op.kind)} wire(s), got {op.wires}")
            if len(set(op.wires)) != len(op.wires):
                raise ValueError(f"wires must be distinct, got {op.wires}")
            for w in op.wires:
                if not 0 <= w < self.n_qubits:
                    raise ValueError(f"wire {w} out of range for {self.n_qubits} qubits")
            if op.slot is not None:
                if op.kind not in gates.PARAMETERIZED:
                    raise ValueError(f"{op.kind} cannot reference a parameter slot")
                if not 0 <= op.slot < self.param_count:
                    raise ValueError(f"slot {op.slot} out of range for {self.param_count} parameters")


def bound_angle(op: GateOp, params: np.ndarray | None) -> float:
    if op.slot is None:
        return op.angle
    return op.scale * float(params[op.slot])


def simulate(
    circuit: Circuit,
    params: np.ndarray | None = None,
    *,
    initial: np.ndarray | None = None,
    offsets: dict[int, float] | None = None,
) -> np.ndarray:
    """Run a circuit and return the raw final amplitudes.

    ``offsets`` maps op index -> additive angle offset, used by the
    parameter-shift engine to shift a single gate occurrence.
    """
    if circuit.param_count and (params is None or len(params) != circuit.param_count):
        got = "none" if params is None else str(len(params))
        raise ValueError(f"circuit needs {circuit.param_count} parameters, got {got}")
    if initial is None:
        amps = np.zeros(1 << circuit.n_qubits, dtype=complex)
        amps[0] = 1.0
    else:
        amps = np.array(initial, dtype=complex)
    for k, op in enumerate(circuit.ops):
        angle = bound_angle(op, params)
        if offsets and k in offsets:
            angle += offsets[k]
        apply_matrix(amps, gates.gate_matrix(op.kind, angle), op.wires)
    if not np.all(np.isfinite(amps.view(float))):
        raise SimulationError("non-finite amplitudes after circuit execution")
    return amps


def adjoint_op(op: GateOp) -> GateOp:
    if op.kind in gates.PARAMETERIZED:
        if op.slot is None:
            return replace(op, angle=-op.angle)
        return replace(op, scale=-op.scale)
    return op  # fixed gates here (x, y, z, h) are self-adjoint


def adjoint(circuit: Circuit) -> Circuit:
    """Conjugate-inverse circuit: reversed op order, negated rotation angles."""
    return Circuit(
        circuit.n_qubits,
        tuple(adjoint_op(op) for op in reversed(circuit.ops)),
        circuit.param_count,
    )


# ---------------------------------------------------------------------------
# Ansatz blocks.


@dataclass(frozen=True)
class AnsatzConfig:
    """Shape of the QCNN: which convolution block, register size, direction.

    The layer count is fixed by the register size (each layer halves the
    active wires until one remains), and the parameter count follows from
    the block sizes; both are derived, not stored.
    """

    conv_kind: str = "CNN8"
    n_qubits: int = 8
    direction: str = "forward"
    wrap_pairs: bool = True  # include the (last, first) convolution pair per layer

    def __post_init__(self):
        if self.conv_kind not in CONV_PARAMS:
            raise ValueError(f"conv_kind must be one of {CONV_KINDS}, got {self.conv_kind!r}")
        if self.direction not in DIRECTIONS:
            raise ValueError(f"direction must be one of {DIRECTIONS}, got {self.direction!r}")
        n = self.n_qubits
        if n < 2 or (n & (n - 1)) != 0:
            raise ValueError(f"n_qubits must be a power of two >= 2, got {n}")

    @property
    def n_layers(self) -> int:
        return self.n_qubits.bit_length() - 1

    @property
    def param_count(self) -> int:
        return self.n_layers * (CONV_PARAMS[self.conv_kind] + POOL_PARAMS)


def conv_block(kind: str, wires: tuple[int, int], param_slots) -> tuple[GateOp, ...]:
    """Two-qubit convolution fragment; unitary for any angle assignment.

    CNN7: single-wire RX,RZ pairs around a CRZ in each direction (10 slots).
    CNN8: same skeleton with CRX entanglers (10 slots).
    CNN9: general two-qubit block, (Rot x Rot) . exp(-i(a XX + b YY + c ZZ)/2)
          . (Rot x Rot) with Rot = RZ.RY.RZ (15 slots).
    """
    a, b = wires
    s = list(param_slots)
    if len(s) != CONV_PARAMS[kind]:
        raise ValueError(f"{kind} takes {CONV_PARAMS[kind]} slots, got {len(s)}")
    if kind in ("CNN7", "CNN8"):
        cr = "crz" if kind == "CNN7" else "crx"
        return (
            GateOp("rx", (a,), s[0]),
            GateOp("rx", (b,), s[1]),
            GateOp("rz", (a,), s[2]),
            GateOp("rz", (b,), s[3]),
            GateOp(cr, (b, a), s[4]),
            GateOp("rx", (a,), s[5]),
            GateOp("rx", (b,), s[6]),
            GateOp("rz", (a,), s[7]),
            GateOp("rz", (b,), s[8]),
            GateOp(cr, (a, b), s[9]),
        )
    def rot(wire, s0, s1, s2):
        return (
            GateOp("rz", (wire,), s0),
            GateOp("ry", (wire,), s1),
            GateOp("rz", (wire,), s2),
        )
    return (
        *rot(a, s[0], s[1], s[2]),
        *rot(b, s[3], s[4], s[5]),
        GateOp("rxx", (a, b), s[6]),
        GateOp("ryy", (a, b), s[7]),
        GateOp("rzz", (a, b), s[8]),
        *rot(a, s[9], s[10], s[11]),
        *rot(b, s[12], s[13], s[14]),
    )


def pooling_block(wires: tuple[int, int], param_slots) -> tuple[GateOp, ...]:
    """Concentrate a pair onto its first wire; the second is ignored after.

    Sequence: CRZ from the dropped wire, bit-flip on the dropped wire, CRX
    from the dropped wire.  With zero angles the kept wire is untouched.
    """
    keep, drop = wires
    s = list(param_slots)
    if len(s) != POOL_PARAMS:
        raise ValueError(f"pooling takes {POOL_PARAMS} slots, got {len(s)}")
    return (
        GateOp("crz", (drop, keep), s[0]),
        GateOp("x", (drop,)),
        GateOp("crx", (drop, keep), s[1]),
    )


def _conv_pairs(active: list[int], wrap: bool) -> list[tuple[int, int]]:
    m = len(active)
    pairs = [(active[i], active[i + 1]) for i in range(0, m - 1, 2)]
    if m > 2:
        pairs += [(active[i], active[i + 1]) for i in range(1, m - 1, 2)]
        if wrap:
            pairs.append((active[-1], active[0]))
    return pairs


def build_qcnn(config: AnsatzConfig) -> Circuit:
    """Alternating convolution and pooling layers, halving the active wires
    each layer until only wire 0 remains.

    All convolution instances within a layer share one slot block, and both
    pooling parameters are likewise shared across the layer's pairs.
    """
    n_conv = CONV_PARAMS[config.conv_kind]
    ops: list[GateOp] = []
    active = list(range(config.n_qubits))
    base = 0
    while len(active) > 1:
        conv_slots = range(base, base + n_conv)
        pool_slots = (base + n_conv, base + n_conv + 1)
        for pair in _conv_pairs(active, config.wrap_pairs):
            ops.extend(conv_block(config.conv_kind, pair, conv_slots))
        for i in range(0, len(active) - 1, 2):
            ops.extend(pooling_block((active[i], active[i + 1]), pool_slots))
        active = active[::2]
        base += n_conv + POOL_PARAMS
    assert active == [0]
    return Circuit(config.n_qubits, tuple(ops), base)


def dense_angle_embedding(features) -> Circuit:
    """Encode 2n classical values on n wires: the first n as rotations about
    the X axis, the next n about the Y axis.  Values must lie in [0, pi];
    out-of-range inputs are rejected, not clamped.
    """
    feats = np.asarray(features, dtype=float)
    if feats.ndim != 1 or len(feats) < 2 or len(feats) % 2:
        raise ValueError(f"need an even number (>= 2) of features, got shape {feats.shape}")
    if np.any(feats < 0.0) or np.any(feats > math.pi):
        raise ValueError("features must lie in [0, pi]")
    n = len(feats) // 2
    ops = [GateOp("rx", (w,), angle=float(feats[w])) for w in range(n)]
    ops += [GateOp("ry", (w,), angle=float(feats[n + w])) for w in range(n)]
    return Circuit(n, tuple(ops), 0)


def target_encoding(label: int, n_qubits: int = 8) -> Circuit:
    """Class 0 keeps the register in the ground state; class 1 flips the
    measured wire (wire 0) so <Z_0> = -1."""
    if label not in (0, 1):
        raise ValueError(f"label must be 0 or 1, got {label!r}")
    ops = (GateOp("x", (0,)),) if label == 1 else ()
    return Circuit(n_qubits, ops, 0)


def build_reversed(config: AnsatzConfig, features, label: int) -> Circuit:
    """Target encoding, then the adjoint QCNN, then the adjoint embedding.

    Shares parameter slots with the forward QCNN: the adjoint ops bind the
    negated angles, so one parameter vector serves both directions.
    """
    qcnn = build_qcnn(config)
    emb = dense_angle_embedding(features)
    if emb.n_qubits != config.n_qubits:
        raise ValueError(
            f"{2 * config.n_qubits} features needed for {config.n_qubits} wires, got {2 * emb.n_qubits}"
        )
    enc = target_encoding(label, config.n_qubits)
    ops = enc.ops + adjoint(qcnn).ops + adjoint(emb).ops
    return Circuit(config.n_qubits, ops, qcnn.param_count)


# ---------------------------------------------------------------------------
# Line-oriented text serialization (golden tests, debugging).


def circuit_to_text(circuit: Circuit) -> str:
    lines = [f"qubits {circuit.n_qubits}", f"params {circuit.param_count}"]
    for op in circuit.ops:
        entry = f"{op.kind} {','.join(map(str, op.wires))}"
        if op.slot is not None:
            entry += f" slot={op.slot}"
            if op.scale != 1.0:
                entry += f" scale={op.scale!r}"
        elif op.kind in gates.PARAMETERIZED:
            entry += f" angle={op.angle!r}"
        lines.append(entry)
    return "\n".join(lines) + "\n"


def circuit_from_text(text: str) -> Circuit:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if len(lines) < 2 or not lines[0].startswith("qubits ") or not lines[1].startswith("params "):
        raise ValueError("circuit text must start with 'qubits N' and 'params P' lines")
    n_qubits = int(lines[0].split()[1])
    param_count = int(lines[1].split()[1])
    ops = []
    for ln in lines[2:]:
        parts = ln.split()
        kind, wires = parts[0], tuple(int(w) for w in parts[1].split(","))
        kv = dict(p.split("=", 1) for p in parts[2:])
        op = GateOp(
            kind,
            wires,
            slot=int(kv["slot"]) if "slot" in kv else None,
            angle=float(kv.get("angle", 0.0)),
            scale=float(kv.get("scale", 1.0)),
        )
        ops.append(op)
    return Circuit(n_qubits, tuple(ops), param_count)
