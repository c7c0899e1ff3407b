"""vqclab: exact statevector laboratory for QCNN binary classifiers that can
be trained in the standard direction or in reverse (through the adjoint
circuit), with single-shot and expectation-value evaluation."""

from .sim import StateVector, GateMatrix, ground_state, apply_gate, expectation, sample_wire
from .circuits import (
    AnsatzConfig,
    Circuit,
    GateOp,
    adjoint,
    build_qcnn,
    build_reversed,
    conv_block,
    dense_angle_embedding,
    pooling_block,
    simulate,
    target_encoding,
)
from .grad import GradientRequest, expectations_and_grads

__all__ = [
    "AnsatzConfig",
    "Circuit",
    "GateMatrix",
    "GateOp",
    "GradientRequest",
    "StateVector",
    "adjoint",
    "apply_gate",
    "build_qcnn",
    "build_reversed",
    "conv_block",
    "dense_angle_embedding",
    "expectation",
    "expectations_and_grads",
    "ground_state",
    "pooling_block",
    "sample_wire",
    "simulate",
    "target_encoding",
]

__version__ = "0.1.0"
