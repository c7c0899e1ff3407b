"""Primitive gate matrices, generators, and differentiation rules.

Conventions used throughout the package:

* Rotations are half-angle: ``R_A(t) = exp(-i t A / 2)`` for a Pauli word A.
* Controlled rotations apply the rotation to the target when the control
  is |1>; gate kind names put the control first in the wire tuple.
* Two-qubit matrices are written in the basis |ab> where the first listed
  wire is the high bit of the local index.
"""
from __future__ import annotations

import math

import numpy as np

_SQ2 = math.sqrt(2.0)

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / _SQ2

PAULI = {"X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z}

# Fixed (non-parameterized) gates; all of these are self-adjoint.
FIXED = {"x": PAULI_X, "y": PAULI_Y, "z": PAULI_Z, "h": HADAMARD}

ROTATIONS = {"rx": "X", "ry": "Y", "rz": "Z"}
CONTROLLED = {"crx": "X", "cry": "Y", "crz": "Z"}
PAULI_WORDS = {"rxx": ("X", "X"), "ryy": ("Y", "Y"), "rzz": ("Z", "Z")}

PARAMETERIZED = frozenset(ROTATIONS) | frozenset(CONTROLLED) | frozenset(PAULI_WORDS)
ONE_WIRE = frozenset(FIXED) | frozenset(ROTATIONS)
TWO_WIRE = frozenset(CONTROLLED) | frozenset(PAULI_WORDS)
KNOWN_KINDS = ONE_WIRE | TWO_WIRE


def rotation_matrix(axis: str, angle: float) -> np.ndarray:
    """2x2 matrix of exp(-i angle sigma_axis / 2)."""
    c, s = math.cos(angle / 2.0), math.sin(angle / 2.0)
    if axis == "X":
        return np.array([[c, -1j * s], [-1j * s, c]])
    if axis == "Y":
        return np.array([[c, -s], [s, c]], dtype=complex)
    if axis == "Z":
        return np.array([[c - 1j * s, 0], [0, c + 1j * s]])
    raise ValueError(f"unknown Pauli axis {axis!r}")


def gate_matrix(kind: str, angle: float = 0.0) -> np.ndarray:
    """Dense matrix (2x2 or 4x4) for a gate kind at the given angle."""
    if kind in FIXED:
        return FIXED[kind]
    if kind in ROTATIONS:
        return rotation_matrix(ROTATIONS[kind], angle)
    if kind in CONTROLLED:
        u = np.eye(4, dtype=complex)
        u[2:, 2:] = rotation_matrix(CONTROLLED[kind], angle)
        return u
    if kind in PAULI_WORDS:
        a, b = PAULI_WORDS[kind]
        word = np.kron(PAULI[a], PAULI[b])
        return math.cos(angle / 2.0) * np.eye(4) - 1j * math.sin(angle / 2.0) * word
    raise ValueError(f"unknown gate kind {kind!r}")


def wire_count(kind: str) -> int:
    if kind in ONE_WIRE:
        return 1
    if kind in TWO_WIRE:
        return 2
    raise ValueError(f"unknown gate kind {kind!r}")


# Parameter-shift reconstruction of d<O>/d(angle) as sum of coeff * <O>(angle + shift).
# Plain Pauli-word rotations have the single frequency 1 in the angle, so the
# familiar two evaluations at +-pi/2 suffice.  Controlled rotations mix the
# frequencies 1/2 and 1 (the generator has eigenvalues {0, +-1/2}), which takes
# the four-term rule below; the two-term rule is wrong for them.
_SHIFT_PLAIN = ((0.5, math.pi / 2), (-0.5, -math.pi / 2))
_C_BIG = (_SQ2 + 1) / (4 * _SQ2)
_C_SMALL = (_SQ2 - 1) / (4 * _SQ2)
_SHIFT_CONTROLLED = (
    (_C_BIG, math.pi / 2),
    (-_C_BIG, -math.pi / 2),
    (-_C_SMALL, 3 * math.pi / 2),
    (_C_SMALL, -3 * math.pi / 2),
)


def shift_rule(kind: str) -> tuple[tuple[float, float], ...]:
    """(coefficient, shift) pairs for the exact parameter-shift derivative."""
    if kind in CONTROLLED:
        return _SHIFT_CONTROLLED
    if kind in PARAMETERIZED:
        return _SHIFT_PLAIN
    raise ValueError(f"gate kind {kind!r} has no parameter")
