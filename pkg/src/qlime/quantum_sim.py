"""Dense statevector simulation for small qubit registers.

Bit convention: qubit 0 is the least-significant bit of the basis index, so
basis index ``k`` has qubit ``q`` in state ``(k >> q) & 1``.

Besides the single-state API there are ``*_batch`` variants that push a stack
of states (shape ``(batch, 2**n)``) through the same gates. The classifier uses
them to evaluate thousands of inputs at once.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_QUBITS = 4


class EncodingError(ValueError):
    pass


class ParameterError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class QuantumState:
    amplitudes: np.ndarray
    n_qubits: int

    def __post_init__(self) -> None:
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise ValueError(f"n_qubits must be in [1, {MAX_QUBITS}], got {self.n_qubits}")
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (2**self.n_qubits,):
            raise ValueError(
                f"expected {2**self.n_qubits} amplitudes for {self.n_qubits} qubits, got shape {amps.shape}"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def zero(cls, n_qubits: int) -> "QuantumState":
        amps = np.zeros(2**n_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(amps, n_qubits)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True, eq=False)
class AnsatzParams:
    """Rotation angles, one row per layer and one column per qubit."""

    angles: np.ndarray

    def __post_init__(self) -> None:
        angles = np.array(self.angles, dtype=float)
        if angles.ndim != 2:
            raise ParameterError(f"angles must be a (n_layers, n_qubits) matrix, got shape {angles.shape}")
        if not np.all(np.isfinite(angles)):
            raise ParameterError("angles must be finite")
        angles.setflags(write=False)
        object.__setattr__(self, "angles", angles)

    @property
    def n_layers(self) -> int:
        return self.angles.shape[0]

    @property
    def n_qubits(self) -> int:
        return self.angles.shape[1]


def ry_matrix(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]])


def _qubit_axis(qubit: int, n_qubits: int) -> int:
    # C-order reshape puts the most significant bit first.
    return n_qubits - 1 - qubit


def _apply_ry_batch(states: np.ndarray, thetas: np.ndarray, qubit: int, n_qubits: int) -> np.ndarray:
    """Apply RY(thetas[b]) to ``qubit`` of every state ``b`` in the stack."""
    batch = states.shape[0]
    axis = 1 + _qubit_axis(qubit, n_qubits)
    t = np.moveaxis(states.reshape((batch,) + (2,) * n_qubits), axis, 1)
    c = np.cos(thetas / 2).reshape((batch,) + (1,) * n_qubits)
    s = np.sin(thetas / 2).reshape((batch,) + (1,) * n_qubits)
    a0, a1 = t[:, 0:1], t[:, 1:2]
    out = np.concatenate([c * a0 - s * a1, s * a0 + c * a1], axis=1)
    return np.moveaxis(out, 1, axis).reshape(batch, -1)


def _cz_phases(n_qubits: int) -> np.ndarray:
    """Diagonal of the CZ chain on neighbour pairs (0,1), (1,2), ..."""
    idx = np.arange(2**n_qubits)
    phases = np.ones(2**n_qubits)
    for q in range(n_qubits - 1):
        both = ((idx >> q) & 1) & ((idx >> (q + 1)) & 1)
        phases[both == 1] *= -1
    return phases


def angle_encode_batch(X: np.ndarray, scale: float, n_qubits: int) -> np.ndarray:
    """Product states RY(scale * x_i)|0> for each row of ``X``; returns ``(batch, 2**n)``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != n_qubits:
        raise EncodingError(f"feature dimension {X.shape[1]} does not match {n_qubits} qubits")
    if not np.isfinite(scale):
        raise EncodingError(f"scale must be finite, got {scale}")
    half = scale * X / 2
    # single-qubit amplitudes (cos, sin) for each qubit, combined by kron with qubit 0 as the LSB
    states = np.ones((X.shape[0], 1), dtype=complex)
    for q in range(n_qubits):
        local = np.stack([np.cos(half[:, q]), np.sin(half[:, q])], axis=1)
        states = (local[:, :, None] * states[:, None, :]).reshape(X.shape[0], -1)
    return states


def apply_ansatz_batch(states: np.ndarray, params: AnsatzParams, n_qubits: int) -> np.ndarray:
    if params.n_qubits != n_qubits:
        raise ParameterError(f"params cover {params.n_qubits} qubits, state has {n_qubits}")
    states = np.asarray(states, dtype=complex)
    phases = _cz_phases(n_qubits)
    batch = states.shape[0]
    for layer in params.angles:
        for q in range(n_qubits):
            states = _apply_ry_batch(states, np.full(batch, layer[q]), q, n_qubits)
        states = states * phases
    return states


def readout_probability_batch(states: np.ndarray, readout_qubit: int, n_qubits: int) -> np.ndarray:
    if not 0 <= readout_qubit < n_qubits:
        raise ValueError(f"readout qubit {readout_qubit} out of range for {n_qubits} qubits")
    bit_set = ((np.arange(2**n_qubits) >> readout_qubit) & 1).astype(bool)
    probs = np.sum(np.abs(states[:, bit_set]) ** 2, axis=1)
    return np.clip(probs, 0.0, 1.0)


def angle_encode(x, scale: float, n_qubits: int) -> QuantumState:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != n_qubits:
        raise EncodingError(f"expected a feature vector of length {n_qubits}, got shape {x.shape}")
    return QuantumState(angle_encode_batch(x[None, :], scale, n_qubits)[0], n_qubits)


def apply_ansatz(state: QuantumState, params: AnsatzParams) -> QuantumState:
    """Per layer: RY on every qubit, then the CZ chain."""
    out = apply_ansatz_batch(state.amplitudes[None, :], params, state.n_qubits)
    return QuantumState(out[0], state.n_qubits)


def readout_probability(state: QuantumState, readout_qubit: int) -> float:
    """Probability of measuring ``readout_qubit`` as 1."""
    return float(readout_probability_batch(state.amplitudes[None, :], readout_qubit, state.n_qubits)[0])
