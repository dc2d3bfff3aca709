import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qlime.quantum_sim import (
    AnsatzParams,
    EncodingError,
    ParameterError,
    QuantumState,
    angle_encode,
    apply_ansatz,
    readout_probability,
)


def random_state(rng, n):
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return QuantumState(v / np.linalg.norm(v), n)


def test_encode_zero_is_ground_state():
    s = angle_encode([0.0, 0.0], 1.0, 2)
    np.testing.assert_allclose(s.amplitudes, [1, 0, 0, 0], atol=1e-15)


def test_encode_pi_flips_qubit_zero_only():
    s = angle_encode([np.pi, 0.0], 1.0, 2)
    # qubit 0 is the least significant bit: |q1 q0> = |01> -> index 1
    np.testing.assert_allclose(np.abs(s.amplitudes), [0, 1, 0, 0], atol=1e-15)


def test_encode_half_pi_gives_uniform_superposition():
    s = angle_encode([np.pi / 2, np.pi / 2], 1.0, 2)
    np.testing.assert_allclose(s.amplitudes, [0.5] * 4, atol=1e-15)


def test_encode_scale_multiplies_angle():
    a = angle_encode([0.3, 1.1], 2.0, 2)
    b = angle_encode([0.6, 2.2], 1.0, 2)
    np.testing.assert_allclose(a.amplitudes, b.amplitudes)


def test_encode_dimension_mismatch():
    with pytest.raises(EncodingError):
        angle_encode([0.1, 0.2, 0.3], 1.0, 2)


def test_zero_angles_leave_ground_state():
    out = apply_ansatz(QuantumState.zero(2), AnsatzParams(np.zeros((3, 2))))
    np.testing.assert_allclose(out.amplitudes, [1, 0, 0, 0], atol=1e-15)


@pytest.mark.parametrize("theta", [0.0, 0.4, 1.7, np.pi, -2.3])
def test_single_layer_single_qubit_is_ry(theta):
    out = apply_ansatz(QuantumState.zero(1), AnsatzParams([[theta]]))
    np.testing.assert_allclose(out.amplitudes, [np.cos(theta / 2), np.sin(theta / 2)], atol=1e-15)


def test_cz_chain_signs():
    # RY(pi) on both qubits of |00> gives |11>; the CZ then contributes -1
    out = apply_ansatz(QuantumState.zero(2), AnsatzParams([[np.pi, np.pi]]))
    np.testing.assert_allclose(out.amplitudes, [0, 0, 0, -1], atol=1e-15)


def test_ansatz_shape_mismatch():
    with pytest.raises(ParameterError):
        apply_ansatz(QuantumState.zero(2), AnsatzParams(np.zeros((2, 3))))


def test_params_must_be_finite():
    with pytest.raises(ParameterError):
        AnsatzParams([[0.0, np.nan]])


def test_readout_analytic_cases():
    assert readout_probability(QuantumState.zero(2), 0) == 0.0
    assert readout_probability(angle_encode([np.pi, 0.0], 1.0, 2), 0) == pytest.approx(1.0, abs=1e-15)
    uniform = angle_encode([np.pi / 2, np.pi / 2], 1.0, 2)
    for q in (0, 1):
        assert readout_probability(uniform, q) == pytest.approx(0.5, abs=1e-15)


def test_readout_qubit_out_of_range():
    with pytest.raises(ValueError):
        readout_probability(QuantumState.zero(2), 2)


def test_state_validates_length():
    with pytest.raises(ValueError):
        QuantumState(np.ones(3), 2)


@settings(max_examples=200, deadline=None)
@given(
    n=st.integers(1, 4),
    layers=st.integers(0, 4),
    seed=st.integers(0, 2**32 - 1),
)
def test_norm_and_completeness(n, layers, seed):
    rng = np.random.default_rng(seed)
    state = random_state(rng, n)
    params = AnsatzParams(rng.uniform(-10, 10, size=(layers, n)))
    out = apply_ansatz(state, params)
    assert abs(out.norm - 1) < 1e-10
    probs = out.probabilities()
    for q in range(n):
        p1 = readout_probability(out, q)
        p0 = probs[((np.arange(2**n) >> q) & 1) == 0].sum()
        assert abs(p1 + p0 - 1) < 1e-12


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_ry_period_4pi(seed):
    rng = np.random.default_rng(seed)
    state = random_state(rng, 3)
    angles = rng.uniform(-np.pi, np.pi, size=(2, 3))
    a = apply_ansatz(state, AnsatzParams(angles))
    b = apply_ansatz(state, AnsatzParams(angles + 4 * np.pi))
    np.testing.assert_allclose(a.amplitudes, b.amplitudes, atol=1e-10)


def test_deterministic_bit_identical():
    rng = np.random.default_rng(7)
    state = random_state(rng, 3)
    params = AnsatzParams(rng.normal(size=(2, 3)))
    a, b = apply_ansatz(state, params), apply_ansatz(state, params)
    assert a.amplitudes.tobytes() == b.amplitudes.tobytes()


def test_against_explicit_kron_matrices():
    # independent construction: full 2^n x 2^n operators built with np.kron
    def ry(t):
        return np.array([[np.cos(t / 2), -np.sin(t / 2)], [np.sin(t / 2), np.cos(t / 2)]])

    def on_qubit(m, q, n):
        # qubit 0 is the rightmost kron factor
        ops = [np.eye(2)] * n
        ops[n - 1 - q] = m
        out = np.array([[1.0]])
        for o in ops:
            out = np.kron(out, o)
        return out

    n = 3
    rng = np.random.default_rng(3)
    angles = rng.normal(size=(2, n))
    state = random_state(rng, n)
    cz = np.diag([(-1.0) ** (((k >> 0) & (k >> 1) & 1) + ((k >> 1) & (k >> 2) & 1)) for k in range(2**n)])
    v = state.amplitudes.copy()
    for layer in angles:
        for q in range(n):
            v = on_qubit(ry(layer[q]), q, n) @ v
        v = cz @ v
    np.testing.assert_allclose(apply_ansatz(state, AnsatzParams(angles)).amplitudes, v, atol=1e-12)
