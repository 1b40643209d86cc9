import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qamp.errors import ContractViolation, DomainError
from qamp.statevector import StateVector, apply, materialize
from qamp.transforms import (
    Predicate,
    alpha_gate,
    ancilla_oracle,
    invert_state,
    m_gate,
    selective_inversion,
    selective_phase,
    tensor_gate,
    walsh_hadamard,
)

from conftest import hadamard_matrix, kron_all


def induced_register_operator(n: int, f: Predicate) -> np.ndarray:
    """Operator on the n-qubit register with the ancilla held in (|0> - |1>)/sqrt(2)."""
    dim = 1 << n
    full = materialize(ancilla_oracle(n, f))
    minus = np.array([1, -1]) / np.sqrt(2)
    out = np.zeros((dim, dim), dtype=complex)
    for a in range(2):
        for b in range(2):
            out += minus[a] * minus[b] * full[a * dim:(a + 1) * dim, b * dim:(b + 1) * dim]
    return out


class TestMGate:
    def test_involution(self):
        m = m_gate()
        np.testing.assert_allclose(m @ m, np.eye(2), atol=1e-15)

    @pytest.mark.parametrize("n", [1, 2, 3, 5])
    def test_walsh_hadamard_matches_kron(self, n):
        np.testing.assert_allclose(materialize(walsh_hadamard(n)), hadamard_matrix(n), atol=1e-12)

    def test_uniform_superposition(self):
        v = apply(walsh_hadamard(6), StateVector.basis(64, 0))
        np.testing.assert_allclose(v.amps, np.full(64, 1 / 8), atol=1e-14)

    def test_walsh_hadamard_entries_sign(self):
        # <y|W|x> = (-1)^(x.y) / sqrt(N)
        n = 3
        w = materialize(walsh_hadamard(n))
        for x in range(8):
            for y in range(8):
                sign = (-1) ** bin(x & y).count("1")
                assert abs(w[y, x] - sign / np.sqrt(8)) < 1e-14

    @pytest.mark.parametrize("n", [0, 25])
    def test_walsh_hadamard_range(self, n):
        with pytest.raises(DomainError):
            walsh_hadamard(n)


class TestPhases:
    @given(seed=st.integers(0, 2**32 - 1))
    @settings(max_examples=20, deadline=None)
    def test_selective_phase_keeps_probabilities(self, seed):
        rng = np.random.default_rng(seed)
        spec = {int(x): float(rng.uniform(0, 2 * np.pi)) for x in rng.choice(16, 5, replace=False)}
        v = StateVector.random(16, rng)
        np.testing.assert_allclose(apply(selective_phase(16, spec), v).probabilities(), v.probabilities(), atol=1e-12)

    def test_selective_phase_values(self):
        d = selective_phase(4, {2: np.pi / 2})
        np.testing.assert_allclose(d.entries, [1, 1, 1j, 1], atol=1e-15)

    def test_selective_inversion(self):
        f = Predicate.of_states(8, [1, 6])
        np.testing.assert_array_equal(selective_inversion(8, f).entries.real, [1, -1, 1, 1, 1, 1, -1, 1])

    def test_invert_state(self):
        assert invert_state(4, 3).entries[3] == -1

    def test_predicate_dimension_mismatch(self):
        with pytest.raises(ContractViolation):
            selective_inversion(8, Predicate.single(4, 0))

    def test_predicate_range(self):
        with pytest.raises(ContractViolation):
            Predicate.of_states(4, [4])


class TestAncillaOracle:
    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
    def test_matches_selective_inversion(self, n):
        for seed in range(5):
            f = Predicate.random(1 << n, seed)
            expected = materialize(selective_inversion(1 << n, f))
            np.testing.assert_allclose(induced_register_operator(n, f), expected, atol=1e-12)

    def test_flips_ancilla_for_marked_states(self):
        n = 2
        f = Predicate.single(4, 2)
        out = apply(ancilla_oracle(n, f), StateVector.basis(8, 2))
        assert out[2 + 4] == 1
        out = apply(ancilla_oracle(n, f), StateVector.basis(8, 1))
        assert out[1] == 1

    def test_ancilla_stays_in_minus_state(self):
        n = 3
        f = Predicate.random(8, 1)
        x = 5
        v = np.zeros(16, dtype=complex)
        v[x], v[x + 8] = 1 / np.sqrt(2), -1 / np.sqrt(2)
        out = apply(ancilla_oracle(n, f), StateVector(v)).amps
        np.testing.assert_allclose(out, (-1 if f(x) else 1) * v, atol=1e-15)


class TestAlphaGate:
    def test_alpha_two_is_m(self):
        np.testing.assert_allclose(alpha_gate(2.0), m_gate(), atol=1e-15)

    @pytest.mark.parametrize("alpha", [1.0, 1.5, 4.0, 37.0])
    def test_orthonormal_columns(self, alpha):
        g = alpha_gate(alpha)
        np.testing.assert_allclose(g.conj().T @ g, np.eye(2), atol=1e-15)

    def test_alpha_one_flips(self):
        np.testing.assert_allclose(np.abs(alpha_gate(1.0)), [[0, 1], [1, 0]], atol=1e-15)

    @pytest.mark.parametrize("alpha", [0.5, 0.0, -2.0, float("nan")])
    def test_domain(self, alpha):
        with pytest.raises(DomainError):
            alpha_gate(alpha)

    def test_tensor_gate_matches_kron(self):
        g = alpha_gate(3.0)
        np.testing.assert_allclose(materialize(tensor_gate(4, g)), kron_all([g] * 4), atol=1e-14)
