import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qamp.amplify import (
    AmplificationProblem,
    amplify_general,
    build_q,
    build_q_rotated,
    compose_algorithm,
    coupling,
    invert_algorithm,
    optimal_iterations,
    run,
    subspace_basis,
    subspace_coordinates,
    success_probability,
    two_by_two,
)
from qamp.errors import ContractViolation, ZeroCouplingError
from qamp.statevector import Dense, SingleQubit, identity, materialize, random_unitary
from qamp.transforms import m_gate, walsh_hadamard

from conftest import hadamard_matrix


def dense_q(U: np.ndarray, s: int, t: int) -> np.ndarray:
    """-I_s U^dagger I_t U from plain matrices."""
    dim = U.shape[0]
    I_s = np.eye(dim)
    I_s[s, s] = -1
    I_t = np.eye(dim)
    I_t[t, t] = -1
    return -I_s @ U.conj().T @ I_t @ U


def random_problem(seed: int, n_range=(2, 5)) -> AmplificationProblem:
    rng = np.random.default_rng(seed)
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    dim = 1 << n
    return AmplificationProblem(random_unitary(dim, rng), int(rng.integers(dim)), int(rng.integers(dim)))


seeds = st.integers(0, 2**32 - 1)


class TestIterate:
    def test_n2_single_iteration_reaches_target(self):
        U = hadamard_matrix(2)
        psi = dense_q(U, 0, 3) @ np.eye(4)[0]
        assert abs(abs((U @ psi)[3]) - 1) < 1e-12
        state, _ = run(AmplificationProblem(walsh_hadamard(2), 0, 3), 1)
        assert abs(abs(state[3]) - 1) < 1e-12

    @given(seed=seeds)
    @settings(max_examples=20, deadline=None)
    def test_matches_dense_construction(self, seed):
        p = random_problem(seed, (1, 4))
        np.testing.assert_allclose(materialize(build_q(p)), dense_q(p.U.matrix, p.s, p.t), atol=1e-12)

    @given(seed=seeds)
    @settings(max_examples=30, deadline=None)
    def test_v_s_coefficient(self, seed):
        p = random_problem(seed)
        u = coupling(p).u_ts
        q_vs = build_q(p)._apply(np.eye(p.dim, dtype=complex)[p.s])
        c_s, c_t, resid = subspace_coordinates(q_vs, p)
        assert abs(c_s - (1 - 4 * abs(u) ** 2)) < 1e-10
        assert abs(c_t - 2 * u) < 1e-10
        assert resid < 1e-10

    def test_rotated_with_identity_equals_plain(self, rng):
        p = AmplificationProblem(random_unitary(8, rng), 1, 6)
        rotated = build_q_rotated(p, identity(8))
        np.testing.assert_allclose(materialize(rotated), materialize(build_q(p)), atol=1e-12)

    def test_rotated_matches_composed_unitary(self, rng):
        p = AmplificationProblem(random_unitary(8, rng), 0, 5)
        V = SingleQubit(8, 1, m_gate())
        composed = AmplificationProblem(Dense(materialize(V) @ p.U.matrix), 0, 5)
        np.testing.assert_allclose(materialize(build_q_rotated(p, V)), materialize(build_q(composed)), atol=1e-12)

    def test_rotated_dimension_mismatch(self):
        p = AmplificationProblem(walsh_hadamard(2), 0, 1)
        with pytest.raises(ContractViolation):
            build_q_rotated(p, identity(8))


class TestTrajectory:
    @given(seed=seeds)
    @settings(max_examples=30, deadline=None)
    def test_sine_law(self, seed):
        p = random_problem(seed)
        c = coupling(p)
        eta = c.eta_opt + 2
        _, trace = run(p, eta, want_trace=True)
        j = np.arange(eta + 1)
        np.testing.assert_allclose(np.abs(trace.a_t), np.abs(np.sin((2 * j + 1) * c.theta)), atol=1e-9)
        np.testing.assert_allclose(np.abs(trace.a_s), np.abs(np.cos(2 * j * c.theta)), atol=1e-9)

    @given(seed=seeds)
    @settings(max_examples=30, deadline=None)
    def test_norm_decomposition(self, seed):
        p = random_problem(seed)
        _, trace = run(p, coupling(p).eta_opt, want_trace=True)
        total = np.abs(trace.a_s) ** 2 + np.abs(trace.a_perp) ** 2 + trace.residual**2
        np.testing.assert_allclose(total, 1.0, atol=1e-9)
        assert np.all(trace.residual < 1e-10)

    def test_final_probability(self, rng):
        for _ in range(10):
            p = AmplificationProblem(random_unitary(16, rng), 3, 9)
            c = coupling(p)
            for eta in range(4):
                state, _ = run(p, eta)
                assert abs(state.probability(9) - success_probability(c.theta, eta)) < 1e-9

    @given(seed=seeds)
    @settings(max_examples=25, deadline=None)
    def test_subspace_preserved(self, seed):
        p = random_problem(seed)
        rng = np.random.default_rng(seed)
        v_s, w = subspace_basis(p)
        z = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        psi = z[0] * v_s + z[1] * w
        psi /= np.linalg.norm(psi)
        q = build_q(p)
        for _ in range(20):
            psi = q._apply(psi)
            *_, resid = subspace_coordinates(psi, p)
            assert resid < 1e-10

    def test_trace_length(self):
        p = AmplificationProblem(walsh_hadamard(3), 0, 2)
        _, trace = run(p, 0, want_trace=True)
        assert len(trace) == 1
        assert trace.a_s[0] == 1

    def test_negative_eta(self):
        with pytest.raises(ContractViolation):
            run(AmplificationProblem(walsh_hadamard(2), 0, 1), -1)


class TestTwoByTwo:
    @pytest.mark.parametrize("u", [0.0, 0.1, 0.5, 1 / math.sqrt(2), 1.0])
    def test_real_determinant(self, u):
        assert abs(np.linalg.det(two_by_two(u)) - 1) < 1e-15

    @given(seed=seeds)
    @settings(max_examples=30, deadline=None)
    def test_rows_match_projections(self, seed):
        p = random_problem(seed)
        u = coupling(p).u_ts
        m = two_by_two(u)
        v_s, w = subspace_basis(p)
        q = build_q(p)
        for row, vec in zip(m, (v_s, w)):
            c_s, c_t, resid = subspace_coordinates(q._apply(vec), p)
            np.testing.assert_allclose([c_s, c_t], row, atol=1e-10)
            assert resid < 1e-10

    def test_rejects_large_coupling(self):
        with pytest.raises(ContractViolation):
            two_by_two(1.5)


class TestCoupling:
    @pytest.mark.parametrize(
        "theta, expected",
        [(math.pi / 6, 1), (math.asin(1 / math.sqrt(8)), 2), (math.asin(1 / 32), 25), (math.pi / 2, 0)],
    )
    def test_optimal_iterations(self, theta, expected):
        assert optimal_iterations(theta) == expected

    @given(theta=st.floats(1e-4, math.pi / 2))
    def test_optimal_is_best_integer(self, theta):
        eta = optimal_iterations(theta)
        best = success_probability(theta, eta)
        assert best >= success_probability(theta, eta + 1) - 1e-12
        if eta:
            assert best >= success_probability(theta, eta - 1) - 1e-12
        assert 1 - best <= math.sin(theta) ** 2 + 1e-12

    def test_zero_coupling(self):
        with pytest.raises(ZeroCouplingError):
            coupling(AmplificationProblem(identity(4), 0, 1))

    def test_problem_range(self):
        with pytest.raises(ContractViolation):
            AmplificationProblem(identity(4), 0, 4)


class TestGeneral:
    def test_invert_algorithm(self, rng):
        gates = [SingleQubit(32, int(rng.integers(5)), random_unitary(2, rng).matrix) for _ in range(10)]
        alg = compose_algorithm(gates)
        np.testing.assert_allclose(materialize(invert_algorithm(gates)) @ materialize(alg), np.eye(32), atol=1e-10)

    def test_compose_empty(self):
        with pytest.raises(ContractViolation):
            compose_algorithm([])

    def test_amplify_general_reports(self, rng):
        r = amplify_general(random_unitary(8, rng), 0, 4)
        assert abs(r.final_probability - r.predicted_probability) < 1e-9
        assert 1 - r.final_probability <= r.initial_probability + 1e-12
