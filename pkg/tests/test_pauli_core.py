import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _oracles import PAULIS, kron_loop, singlet_correlation, spin
from _strategies import directions
from jointbell.pauli_core import (
    PAULI,
    DensityMatrix,
    DimensionError,
    Direction,
    NormalizationError,
    NotHermitianError,
    X,
    Y,
    Z,
    bloch_observable,
    eigenvalues,
    expectation,
    ghz_state,
    maximally_mixed,
    min_eigenvalue,
    partial_trace,
    product_state,
    random_mixed_state,
    random_pure_state,
    sigma_dot,
    singlet_state,
    tensor,
)


class TestPauliAlgebra:
    def test_matrices_match_textbook(self):
        for ours, ref in zip(PAULI, PAULIS):
            np.testing.assert_array_equal(ours, ref)

    def test_squares_and_anticommutators(self):
        eye = np.eye(2)
        for i, si in enumerate(PAULI):
            for j, sj in enumerate(PAULI):
                np.testing.assert_allclose(si @ sj + sj @ si, 2 * (i == j) * eye, atol=1e-15)

    def test_commutator_xy(self):
        sx, sy, sz = PAULI
        np.testing.assert_allclose(sx @ sy - sy @ sx, 2j * sz, atol=1e-15)

    def test_pauli_matrices_are_readonly(self):
        with pytest.raises(ValueError):
            PAULI[0][0, 0] = 5

    @given(directions())
    def test_bloch_observable_has_unit_eigenvalues(self, d):
        np.testing.assert_allclose(eigenvalues(bloch_observable(d)), [-1, 1], atol=1e-12)
        np.testing.assert_allclose(bloch_observable(d) @ bloch_observable(d), np.eye(2), atol=1e-12)

    def test_bloch_observable_rejects_non_unit(self):
        with pytest.raises(NormalizationError):
            bloch_observable([1.0, 1.0, 0.0])

    def test_sigma_dot_accepts_scaled_vectors(self):
        np.testing.assert_allclose(sigma_dot([0.5, 0, 0]), 0.5 * PAULIS[0])


class TestDirection:
    def test_constructor_rejects_non_unit(self):
        with pytest.raises(NormalizationError):
            Direction(1.0, 1.0, 0.0)

    def test_from_vector_normalizes(self):
        d = Direction.from_vector([3, 0, 4])
        assert (d.x, d.y, d.z) == pytest.approx((0.6, 0.0, 0.8))

    def test_zero_vector_rejected(self):
        with pytest.raises(NormalizationError):
            Direction.from_vector([0, 0, 0])

    def test_wrong_length_rejected(self):
        with pytest.raises(DimensionError):
            Direction.from_vector([1, 0])

    @given(directions())
    def test_angles_round_trip(self, d):
        theta, phi = d.angles()
        assert 0 <= theta <= math.pi and 0 <= phi < 2 * math.pi
        back = Direction.from_angles(theta, phi)
        np.testing.assert_allclose(back.vector, d.vector, atol=1e-12)

    def test_negation_and_dot(self):
        assert (-X).dot(X) == -1.0
        assert X.dot(Y) == 0.0


class TestTensor:
    @given(st.integers(min_value=0, max_value=2**31 - 1))
    @settings(max_examples=25)
    def test_matches_loop_kron(self, seed):
        rng = np.random.default_rng(seed)
        a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        b = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        np.testing.assert_allclose(tensor([a, b]), kron_loop(a, b), atol=1e-14)

    def test_three_factors_and_party_order(self):
        op = tensor([PAULI[2], np.eye(2), np.eye(2)])
        assert op[0, 0] == 1 and op[4, 4] == -1

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            tensor([])


class TestEigenvalues:
    @given(st.integers(min_value=0, max_value=2**31 - 1), st.sampled_from([2, 4, 8]))
    @settings(max_examples=40)
    def test_agree_with_lapack(self, seed, dim):
        rng = np.random.default_rng(seed)
        m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        h = m + m.conj().T
        np.testing.assert_allclose(eigenvalues(h), np.linalg.eigvalsh(h), atol=1e-12)

    def test_non_hermitian_rejected(self):
        with pytest.raises(NotHermitianError):
            eigenvalues(np.array([[0, 1], [0, 0]], dtype=complex))

    def test_min_eigenvalue_of_projector(self):
        assert min_eigenvalue(0.5 * (np.eye(2) + bloch_observable(X))) == pytest.approx(0.0, abs=1e-15)


class TestDensityMatrix:
    def test_rejects_bad_trace(self):
        with pytest.raises(ValueError):
            DensityMatrix(np.eye(2))

    def test_rejects_non_power_of_two(self):
        with pytest.raises(DimensionError):
            DensityMatrix(np.eye(3) / 3)

    def test_rejects_four_qubits(self):
        with pytest.raises(DimensionError):
            DensityMatrix(np.eye(16) / 16)

    def test_rejects_non_hermitian(self):
        with pytest.raises(NotHermitianError):
            DensityMatrix(np.array([[0.5, 0.1], [0.0, 0.5]]))

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            DensityMatrix(np.diag([1.5, -0.5]))

    def test_matrix_is_readonly(self):
        rho = maximally_mixed(1)
        with pytest.raises(ValueError):
            rho.matrix[0, 0] = 1

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_random_states_are_valid(self, n):
        pure = random_pure_state(n, seed=n)
        mixed = random_mixed_state(n, seed=n)
        assert pure.n_qubits == mixed.n_qubits == n
        assert pure.purity() == pytest.approx(1.0, abs=1e-12)
        assert mixed.purity() < 1.0

    def test_random_states_are_seeded(self):
        np.testing.assert_array_equal(random_pure_state(2, 7).matrix, random_pure_state(2, 7).matrix)


class TestStates:
    @given(directions(), directions())
    def test_singlet_correlation(self, a, b):
        op = tensor([bloch_observable(a), bloch_observable(b)])
        assert expectation(singlet_state(), op) == pytest.approx(singlet_correlation(a.vector, b.vector), abs=1e-12)

    def test_ghz_is_eigenstate_of_mermin_terms(self):
        sx, sy, _ = PAULIS
        ghz = ghz_state()
        for ops, ev in (((sx, sx, sx), 1), ((sx, sy, sy), -1), ((sy, sx, sy), -1), ((sy, sy, sx), -1)):
            op = tensor(list(ops))
            psi = ghz.matrix @ op
            np.testing.assert_allclose(psi, ev * ghz.matrix, atol=1e-14)

    def test_singlet_marginals_are_mixed(self):
        np.testing.assert_allclose(partial_trace(singlet_state(), [0]), np.eye(2) / 2, atol=1e-15)
        np.testing.assert_allclose(partial_trace(ghz_state(), [0, 2]), np.diag([0.5, 0, 0, 0.5]), atol=1e-15)

    def test_product_state_expectations(self):
        rho = product_state([X, Z])
        assert expectation(rho, tensor([spin([1, 0, 0]), spin([0, 0, 1])])) == pytest.approx(1.0)

    def test_expectation_shape_checked(self):
        with pytest.raises(DimensionError):
            expectation(singlet_state(), np.eye(2))

    def test_expectation_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            expectation(maximally_mixed(1), np.array([[0, 1j], [0, 0]]) * 2 + np.array([[1j, 0], [0, 0]]))


class TestSpecExamples:
    def test_bloch_z_is_diagonal(self):
        np.testing.assert_array_equal(bloch_observable(Z), np.diag([1, -1]))

    def test_bloch_x_is_off_diagonal(self):
        np.testing.assert_array_equal(bloch_observable(X), [[0, 1], [1, 0]])

    def test_bloch_diagonal_direction_eigenvalues(self):
        d = Direction(1 / math.sqrt(2), 1 / math.sqrt(2), 0.0)
        np.testing.assert_allclose(np.linalg.eigvalsh(bloch_observable(d)), [-1, 1], atol=1e-12)

    def test_tensor_identities(self):
        np.testing.assert_array_equal(tensor([np.eye(2), np.eye(2)]), np.eye(4))
        np.testing.assert_array_equal(tensor([PAULIS[2], PAULIS[2]]), np.diag([1, -1, -1, 1]))

    def test_ghz_xxx_and_xyy(self):
        sx, sy, _ = PAULIS
        assert expectation(ghz_state(), tensor([sx, sx, sx])) == pytest.approx(1.0, abs=1e-12)
        assert expectation(ghz_state(), tensor([sx, sy, sy])) == pytest.approx(-1.0, abs=1e-12)

    def test_singlet_zz(self):
        assert expectation(singlet_state(), tensor([PAULIS[2], PAULIS[2]])) == pytest.approx(-1.0, abs=1e-12)

    @pytest.mark.parametrize("state", [singlet_state(), ghz_state(), random_mixed_state(2, 3)])
    def test_identity_expectation_is_one(self, state):
        assert expectation(state, np.eye(state.dim)) == pytest.approx(1.0, abs=1e-12)

    def test_pure_states_have_unit_purity(self):
        assert singlet_state().purity() == pytest.approx(1.0, abs=1e-12)
        assert ghz_state().purity() == pytest.approx(1.0, abs=1e-12)
        assert random_pure_state(3, 7).purity() == pytest.approx(1.0, abs=1e-12)

    def test_random_pure_seed_42(self):
        a, b = random_pure_state(2, 42), random_pure_state(2, 42)
        np.testing.assert_array_equal(a.matrix, b.matrix)
        assert np.trace(a.matrix).real == pytest.approx(1.0, abs=1e-12)
        assert np.linalg.eigvalsh(a.matrix)[0] >= -1e-10

    def test_min_eigenvalues(self):
        assert min_eigenvalue(np.eye(2)) == 1.0
        assert min_eigenvalue(PAULIS[2]) == -1.0
        boundary = 0.25 * (np.eye(2) + spin(np.array([1, 1, 0]) / math.sqrt(2)))
        assert min_eigenvalue(boundary) == pytest.approx(0.0, abs=1e-10)


class TestInvariants:
    def test_expectation_is_linear(self, rng):
        r1, r2 = random_mixed_state(2, 1), random_mixed_state(2, 2)
        for _ in range(20):
            a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
            b = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
            a, b = a + a.conj().T, b + b.conj().T
            s, t = rng.normal(size=2)
            assert expectation(r1, s * a + t * b) == pytest.approx(
                s * expectation(r1, a) + t * expectation(r1, b), abs=1e-10
            )
            w = rng.uniform()
            mix = DensityMatrix(w * r1.matrix + (1 - w) * r2.matrix)
            assert expectation(mix, a) == pytest.approx(w * expectation(r1, a) + (1 - w) * expectation(r2, a), abs=1e-10)

    def test_tensor_is_associative(self, rng):
        # integer entries keep every product exact, so bit patterns must agree
        ops = [rng.integers(-9, 10, size=(2, 2)) + 1j * rng.integers(-9, 10, size=(2, 2)) for _ in range(3)]
        left = tensor([tensor(ops[:2]), ops[2]])
        right = tensor([ops[0], tensor(ops[1:])])
        np.testing.assert_array_equal(left, right)
        np.testing.assert_array_equal(left, tensor(ops))

    def test_singlet_correlation_100_pairs(self, rng):
        from jointbell.pauli_core import random_direction

        rho = singlet_state()
        for _ in range(100):
            a, b = random_direction(rng), random_direction(rng)
            e = expectation(rho, tensor([bloch_observable(a), bloch_observable(b)]))
            assert abs(e + a.dot(b)) < 1e-10
