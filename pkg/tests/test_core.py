import numpy as np
import pytest

from qutritsim.core import (
    DensityState,
    PauliLabel,
    PureState,
    QuditIndexing,
    all_pauli_labels,
    embed,
    gell_mann,
    haar_random_unitary,
    hadamard_matrix,
    omega,
    operator_schmidt_rank,
    partial_trace,
    qudit_hadamard,
    random_density_matrix,
    shift_matrix,
    clock_matrix,
    state_fidelity,
    weyl_pauli,
)


def kron_all(*mats):
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


class TestIndexing:
    def test_bijection(self):
        idx = QuditIndexing(3, 3)
        seen = set()
        for label in range(27):
            digits = idx.label_to_digits(label)
            assert idx.digits_to_label(digits) == label
            seen.add(digits)
        assert len(seen) == 27

    def test_site_one_most_significant(self):
        idx = QuditIndexing(3, 2)
        assert idx.digits_to_label((2, 1)) == 7
        assert idx.label_string(7) == "21"

    def test_range_checks(self):
        idx = QuditIndexing(3, 2)
        with pytest.raises(ValueError):
            idx.label_to_digits(9)
        with pytest.raises(ValueError):
            idx.digits_to_label((3, 0))


class TestGellMann:
    def test_first_generator_entries(self):
        m = gell_mann(1).matrix
        expected = np.zeros((3, 3))
        expected[0, 1] = expected[1, 0] = 1.0
        assert np.abs(m - expected).max() == 0.0

    def test_traceless_hermitian(self):
        for k in range(1, 9):
            g = gell_mann(k)
            assert abs(np.trace(g.matrix)) < 1e-15
            assert g.is_hermitian()

    def test_orthogonality_all_pairs(self):
        # direct multiplication oracle over all 64 pairs
        for j in range(1, 9):
            for k in range(1, 9):
                tr = np.trace(gell_mann(j).matrix @ gell_mann(k).matrix)
                assert abs(tr - (2.0 if j == k else 0.0)) < 1e-14

    def test_index_range(self):
        with pytest.raises(ValueError):
            gell_mann(0)
        with pytest.raises(ValueError):
            gell_mann(9)


class TestWeylPaulis:
    def test_shift_is_cyclic(self):
        x = weyl_pauli(PauliLabel(((1, 0),))).matrix
        v = np.zeros(3)
        v[0] = 1.0
        assert np.argmax(np.abs(x @ v)) == 1
        assert np.abs(np.linalg.matrix_power(x, 3) - np.eye(3)).max() < 1e-15

    def test_identity_label(self):
        assert np.abs(weyl_pauli(PauliLabel.identity(2)).matrix - np.eye(9)).max() == 0.0

    def test_zx_commutation_entrywise(self):
        # multiply and compare: Z X = w X Z
        x, z = shift_matrix(), clock_matrix()
        assert np.abs(z @ x - omega() * x @ z).max() < 1e-14

    def test_omega_commutation_exhaustive(self):
        for n in (1, 2):
            labels = all_pauli_labels(n)
            mats = {lab: weyl_pauli(lab).matrix for lab in labels}
            for p in labels:
                for q in labels:
                    s = p.symplectic_form(q)
                    lhs = mats[p] @ mats[q]
                    rhs = omega() ** s * (mats[q] @ mats[p])
                    assert np.abs(lhs - rhs).max() < 1e-12, (str(p), str(q))

    def test_trace_orthogonality_two_qutrits(self):
        labels = all_pauli_labels(2)
        stack = np.array([weyl_pauli(lab).matrix for lab in labels])
        gram = np.einsum("iab,jab->ij", stack.conj(), stack)
        assert np.abs(gram - 9.0 * np.eye(81)).max() < 1e-12

    def test_unitarity(self):
        for lab in all_pauli_labels(1):
            assert weyl_pauli(lab).is_unitary()


class TestHadamard:
    def test_d2_is_standard(self):
        h = qudit_hadamard(2).matrix
        std = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
        assert local_phase_equal(h, std)

    def test_unitary_and_fourth_power(self):
        h = qudit_hadamard(3)
        assert h.is_unitary(1e-12)
        m = np.linalg.matrix_power(h.matrix, 4)
        assert np.abs(m - np.eye(3)).max() < 1e-12

    def test_conjugation_interchanges_z_and_x(self):
        # conjugate and compare to the generalized Paulis: this phase
        # convention gives H X H^dag = Z and H^dag Z H = X exactly, while
        # the opposite-side conjugations invert the operator
        h = hadamard_matrix()
        x, z = shift_matrix(), clock_matrix()
        assert np.abs(h @ x @ h.conj().T - z).max() < 1e-12
        assert np.abs(h.conj().T @ z @ h - x).max() < 1e-12
        assert np.abs(h @ z @ h.conj().T - x.conj().T).max() < 1e-12

    def test_csum_conjugation_identity_exact(self):
        from qutritsim.scrambling import csum_matrix
        from qutritsim.synthesis import controlled_phase_matrix

        h = hadamard_matrix()
        lhs = kron_all(np.eye(3), h.conj().T) @ controlled_phase_matrix().matrix @ kron_all(
            np.eye(3), h
        )
        assert np.abs(lhs - csum_matrix(True).matrix).max() < 1e-12

    def test_csum_conjugation_variants(self):
        # moving the conjugation to the other qutrit exchanges control and
        # target; inverting the Hadamard yields the controlled-MINUS
        from qutritsim.scrambling import csum_matrix
        from qutritsim.synthesis import controlled_phase_matrix

        h = hadamard_matrix()
        ucphi = controlled_phase_matrix().matrix
        swapped = kron_all(h.conj().T, np.eye(3)) @ ucphi @ kron_all(h, np.eye(3))
        assert np.abs(swapped - csum_matrix(False).matrix).max() < 1e-12
        cminus = kron_all(np.eye(3), h) @ ucphi @ kron_all(np.eye(3), h.conj().T)
        # controlled-MINUS: |m,n> -> |m, n-m>
        want = np.zeros((9, 9))
        for m in range(3):
            for n in range(3):
                want[3 * m + (n - m) % 3, 3 * m + n] = 1.0
        assert np.abs(cminus - want).max() < 1e-12

    def test_rejects_trivial_dimension(self):
        with pytest.raises(ValueError):
            qudit_hadamard(1)


def local_phase_equal(a, b, atol=1e-12):
    inner = np.trace(b.conj().T @ a)
    if abs(inner) < 1e-14:
        return False
    phase = inner / abs(inner)
    return np.abs(a - phase * b).max() < atol


class TestEmbed:
    def test_single_site_action(self):
        x = shift_matrix()
        op1 = embed(x, [1], 2)
        op2 = embed(x, [2], 2)
        v00 = np.zeros(9)
        v00[0] = 1.0
        assert np.argmax(np.abs(op1.matrix @ v00)) == 3  # |10>
        assert np.argmax(np.abs(op2.matrix @ v00)) == 1  # |01>

    def test_kronecker_oracle(self, rng):
        a = haar_random_unitary(3, rng)
        b = haar_random_unitary(3, rng)
        prod = embed(a, [1], 2) @ embed(b, [2], 2)
        assert np.abs(prod.matrix - np.kron(a, b)).max() < 1e-12

    def test_site_order_encodes_orientation(self, rng):
        u = haar_random_unitary(9, rng)
        swap = np.zeros((9, 9))
        for i in range(3):
            for j in range(3):
                swap[3 * j + i, 3 * i + j] = 1.0
        direct = embed(u, [2, 1], 2).matrix
        assert np.abs(direct - swap @ u @ swap).max() < 1e-12

    def test_homomorphism(self, rng):
        a = haar_random_unitary(3, rng)
        b = haar_random_unitary(3, rng)
        lhs = embed(a @ b, [2], 3).matrix
        rhs = (embed(a, [2], 3) @ embed(b, [2], 3)).matrix
        assert np.abs(lhs - rhs).max() < 1e-12

    def test_three_site_placement(self, rng):
        a = haar_random_unitary(3, rng)
        got = embed(a, [2], 3).matrix
        want = kron_all(np.eye(3), a, np.eye(3))
        assert np.abs(got - want).max() < 1e-12

    def test_errors(self):
        with pytest.raises(ValueError):
            embed(np.eye(3), [1, 1], 2)
        with pytest.raises(Exception):
            embed(np.eye(3), [1, 2], 2)  # dimension mismatch


class TestStates:
    def test_pure_state_norm_enforced(self):
        with pytest.raises(ValueError):
            PureState(np.array([1.0, 1.0, 0.0]), QuditIndexing(3, 1))

    def test_density_invariants(self):
        with pytest.raises(ValueError):
            DensityState(np.diag([0.7, 0.7, -0.4]).astype(complex), QuditIndexing(3, 1))
        with pytest.raises(ValueError):
            DensityState(np.diag([2.0, -1.0, 0.0]).astype(complex), QuditIndexing(3, 1))

    def test_partial_trace_of_product(self, rng):
        a = random_density_matrix(3, rng)
        b = random_density_matrix(3, rng)
        joint = np.kron(a, b)
        assert np.abs(partial_trace(joint, [1], 2) - a).max() < 1e-12
        assert np.abs(partial_trace(joint, [2], 2) - b).max() < 1e-12


class TestFidelity:
    def test_pure_state_projector(self):
        psi = PureState.from_amplitudes([1, 1j, -1])
        assert abs(state_fidelity(psi.density(), psi) - 1.0) < 1e-14

    def test_maximally_mixed(self):
        psi = PureState.from_amplitudes([1, 0, 0])
        rho = DensityState.maximally_mixed(3, 1)
        assert abs(state_fidelity(rho, psi) - 1.0 / 3.0) < 1e-14

    def test_epr_versus_ground(self):
        # direct inner product oracle: |<00|EPR>|^2 = 1/3
        epr = PureState.from_amplitudes([1, 0, 0, 0, 1, 0, 0, 0, 1])
        ground = PureState.basis((0, 0))
        assert abs(state_fidelity(epr.density(), ground) - 1.0 / 3.0) < 1e-14

    def test_global_phase_invariance(self, rng):
        v = rng.standard_normal(9) + 1j * rng.standard_normal(9)
        psi = PureState.from_amplitudes(v)
        psi2 = PureState.from_amplitudes(v * np.exp(0.73j))
        rho = PureState.from_amplitudes(rng.standard_normal(9)).density()
        assert abs(state_fidelity(rho, psi) - state_fidelity(rho, psi2)) < 1e-14

    def test_dimension_mismatch(self):
        with pytest.raises(Exception):
            state_fidelity(DensityState.maximally_mixed(3, 2), PureState.basis((0,)))


class TestSchmidtRank:
    def test_product_operator(self, rng):
        a = haar_random_unitary(3, rng)
        b = haar_random_unitary(3, rng)
        assert operator_schmidt_rank(np.kron(a, b), [1], 2) == 1

    def test_controlled_phase_rank(self):
        from qutritsim.synthesis import controlled_phase_matrix

        # SVD of the reshuffled matrix (oracle built into the metric)
        assert operator_schmidt_rank(controlled_phase_matrix(), [1], 2) == 3

    def test_swap_rank(self):
        swap = np.zeros((9, 9))
        for i in range(3):
            for j in range(3):
                swap[3 * j + i, 3 * i + j] = 1.0
        assert operator_schmidt_rank(swap, [1], 2) == 9

    def test_invalid_cut(self):
        with pytest.raises(ValueError):
            operator_schmidt_rank(np.eye(9), [], 2)
        with pytest.raises(ValueError):
            operator_schmidt_rank(np.eye(9), [1, 2], 2)
