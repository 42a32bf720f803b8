import numpy as np
import pytest

from qutritsim.core import (
    PauliLabel,
    QuditIndexing,
    QuditOperator,
    all_pauli_labels,
    haar_random_unitary,
    weyl_pauli,
)
from qutritsim.scrambling import (
    NonCliffordError,
    average_otoc,
    clifford_conjugation_table,
    conjugate_unitary,
    csum_matrix,
    design_states,
    otoc_bound_from_fidelity,
    scrambler_unitary,
    symmetric_projector,
)


def lab(exps):
    return PauliLabel(exps)


class TestScramblerUnitary:
    def test_permutation_examples(self):
        u = scrambler_unitary().matrix
        idx = lambda m, n: 3 * m + n  # noqa: E731
        v = np.zeros(9)
        v[idx(0, 0)] = 1.0
        assert np.argmax(np.abs(u @ v)) == idx(0, 0)
        v = np.zeros(9)
        v[idx(1, 0)] = 1.0
        assert np.argmax(np.abs(u @ v)) == idx(2, 1)

    def test_cube_matches_iterated_permutation(self):
        # permutation-composition oracle: iterate (m, n) -> (2m+n, m+n)
        u = scrambler_unitary().matrix
        cubed = np.linalg.matrix_power(u, 3)
        perm = np.zeros((9, 9))
        for m in range(3):
            for n in range(3):
                mm, nn = m, n
                for _ in range(3):
                    mm, nn = (2 * mm + nn) % 3, (mm + nn) % 3
                perm[3 * mm + nn, 3 * m + n] = 1.0
        assert np.abs(cubed - perm).max() < 1e-12

    def test_equals_two_csums_with_switched_roles(self):
        composed = csum_matrix(False).matrix @ csum_matrix(True).matrix
        assert np.abs(composed - scrambler_unitary().matrix).max() < 1e-12

    def test_unitary(self):
        assert scrambler_unitary().is_unitary(1e-12)


class TestConjugationTable:
    def test_printed_generator_relations(self):
        table = clifford_conjugation_table(scrambler_unitary())
        expect = {
            lab(((0, 1), (0, 0))): lab(((0, 1), (0, 2))),  # Z I -> Z  Z2
            lab(((0, 0), (0, 1))): lab(((0, 2), (0, 2))),  # I Z -> Z2 Z2
            lab(((1, 0), (0, 0))): lab(((2, 0), (1, 0))),  # X I -> X2 X
            lab(((0, 0), (1, 0))): lab(((1, 0), (1, 0))),  # I X -> X  X
        }
        for src, dst in expect.items():
            got, phase = table[src]
            assert got == dst
            assert abs(abs(phase) - 1.0) < 1e-12
            assert abs(phase - 1.0) < 1e-12  # these four come out phase-free

    def test_identity_maps_to_identity(self):
        table = clifford_conjugation_table(scrambler_unitary())
        got, phase = table[PauliLabel.identity(2)]
        assert got == PauliLabel.identity(2)
        assert abs(phase - 1.0) < 1e-12

    def test_products_follow_generator_images(self):
        # matrix conjugation oracle for a composite label
        us = scrambler_unitary()
        table = clifford_conjugation_table(us)
        src = lab(((1, 0), (0, 1)))  # X (x) Z
        got, phase = table[src]
        direct = us.matrix @ weyl_pauli(src).matrix @ us.matrix.conj().T
        assert np.abs(direct - phase * weyl_pauli(got).matrix).max() < 1e-10

    def test_group_closure(self):
        table = clifford_conjugation_table(scrambler_unitary())
        images = {str(q) for q, _ in table.values()}
        assert len(images) == 81  # a Clifford permutes the Pauli labels

    def test_non_clifford_reports_offender(self, rng):
        t = np.diag(np.exp(1j * np.array([0.0, 0.3, 1.1])))
        u = QuditOperator(np.kron(t, np.eye(3)), QuditIndexing(3, 2))
        with pytest.raises(NonCliffordError) as err:
            clifford_conjugation_table(u)
        assert err.value.residual > 1e-3


class TestAverageOtoc:
    def test_identity_value(self):
        u = QuditOperator(np.eye(9), QuditIndexing(3, 2))
        assert abs(average_otoc(u) - 1.0) < 1e-12

    def test_scrambler_floor(self):
        assert abs(average_otoc(scrambler_unitary()) - 1.0 / 9.0) < 1e-10

    def test_csum_intermediate(self):
        val = average_otoc(csum_matrix(True))
        assert 1.0 / 9.0 < val < 1.0
        assert abs(val - 1.0 / 3.0) < 1e-10  # three commuting label families survive

    def test_pauli_dressing_invariance(self, rng):
        us = scrambler_unitary().matrix
        base = average_otoc(scrambler_unitary())
        labels = all_pauli_labels(1)
        for _ in range(5):
            pick = [labels[rng.integers(9)] for _ in range(4)]
            a, b, c, d = (weyl_pauli(p).matrix for p in pick)
            dressed = np.kron(a, b) @ us @ np.kron(c, d)
            val = average_otoc(QuditOperator(dressed, QuditIndexing(3, 2)))
            assert abs(val - base) < 1e-10

    def test_haar_scan_respects_bounds(self, rng):
        for _ in range(200):
            u = QuditOperator(haar_random_unitary(9, rng), QuditIndexing(3, 2))
            val = average_otoc(u)
            assert 1.0 / 9.0 - 1e-10 <= val <= 1.0 + 1e-10

    def test_wrong_register_rejected(self):
        with pytest.raises(ValueError):
            average_otoc(QuditOperator(np.eye(3), QuditIndexing(3, 1)))


class TestOtocBound:
    def test_reported_operating_point(self):
        assert 0.614 <= otoc_bound_from_fidelity(0.568) <= 0.622

    def test_perfect_fidelity_gives_floor(self):
        assert otoc_bound_from_fidelity(1.0) == pytest.approx(1.0 / 9.0)

    def test_classical_limit_vacuous(self):
        assert otoc_bound_from_fidelity(0.5) == pytest.approx(1.0)

    def test_monotone_decreasing(self):
        fs = np.linspace(0.26, 1.0, 40)
        vals = [otoc_bound_from_fidelity(f) for f in fs]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_undefined_below_quarter(self):
        with pytest.raises(ValueError):
            otoc_bound_from_fidelity(0.25)


class TestDesignStates:
    def test_twelve_normalized_states(self):
        states = design_states()
        assert len(states) == 12
        for ds in states:
            assert abs(np.linalg.norm(ds.state.amplitudes) - 1.0) < 1e-12

    def test_z_eigenstates_are_computational(self):
        states = {ds.label: ds.state.amplitudes for ds in design_states()}
        for j in range(3):
            v = states[f"Z:{j}"]
            assert abs(abs(v[j]) - 1.0) < 1e-12

    def test_x_eigenstates_match_eigendecomposition(self):
        from qutritsim.core import shift_matrix

        x = shift_matrix()
        w = np.exp(2j * np.pi / 3)
        for j, ds in enumerate(d for d in design_states() if d.label.startswith("X:")):
            v = ds.state.amplitudes
            assert np.abs(x @ v - w**j * v).max() < 1e-12

    def test_two_design_moment_identity(self):
        # symmetric-projector oracle: (1/12) sum (psi psi)^(x2) = P_sym / 6
        acc = np.zeros((9, 9), dtype=complex)
        for ds in design_states():
            rho = np.outer(ds.state.amplitudes, ds.state.amplitudes.conj())
            acc += np.kron(rho, rho)
        acc /= 12.0
        assert np.abs(acc - symmetric_projector(3) / 6.0).max() < 1e-10


class TestConjugateUnitary:
    def test_real_permutation_fixed(self):
        us = scrambler_unitary()
        assert np.abs(conjugate_unitary(us).matrix - us.matrix).max() == 0.0

    def test_flips_evolution_sign(self, rng):
        from scipy.linalg import expm

        h = rng.standard_normal((9, 9))
        h = (h + h.T) / 2.0  # real symmetric generator
        u = QuditOperator(expm(-1j * h * 0.3), QuditIndexing(3, 2))
        back = conjugate_unitary(u)
        assert np.abs(back.matrix - expm(1j * h * 0.3)).max() < 1e-12

    def test_conjugate_times_transpose_is_identity(self, rng):
        u = haar_random_unitary(9, rng)
        q = QuditOperator(u, QuditIndexing(3, 2))
        prod = conjugate_unitary(q).matrix @ u.T
        assert np.abs(prod - np.eye(9)).max() < 1e-12
