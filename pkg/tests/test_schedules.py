import numpy as np
import pytest

from qutritsim.core import QuditIndexing
from qutritsim.schedules import (
    Concurrent,
    ConditionalPiPulse,
    CrossKerrCoeffs,
    Evolve,
    NoiseModel,
    PermutationPulse,
    PhasePulse,
    PulseSchedule,
    RotationPulse,
    parallel_merge,
    simulate_density,
    simulate_unitary,
)

Q1Q2 = CrossKerrCoeffs.from_khz(-279, 160, -528, -743)


def test_coefficients_validate():
    with pytest.raises(ValueError):
        CrossKerrCoeffs(np.nan, 0, 0, 0)
    m = Q1Q2.rate_matrix()
    assert m[0].max() == 0.0 and m[:, 0].max() == 0.0
    assert m[1, 2] == pytest.approx(2 * np.pi * 160e3)


def test_transpose_swaps_cross_terms():
    t = Q1Q2.transpose()
    assert t.alpha_12 == Q1Q2.alpha_21 and t.alpha_21 == Q1Q2.alpha_12


def test_evolve_phases_match_direct_diagonal():
    sched = PulseSchedule((Evolve(((1, 2),), 1e-6),), 2)
    u = simulate_unitary(sched, {(1, 2): Q1Q2}).matrix
    rates = Q1Q2.rate_matrix()
    expected = np.diag(
        [np.exp(-1j * rates[m, n] * 1e-6) for m in range(3) for n in range(3)]
    )
    assert np.abs(u - expected).max() < 1e-12


def test_evolve_orientation_independent():
    # the coupling Hamiltonian does not depend on how the pair is written
    fwd = simulate_unitary(PulseSchedule((Evolve(((1, 2),), 1e-6),), 2), {(1, 2): Q1Q2})
    rev = simulate_unitary(PulseSchedule((Evolve(((2, 1),), 1e-6),), 2), {(1, 2): Q1Q2})
    assert np.abs(fwd.matrix - rev.matrix).max() < 1e-12
    # a dict keyed in the opposite orientation transposes the rate matrix
    flipped = simulate_unitary(
        PulseSchedule((Evolve(((1, 2),), 1e-6),), 2), {(2, 1): Q1Q2}
    ).matrix
    rates = Q1Q2.rate_matrix().T
    expected = np.diag(
        [np.exp(-1j * rates[m, n] * 1e-6) for m in range(3) for n in range(3)]
    )
    assert np.abs(flipped - expected).max() < 1e-12


def test_missing_coupling_raises():
    sched = PulseSchedule((Evolve(((1, 2),), 1e-6),), 2)
    with pytest.raises(KeyError):
        simulate_unitary(sched, {})


def test_durations_nonnegative():
    with pytest.raises(ValueError):
        Evolve(((1, 2),), -1e-9)
    with pytest.raises(ValueError):
        ConditionalPiPulse(1, 2, -1e-9)


def test_reversed_schedule_inverts(rng):
    items = (
        RotationPulse(1, "01", "y", 0.7),
        PermutationPulse(2, "12"),
        ConditionalPiPulse(1, 2, 125e-9),
        PhasePulse(2, (0.1, -0.2, 0.05)),
        RotationPulse(2, "12", "z", -1.1),
    )
    sched = PulseSchedule(items, 2)
    u = simulate_unitary(sched, {})
    v = simulate_unitary(sched.reversed(), {})
    assert np.abs((v @ u).matrix - np.eye(9)).max() < 1e-12


def test_reversed_rejects_evolve():
    sched = PulseSchedule((Evolve(((1, 2),), 1e-9),), 2)
    with pytest.raises(ValueError):
        sched.reversed()


def test_json_round_trip_bit_exact():
    items = (
        Evolve(((1, 2), (2, 3)), 104.87e-9),
        RotationPulse(1, "01", "y", np.pi / 3),
        PermutationPulse(2, "12"),
        PhasePulse(3, (0.1, 0.2, -0.3)),
        ConditionalPiPulse(3, 2, 125e-9, condition=2, fraction=1.0 / 3.0),
        Concurrent((Evolve(((1, 2),), 5e-8), ConditionalPiPulse(3, 4, 5e-8)), 5e-8),
    )
    sched = PulseSchedule(items, 4)
    again = PulseSchedule.from_json(sched.to_json())
    assert again == sched
    assert again.total_duration == sched.total_duration


def test_total_duration_counts_timed_items():
    sched = PulseSchedule(
        (Evolve(((1, 2),), 1e-7), RotationPulse(1, "01", "x", 1.0), ConditionalPiPulse(1, 2, 2e-7)),
        2,
    )
    assert sched.total_duration == pytest.approx(3e-7)


def test_parallel_merge_preserves_unitary_and_wall_clock(rng):
    a = PulseSchedule(
        (
            RotationPulse(1, "01", "y", 0.3),
            Evolve(((1, 2),), 3e-7),
            PermutationPulse(2, "12"),
            Evolve(((1, 2),), 1e-7),
        ),
        4,
    )
    b = PulseSchedule(
        (
            Evolve(((3, 4),), 1e-7),
            RotationPulse(3, "12", "x", -0.9),
            ConditionalPiPulse(3, 4, 2.5e-7),
        ),
        4,
    )
    couplings = {(1, 2): Q1Q2, (3, 4): CrossKerrCoeffs.from_khz(-276, -631, 243, -748)}
    merged = parallel_merge(a, b, 4)
    ua = simulate_unitary(a, couplings).matrix
    ub = simulate_unitary(b, couplings).matrix
    um = simulate_unitary(merged, couplings).matrix
    assert np.abs(um - ub @ ua).max() < 1e-11
    assert merged.total_duration == pytest.approx(max(a.total_duration, b.total_duration))


def test_noise_model_ground_state_fixed_point():
    noise = NoiseModel(damping=[(50e-6, 25e-6)], dephasing=[(20e-6, 10e-6, 8e-6)], scale=1.0)
    sched = PulseSchedule((Evolve((), 1e-6),), 1)
    rho0 = np.zeros((3, 3), dtype=complex)
    rho0[0, 0] = 1.0
    out = simulate_density(sched, rho0, couplings={}, noise=noise)
    assert np.abs(out - rho0).max() < 1e-12


def test_noise_scale_zero_is_ideal():
    noise = NoiseModel(damping=[(50e-6, 25e-6)], dephasing=[(20e-6, 10e-6, 8e-6)], scale=0.0)
    sched = PulseSchedule((Evolve((), 1e-6), RotationPulse(1, "01", "x", 1.3)), 1)
    rho0 = np.zeros((3, 3), dtype=complex)
    rho0[0, 0] = 1.0
    ideal = simulate_density(sched, rho0, couplings={})
    noisy = simulate_density(sched, rho0, couplings={}, noise=noise)
    assert np.abs(ideal - noisy).max() == 0.0


def test_background_pairs_and_exclusion():
    # with the background coupling listed, an untargeted pair accumulates
    # phase during a conditional-pi item, except for the gate's own pair
    sched = PulseSchedule((ConditionalPiPulse(1, 2, 1e-6),), 3)
    couplings = {(2, 3): Q1Q2, (1, 2): Q1Q2}
    rho0 = np.zeros((27, 27), dtype=complex)
    v = np.zeros(27)
    v[QuditIndexing(3, 3).digits_to_label((0, 1, 1))] = 1.0
    w = np.zeros(27)
    w[QuditIndexing(3, 3).digits_to_label((0, 0, 1))] = 1.0
    plus = (v + w) / np.sqrt(2)
    rho0 = np.outer(plus, plus)
    out = simulate_density(sched, rho0.astype(complex), couplings={}, background_pairs=couplings)
    # (2,3) coherence between 11 and 01 picked up exp(-i alpha11 t)
    i, j = QuditIndexing(3, 3).digits_to_label((0, 1, 1)), QuditIndexing(3, 3).digits_to_label((0, 0, 1))
    phase = np.angle(out[i, j] / rho0[i, j])
    assert abs(np.exp(1j * phase) - np.exp(-1j * Q1Q2.alpha_11 * 1e-6)) < 1e-9
