"""The two-qutrit maximal scrambler, its Clifford algebra, and OTOCs.

The scrambler permutes basis states |m,n> -> |2m+n, m+n> (mod 3) and is a
Clifford operation: it maps every generalized Pauli to a single Pauli, and
every non-identity single-qutrit Pauli to a genuinely two-qutrit one.  The
average out-of-time-ordered correlator over single-site Paulis (identity
included on both sides) drops from 1 to its two-qutrit floor of 1/9.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    PauliLabel,
    PureState,
    QuditIndexing,
    QuditOperator,
    all_pauli_labels,
    weyl_pauli,
)
from .tomography import mub_bases

_MUB_NAMES = ("Z", "X", "XZ", "XZ2")


class NonCliffordError(ValueError):
    def __init__(self, label: PauliLabel, residual: float):
        super().__init__(
            f"conjugation of {label} is not proportional to a single Pauli "
            f"(best residual {residual:.3e})"
        )
        self.label = label
        self.residual = residual


def scrambler_unitary() -> QuditOperator:
    """Permutation |m,n> -> |2m+n, m+n> mod 3 on two qutrits."""
    u = np.zeros((9, 9), dtype=complex)
    for m in range(3):
        for n in range(3):
            u[3 * ((2 * m + n) % 3) + (m + n) % 3, 3 * m + n] = 1.0
    return QuditOperator(u, QuditIndexing(3, 2))


def csum_matrix(control_first: bool = True) -> QuditOperator:
    """|m,n> -> |m, n+m> (control on the first qutrit), or the transpose
    wiring with control on the second."""
    u = np.zeros((9, 9), dtype=complex)
    for m in range(3):
        for n in range(3):
            if control_first:
                u[3 * m + (m + n) % 3, 3 * m + n] = 1.0
            else:
                u[3 * ((m + n) % 3) + n, 3 * m + n] = 1.0
    return QuditOperator(u, QuditIndexing(3, 2))


def clifford_conjugation_table(
    u: QuditOperator, atol: float = 1e-9
) -> dict[PauliLabel, tuple[PauliLabel, complex]]:
    """Map P -> (Q, phase) with U P U^dag = phase * Q for every Pauli label.

    Raises NonCliffordError when some conjugated Pauli is not proportional
    to a single Pauli (reported with the offending label and residual).
    """
    n = u.indexing.n
    d = u.indexing.d
    labels = all_pauli_labels(n, d)
    paulis = np.array([weyl_pauli(lab).matrix for lab in labels])
    dim = d**n
    table: dict[PauliLabel, tuple[PauliLabel, complex]] = {}
    um = u.matrix
    for label, p in zip(labels, paulis):
        v = um @ p @ um.conj().T
        overlaps = np.einsum("kij,ij->k", paulis.conj(), v) / dim
        k = int(np.argmax(np.abs(overlaps)))
        phase = overlaps[k]
        residual = float(np.abs(v - phase * paulis[k]).max())
        if abs(abs(phase) - 1.0) > atol or residual > atol:
            raise NonCliffordError(label, max(residual, abs(abs(phase) - 1.0)))
        table[label] = (labels[k], complex(phase))
    return table


def average_otoc(u: QuditOperator) -> float:
    """Average of (1/9) Tr[B(t)^dag D^dag B(t) D] with B(t) = U^dag B U over
    all 81 pairs of site-1 and site-2 Paulis, identities included.

    Equals 1 for any local-on-site-1 unitary and reaches the two-qutrit
    floor 1/9 for maximal scramblers; computed by the direct 81-term sum.
    """
    if u.indexing != QuditIndexing(3, 2):
        raise ValueError("average OTOC is defined here for two-qutrit unitaries")
    um = u.matrix
    site1 = [
        weyl_pauli(PauliLabel(((a, b), (0, 0)))).matrix for a in range(3) for b in range(3)
    ]
    site2 = [
        weyl_pauli(PauliLabel(((0, 0), (a, b)))).matrix for a in range(3) for b in range(3)
    ]
    total = 0.0 + 0.0j
    for b in site1:
        bt = um.conj().T @ b @ um
        bt_dag = bt.conj().T
        for dmat in site2:
            total += np.trace(bt_dag @ dmat.conj().T @ bt @ dmat) / 9.0
    value = total / 81.0
    if abs(value.imag) > 1e-10:
        raise ArithmeticError(f"OTOC average has imaginary part {value.imag:.3e}")
    return float(value.real)


def otoc_bound_from_fidelity(f_avg: float) -> float:
    """(4F - 1)^(-2): teleportation-fidelity upper bound on the averaged
    OTOC, assumption-free about the noise; undefined at F <= 1/4."""
    if f_avg <= 0.25:
        raise ValueError(f"bound undefined for average fidelity {f_avg} <= 1/4")
    return float((4.0 * f_avg - 1.0) ** -2)


@dataclass(frozen=True)
class DesignState:
    label: str
    state: PureState


def design_states() -> list[DesignState]:
    """The twelve single-qutrit Pauli eigenstates (a state 2-design):
    three eigenstates each of Z, X, XZ, XZ2."""
    out = []
    for name, basis in zip(_MUB_NAMES, mub_bases()):
        for j in range(3):
            out.append(
                DesignState(f"{name}:{j}", PureState(basis[:, j], QuditIndexing(3, 1)))
            )
    return out


def symmetric_projector(d: int = 3) -> np.ndarray:
    """Projector onto the symmetric subspace of two copies."""
    dim = d * d
    swap = np.zeros((dim, dim))
    for i in range(d):
        for j in range(d):
            swap[j * d + i, i * d + j] = 1.0
    return (np.eye(dim) + swap) / 2.0


def conjugate_unitary(u: QuditOperator) -> QuditOperator:
    """Entrywise complex conjugate in the computational basis."""
    return u.conjugate()
