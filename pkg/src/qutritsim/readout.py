"""Dispersive readout: confusion matrices, shot sampling, and correction.

A confusion matrix M is column-stochastic: M[i, j] is the probability of
reading outcome i given prepared level j.  Ensemble results are corrected
by applying the inverse of the tensor product of per-site matrices, which
preserves normalization exactly but can produce slightly negative
quasi-probabilities at finite shots; those are reported, not clipped.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .core import DensityState, QuditIndexing

COLUMN_SUM_ATOL = 1e-9


def confusion_from_fidelities(fidelities, d: int = 3) -> np.ndarray:
    """Column-stochastic matrix with the given diagonal; misassignment mass
    splits equally between the wrong outcomes."""
    f = np.asarray(fidelities, dtype=float)
    if f.shape != (d,) or np.any(f < 0) or np.any(f > 1):
        raise ValueError("need one readout fidelity in [0, 1] per level")
    m = np.empty((d, d))
    for j in range(d):
        m[:, j] = (1.0 - f[j]) / (d - 1)
        m[j, j] = f[j]
    return m


def validate_confusion(m: np.ndarray, d: int = 3) -> None:
    m = np.asarray(m, dtype=float)
    if m.shape != (d, d):
        raise ValueError(f"confusion matrix must be {d}x{d}")
    if np.any(m < -1e-12) or np.any(m > 1 + 1e-12):
        raise ValueError("confusion matrix entries must lie in [0, 1]")
    if np.abs(m.sum(axis=0) - 1.0).max() > COLUMN_SUM_ATOL:
        raise ValueError("confusion matrix columns must sum to 1")


def _stack(confusion, n: int, d: int = 3) -> np.ndarray:
    if confusion is None:
        return np.broadcast_to(np.eye(d), (n, d, d)).copy()
    mats = np.asarray(confusion, dtype=float)
    if mats.ndim == 2:
        mats = np.broadcast_to(mats, (n, d, d)).copy()
    for m in mats:
        validate_confusion(m, d)
    return mats


def measured_probabilities(rho: DensityState, confusion=None) -> np.ndarray:
    """Outcome distribution over base-d strings including readout error."""
    mats = _stack(confusion, rho.indexing.n, rho.indexing.d)
    return kernels.confusion_mix(rho.populations(), mats)


def shot_rng(seed: int, task_index: int = 0) -> np.random.Generator:
    """Counter-based generator; (seed, task) keys make parallel batches
    reproducible independent of scheduling."""
    return np.random.Generator(np.random.Philox(key=np.array([seed, task_index], dtype=np.uint64)))


def readout_sample(
    rho: DensityState,
    confusion=None,
    shots: int = 0,
    seed: int = 0,
    task_index: int = 0,
) -> dict[str, int]:
    """Multinomial sample of corrected-basis strings, deterministic in seed."""
    if shots < 0:
        raise ValueError("shots must be nonnegative")
    p = measured_probabilities(rho, confusion)
    p = np.clip(p, 0.0, None)
    p = p / p.sum()
    counts = shot_rng(seed, task_index).multinomial(shots, p)
    idx = rho.indexing
    return {idx.label_string(i): int(c) for i, c in enumerate(counts) if c > 0}


def counts_to_frequencies(counts: dict[str, int], n: int, d: int = 3) -> np.ndarray:
    idx = QuditIndexing(d, n)
    freq = np.zeros(idx.dim)
    total = 0
    for label, c in counts.items():
        freq[idx.digits_to_label(tuple(int(ch) for ch in label))] += c
        total += c
    if total == 0:
        raise ValueError("empty counts")
    return freq / total


def readout_correct(frequencies, confusion, n: int | None = None, d: int = 3) -> np.ndarray:
    """Apply the inverse tensor-product confusion map to frequencies.

    Accepts a counts dict or a probability vector; the result sums to the
    input total exactly but entries may be slightly negative.
    """
    if isinstance(frequencies, dict):
        if n is None:
            n = len(next(iter(frequencies)))
        freq = counts_to_frequencies(frequencies, n, d)
    else:
        freq = np.asarray(frequencies, dtype=float)
        if n is None:
            n = round(np.log(freq.size) / np.log(d))
    mats = _stack(confusion, n, d)
    inverses = []
    for m in mats:
        if abs(np.linalg.det(m)) < 1e-12:
            raise np.linalg.LinAlgError("confusion matrix is singular")
        inverses.append(np.linalg.inv(m))
    return kernels.confusion_mix(freq, np.array(inverses))
