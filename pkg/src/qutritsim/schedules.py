"""Timed pulse schedules and their simulators.

A schedule is an ordered list of items: timed free evolutions under the
always-on two-qutrit dispersive coupling, instantaneous local pulses
(rotations, level permutations, software phase corrections), timed
conditional-pi entangling gates, and ``Concurrent`` blocks that run
several timed items over the same wall-clock interval.

Two simulators walk a schedule: :func:`simulate_unitary` composes the
ideal unitary, and :func:`simulate_density` evolves a density matrix with
optional per-segment relaxation and dephasing channels and optional
always-on background couplings.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import Decimal

import numpy as np

from . import kernels
from .core import DimensionMismatchError, QuditIndexing, QuditOperator
from .gates import (
    conditional_pi_partial,
    permutation_matrix,
    rotation_matrix,
)


@dataclass(frozen=True)
class CrossKerrCoeffs:
    """Phase-accumulation rates (rad/s) for the four doubly-excited states
    of one ordered qutrit pair; the coupling vanishes when either qutrit
    sits in its ground state."""

    alpha_11: float
    alpha_12: float
    alpha_21: float
    alpha_22: float

    def __post_init__(self):
        for a in (self.alpha_11, self.alpha_12, self.alpha_21, self.alpha_22):
            if not np.isfinite(a):
                raise ValueError("cross-Kerr coefficients must be finite")

    @classmethod
    def from_khz(cls, a11: float, a12: float, a21: float, a22: float) -> "CrossKerrCoeffs":
        s = 2.0 * np.pi * 1e3
        return cls(a11 * s, a12 * s, a21 * s, a22 * s)

    @classmethod
    def zero(cls) -> "CrossKerrCoeffs":
        return cls(0.0, 0.0, 0.0, 0.0)

    def rate_matrix(self) -> np.ndarray:
        """3x3 array a[i, j] with the zero row and column for level 0."""
        m = np.zeros((3, 3))
        m[1, 1] = self.alpha_11
        m[1, 2] = self.alpha_12
        m[2, 1] = self.alpha_21
        m[2, 2] = self.alpha_22
        return m

    def transpose(self) -> "CrossKerrCoeffs":
        return CrossKerrCoeffs(self.alpha_11, self.alpha_21, self.alpha_12, self.alpha_22)


# ---------------------------------------------------------------------------
# schedule items
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Evolve:
    """Free evolution of the listed couplings for ``duration`` seconds."""

    pairs: tuple[tuple[int, int], ...]
    duration: float

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(tuple(p) for p in self.pairs))
        if self.duration < 0:
            raise ValueError("durations must be nonnegative")


@dataclass(frozen=True)
class RotationPulse:
    site: int
    subspace: str
    axis: str
    angle: float

    def inverse(self) -> "RotationPulse":
        return RotationPulse(self.site, self.subspace, self.axis, -self.angle)


@dataclass(frozen=True)
class PermutationPulse:
    site: int
    subspace: str  # "01" | "12" | "02"

    def inverse(self) -> "PermutationPulse":
        return self


@dataclass(frozen=True)
class PhasePulse:
    """Software diagonal correction diag(exp(i*phases)); zero duration."""

    site: int
    phases: tuple[float, float, float]

    def inverse(self) -> "PhasePulse":
        return PhasePulse(self.site, tuple(-p for p in self.phases))


@dataclass(frozen=True)
class ConditionalPiPulse:
    """Timed entangling gate: the target's 01 levels swap when the control
    occupies ``condition``.  ``fraction`` < 1 runs a principal fractional
    power so a stretched gate can be split around decoupling pulses."""

    control: int
    target: int
    duration: float
    condition: int = 1
    fraction: float = 1.0

    def __post_init__(self):
        if self.duration < 0:
            raise ValueError("durations must be nonnegative")

    def inverse(self) -> "ConditionalPiPulse":
        return ConditionalPiPulse(
            self.control, self.target, self.duration, self.condition, -self.fraction
        )


@dataclass(frozen=True)
class Concurrent:
    """Timed items sharing one wall-clock interval (disjoint site sets)."""

    parts: tuple
    duration: float

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        if self.duration < 0:
            raise ValueError("durations must be nonnegative")


TimedItem = (Evolve, ConditionalPiPulse, Concurrent)


@dataclass(frozen=True)
class PulseSchedule:
    """Ordered schedule over an n-qutrit register; items run first-to-last."""

    items: tuple
    n_sites: int

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))

    @property
    def total_duration(self) -> float:
        return sum(it.duration for it in self.items if isinstance(it, TimedItem))

    def reversed(self) -> "PulseSchedule":
        """The inverse schedule (valid for pulse/conditional-pi sequences)."""
        inverted = []
        for item in reversed(self.items):
            if isinstance(item, Evolve):
                raise ValueError("free evolutions cannot be reversed in hardware")
            if isinstance(item, Concurrent):
                raise ValueError("reverse concurrent blocks by reversing their source schedules")
            inverted.append(item.inverse())
        return PulseSchedule(tuple(inverted), self.n_sites)

    def then(self, other: "PulseSchedule") -> "PulseSchedule":
        if other.n_sites != self.n_sites:
            raise DimensionMismatchError("schedules act on different registers")
        return PulseSchedule(self.items + other.items, self.n_sites)

    # -- serialization ------------------------------------------------------

    def to_json_obj(self) -> list:
        return [_item_to_obj(it) for it in self.items]

    def to_json(self) -> str:
        return json.dumps({"n_sites": self.n_sites, "items": self.to_json_obj()}, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "PulseSchedule":
        obj = json.loads(text)
        items = tuple(_item_from_obj(o) for o in obj["items"])
        return cls(items, int(obj["n_sites"]))


_NS = Decimal(10) ** 9


def _ns_string(seconds: float) -> str:
    # Decimal(float) is exact and scaling by a power of ten is exact in
    # Decimal, so the string is a bit-exact encoding of the duration.
    return str(Decimal(seconds) * _NS)


def _seconds_from_ns(text: str) -> float:
    return float(Decimal(text) / _NS)


def _item_to_obj(item) -> dict:
    if isinstance(item, Evolve):
        return {
            "type": "evolve",
            "pairs": [list(p) for p in item.pairs],
            "duration_ns": _ns_string(item.duration),
        }
    if isinstance(item, RotationPulse):
        return {
            "type": "pulse",
            "site": item.site,
            "subspace": item.subspace,
            "axis": item.axis,
            "angle_rad": item.angle,
        }
    if isinstance(item, PermutationPulse):
        return {"type": "pulse", "site": item.site, "subspace": item.subspace, "perm": True}
    if isinstance(item, PhasePulse):
        return {"type": "pulse", "site": item.site, "phases_rad": list(item.phases)}
    if isinstance(item, ConditionalPiPulse):
        return {
            "type": "conditional_pi",
            "control": item.control,
            "target": item.target,
            "condition": item.condition,
            "fraction": item.fraction,
            "duration_ns": _ns_string(item.duration),
        }
    if isinstance(item, Concurrent):
        return {
            "type": "concurrent",
            "parts": [_item_to_obj(p) for p in item.parts],
            "duration_ns": _ns_string(item.duration),
        }
    raise TypeError(f"unknown schedule item {item!r}")


def _item_from_obj(obj: dict):
    kind = obj["type"]
    if kind == "evolve":
        return Evolve(tuple(tuple(p) for p in obj["pairs"]), _seconds_from_ns(obj["duration_ns"]))
    if kind == "pulse":
        if "phases_rad" in obj:
            return PhasePulse(obj["site"], tuple(obj["phases_rad"]))
        if obj.get("perm"):
            return PermutationPulse(obj["site"], obj["subspace"])
        return RotationPulse(obj["site"], obj["subspace"], obj["axis"], obj["angle_rad"])
    if kind == "conditional_pi":
        return ConditionalPiPulse(
            obj["control"],
            obj["target"],
            _seconds_from_ns(obj["duration_ns"]),
            obj.get("condition", 1),
            obj.get("fraction", 1.0),
        )
    if kind == "concurrent":
        return Concurrent(
            tuple(_item_from_obj(p) for p in obj["parts"]), _seconds_from_ns(obj["duration_ns"])
        )
    raise ValueError(f"unknown schedule item type {kind!r}")


# ---------------------------------------------------------------------------
# simulation
# ---------------------------------------------------------------------------


def _coupling_rate(couplings: dict, pair: tuple[int, int]) -> np.ndarray | None:
    if pair in couplings:
        return couplings[pair].rate_matrix()
    rev = (pair[1], pair[0])
    if rev in couplings:
        return couplings[rev].rate_matrix().T
    return None


def _evolve_phases(pairs, duration, couplings, digit_table) -> np.ndarray:
    """Diagonal phase vector of exp(-i H t) for the listed couplings."""
    phases = np.zeros(digit_table.shape[1])
    for pair in pairs:
        rate = _coupling_rate(couplings, tuple(pair))
        if rate is None:
            raise KeyError(f"no cross-Kerr coefficients supplied for pair {tuple(pair)}")
        phases += rate[digit_table[pair[0] - 1], digit_table[pair[1] - 1]] * duration
    return phases


def _local_matrix(item) -> tuple[int, np.ndarray]:
    if isinstance(item, RotationPulse):
        return item.site, rotation_matrix(item.subspace, item.axis, item.angle)
    if isinstance(item, PermutationPulse):
        return item.site, permutation_matrix(item.subspace)
    if isinstance(item, PhasePulse):
        return item.site, np.diag(np.exp(1j * np.asarray(item.phases)))
    raise TypeError(f"not a local pulse: {item!r}")


class ScheduleSimulator:
    """Shared plumbing for composing schedule items on an n-site register."""

    def __init__(self, n: int, couplings: dict | None = None, d: int = 3):
        self.n = n
        self.d = d
        self.indexing = QuditIndexing(d, n)
        self.couplings = dict(couplings or {})
        self.digit_table = self.indexing.digit_table()

    def embed_local(self, site: int, m: np.ndarray) -> np.ndarray:
        from .core import embed

        return embed(m, [site], self.n, self.d).matrix

    def embed_pair(self, sites: tuple[int, int], m: np.ndarray) -> np.ndarray:
        from .core import embed

        return embed(m, list(sites), self.n, self.d).matrix

    def item_unitary(self, item) -> np.ndarray:
        if isinstance(item, Evolve):
            phases = _evolve_phases(item.pairs, item.duration, self.couplings, self.digit_table)
            return np.diag(np.exp(-1j * phases))
        if isinstance(item, ConditionalPiPulse):
            gate = conditional_pi_partial(item.condition, item.fraction)
            return self.embed_pair((item.control, item.target), gate)
        if isinstance(item, Concurrent):
            u = np.eye(self.indexing.dim, dtype=complex)
            for part in item.parts:
                u = self.item_unitary(part) @ u
            return u
        site, m = _local_matrix(item)
        return self.embed_local(site, m)


def simulate_unitary(schedule: PulseSchedule, couplings: dict | None = None, d: int = 3) -> QuditOperator:
    """Compose the ideal unitary of a schedule."""
    sim = ScheduleSimulator(schedule.n_sites, couplings, d)
    u = np.eye(sim.indexing.dim, dtype=complex)
    for item in schedule.items:
        u = sim.item_unitary(item) @ u
    return QuditOperator(u, sim.indexing)


@dataclass
class NoiseModel:
    """Per-site relaxation and dephasing rates used by the density simulator.

    ``damping[i]`` is (T1_10, T1_21) and ``dephasing[i]`` is
    (T2_01, T2_12, T2_02), in seconds, for 1-based site i+1; ``scale``
    multiplies all decay rates (0 disables noise).
    """

    damping: list[tuple[float, float]]
    dephasing: list[tuple[float, float, float]]
    scale: float = 1.0

    _cache: dict = field(default_factory=dict, repr=False)

    def site_kraus(self, site: int, duration: float) -> np.ndarray | None:
        if self.scale <= 0.0 or duration <= 0.0:
            return None
        key = (site, duration)
        if key not in self._cache:
            from .channels import amplitude_damping_channel, dephasing_channel

            t1a, t1b = self.damping[site - 1]
            damp = amplitude_damping_channel(duration, t1a / self.scale, t1b / self.scale)
            t2 = self.dephasing[site - 1]
            deph = dephasing_channel(duration, *(t / self.scale for t in t2))
            stack = []
            for kd in damp.kraus:
                for kp in deph.kraus:
                    stack.append(kd @ kp)
            self._cache[key] = np.array(stack)
        return self._cache[key]


def simulate_density(
    schedule: PulseSchedule,
    rho0: np.ndarray,
    couplings: dict | None = None,
    noise: NoiseModel | None = None,
    background_pairs: dict | None = None,
    d: int = 3,
) -> np.ndarray:
    """Evolve a density matrix through a schedule.

    ``background_pairs`` optionally maps site pairs to coefficients applied
    during every timed item (always-on couplings), excluding the pair a
    conditional-pi gate acts on and any pair already listed by the item.
    """
    sim = ScheduleSimulator(schedule.n_sites, couplings, d)
    rho = np.asarray(rho0, dtype=complex).copy()
    background = dict(background_pairs or {})

    def apply_noise(duration: float):
        nonlocal rho
        if noise is None or duration <= 0:
            return
        for site in range(1, schedule.n_sites + 1):
            stack = noise.site_kraus(site, duration)
            if stack is None:
                continue
            left = d ** (site - 1)
            right = d ** (schedule.n_sites - site)
            rho = kernels.apply_site_kraus(rho, stack, left, d, right)

    def apply_background(duration: float, exclude: set):
        nonlocal rho
        if not background or duration <= 0:
            return
        pairs = [p for p in background if frozenset(p) not in exclude]
        if not pairs:
            return
        phases = _evolve_phases(pairs, duration, background, sim.digit_table)
        rho = kernels.apply_diag_phases(rho, phases)

    def run_item(item, top_level: bool):
        nonlocal rho
        if isinstance(item, Concurrent):
            exclude = set()
            for part in item.parts:
                run_item(part, top_level=False)
                if isinstance(part, ConditionalPiPulse):
                    exclude.add(frozenset((part.control, part.target)))
                if isinstance(part, Evolve):
                    exclude.update(frozenset(p) for p in part.pairs)
            apply_background(item.duration, exclude)
            apply_noise(item.duration)
            return
        if isinstance(item, Evolve):
            phases = _evolve_phases(item.pairs, item.duration, sim.couplings, sim.digit_table)
            rho = kernels.apply_diag_phases(rho, phases)
            if top_level:
                exclude = {frozenset(p) for p in item.pairs}
                apply_background(item.duration, exclude)
                apply_noise(item.duration)
            return
        if isinstance(item, ConditionalPiPulse):
            u = sim.item_unitary(item)
            rho = u @ rho @ u.conj().T
            if top_level:
                apply_background(item.duration, {frozenset((item.control, item.target))})
                apply_noise(item.duration)
            return
        site, m = _local_matrix(item)
        left = d ** (site - 1)
        right = d ** (schedule.n_sites - site)
        rho = kernels.apply_site_kraus(rho, m[None, :, :], left, d, right)

    for item in schedule.items:
        run_item(item, top_level=True)
    return rho


# ---------------------------------------------------------------------------
# parallel composition
# ---------------------------------------------------------------------------


def parallel_merge(a: PulseSchedule, b: PulseSchedule, n_sites: int) -> PulseSchedule:
    """Run two schedules (on disjoint site sets) over a common wall clock.

    Timed items are split at the union of both schedules' segment
    boundaries; conditional-pi fractions split proportionally, which is
    exact for the principal fractional powers used here.
    """

    def timeline(s: PulseSchedule):
        events = []  # (start, item, end); instantaneous pulses have start == end
        t = 0.0
        for item in s.items:
            if isinstance(item, TimedItem):
                events.append((t, item, t + item.duration))
                t += item.duration
            else:
                events.append((t, item, t))
        return events, t

    ev_a, dur_a = timeline(a)
    ev_b, dur_b = timeline(b)
    cuts = sorted(
        {0.0, dur_a, dur_b}
        | {x for start, _, end in ev_a for x in (start, end)}
        | {x for start, _, end in ev_b for x in (start, end)}
    )

    def slice_item(item, frac: float, dt: float):
        if isinstance(item, Evolve):
            return Evolve(item.pairs, dt)
        if isinstance(item, ConditionalPiPulse):
            return ConditionalPiPulse(
                item.control, item.target, dt, item.condition, item.fraction * frac
            )
        if isinstance(item, Concurrent):
            return Concurrent(tuple(slice_item(p, frac, dt) for p in item.parts), dt)
        raise TypeError(f"cannot slice {item!r}")

    merged: list = []
    for t0, t1 in zip(cuts[:-1], cuts[1:]):
        dt = t1 - t0
        # instantaneous pulses scheduled at t0 (a first, then b)
        for events in (ev_a, ev_b):
            for t, item, end in events:
                if not isinstance(item, TimedItem) and abs(t - t0) < 1e-15:
                    merged.append(item)
        if dt <= 1e-15:
            continue
        parts = []
        for events, total in ((ev_a, dur_a), (ev_b, dur_b)):
            for t, item, end in events:
                if isinstance(item, TimedItem) and t < t1 - 1e-15 and end > t0 + 1e-15:
                    frac = dt / item.duration
                    parts.append(slice_item(item, frac, dt))
        if len(parts) == 1:
            merged.append(parts[0])
        elif parts:
            merged.append(Concurrent(tuple(parts), dt))
    # trailing pulses at the very end
    for events in (ev_a, ev_b):
        for t, item, end in events:
            if not isinstance(item, TimedItem) and abs(t - cuts[-1]) < 1e-15:
                merged.append(item)
    return PulseSchedule(tuple(merged), n_sites)
