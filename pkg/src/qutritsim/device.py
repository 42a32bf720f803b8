"""Device configuration: qutrit coherences, couplings, readout fidelities.

Configs are JSON files whose units match the lab conventions (GHz, us,
kHz); everything converts to SI seconds and angular rad/s at ingestion.
A bundled ``device_paper.json`` carries the measured parameters of the
five-qutrit processor this toolkit models.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .readout import confusion_from_fidelities, validate_confusion
from .schedules import CrossKerrCoeffs, NoiseModel

US = 1e-6

_REQUIRED_QUTRIT_FIELDS = (
    "omega_01_ghz",
    "omega_12_ghz",
    "t1_10_us",
    "t1_21_us",
    "t2_ramsey_01_us",
    "t2_ramsey_12_us",
    "t2_ramsey_02_us",
    "t2_echo_01_us",
    "t2_echo_12_us",
    "t2_echo_02_us",
    "readout_fidelity",
)

_PAIR_KEY = re.compile(r"^q(\d+)q(\d+)$")


class ConfigValidationError(ValueError):
    """Carries every violation found in a config, with field paths."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("invalid device config:\n" + "\n".join(f"  - {p}" for p in problems))


@dataclass(frozen=True)
class QutritParams:
    label: str
    omega_01_ghz: float
    omega_12_ghz: float
    t1_10: float  # seconds
    t1_21: float
    t2_ramsey: tuple[float, float, float]  # (01, 12, 02) seconds
    t2_echo: tuple[float, float, float]
    readout_fidelity: tuple[float, float, float]
    confusion: np.ndarray = field(repr=False, default=None)
    per_clifford_error: tuple[float | None, float | None] = (None, None)


@dataclass(frozen=True)
class DeviceConfig:
    qutrits: tuple[QutritParams, ...]
    pairs: dict[tuple[int, int], CrossKerrCoeffs]
    name: str = "device"

    @property
    def n(self) -> int:
        return len(self.qutrits)

    def coupling_map(self) -> dict[tuple[int, int], CrossKerrCoeffs]:
        return dict(self.pairs)

    def pair(self, i: int, j: int) -> CrossKerrCoeffs:
        if (i, j) in self.pairs:
            return self.pairs[(i, j)]
        if (j, i) in self.pairs:
            return self.pairs[(j, i)].transpose()
        raise KeyError(f"no coupling for pair ({i}, {j})")

    def confusion_matrices(self) -> np.ndarray:
        return np.array([q.confusion for q in self.qutrits])

    def noise_model(self, scale: float = 1.0, use_echo: bool = False) -> NoiseModel:
        """Ramsey T2 values by default; protocol segments are free evolutions."""
        damping = [(q.t1_10, q.t1_21) for q in self.qutrits]
        dephasing = [(q.t2_echo if use_echo else q.t2_ramsey) for q in self.qutrits]
        return NoiseModel(damping=damping, dephasing=dephasing, scale=scale)


def bundled_config_path() -> Path:
    return Path(resources.files("qutritsim").joinpath("data/device_paper.json"))


def load_device(path: str | Path | None = None) -> DeviceConfig:
    """Parse and validate a device config; raises ConfigValidationError with
    the full violation list on any failure."""
    path = Path(path) if path is not None else bundled_config_path()
    try:
        raw = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigValidationError([f"cannot parse {path}: {exc}"]) from exc
    return parse_device(raw)


def parse_device(raw: dict) -> DeviceConfig:
    problems: list[str] = []
    if raw.get("schema") != 1:
        problems.append(f"schema: expected 1, got {raw.get('schema')!r}")
    qutrits_raw = raw.get("qutrits")
    if not isinstance(qutrits_raw, list) or not qutrits_raw:
        raise ConfigValidationError(problems + ["qutrits: missing or empty"])

    qutrits: list[QutritParams] = []
    for i, q in enumerate(qutrits_raw):
        prefix = f"qutrits[{i}]"
        label = q.get("label", f"Q{i + 1}")
        for fieldname in _REQUIRED_QUTRIT_FIELDS:
            if fieldname not in q:
                problems.append(f"{prefix}.{fieldname}: missing")
        if any(fieldname not in q for fieldname in _REQUIRED_QUTRIT_FIELDS):
            continue
        for fieldname in (
            "t1_10_us",
            "t1_21_us",
            "t2_ramsey_01_us",
            "t2_ramsey_12_us",
            "t2_ramsey_02_us",
            "t2_echo_01_us",
            "t2_echo_12_us",
            "t2_echo_02_us",
        ):
            if not q[fieldname] or q[fieldname] <= 0:
                problems.append(f"{prefix}.{fieldname}: must be positive, got {q[fieldname]!r}")
        fid = q["readout_fidelity"]
        if len(fid) != 3 or any(not 0 <= f <= 1 for f in fid):
            problems.append(f"{prefix}.readout_fidelity: need three values in [0, 1]")
            continue
        if "confusion" in q:
            confusion = np.asarray(q["confusion"], dtype=float)
            try:
                validate_confusion(confusion)
            except ValueError as exc:
                problems.append(f"{prefix}.confusion: {exc}")
                continue
        else:
            confusion = confusion_from_fidelities(fid)
        qutrits.append(
            QutritParams(
                label=label,
                omega_01_ghz=float(q["omega_01_ghz"]),
                omega_12_ghz=float(q["omega_12_ghz"]),
                t1_10=float(q["t1_10_us"]) * US,
                t1_21=float(q["t1_21_us"]) * US,
                t2_ramsey=tuple(
                    float(q[f"t2_ramsey_{s}_us"]) * US for s in ("01", "12", "02")
                ),
                t2_echo=tuple(float(q[f"t2_echo_{s}_us"]) * US for s in ("01", "12", "02")),
                readout_fidelity=tuple(float(f) for f in fid),
                confusion=confusion,
                per_clifford_error=(
                    q.get("per_clifford_error_01"),
                    q.get("per_clifford_error_12"),
                ),
            )
        )

    n = len(qutrits_raw)
    pairs: dict[tuple[int, int], CrossKerrCoeffs] = {}
    pairs_raw = raw.get("pairs", {})
    for key, val in pairs_raw.items():
        m = _PAIR_KEY.match(key)
        if not m:
            problems.append(f"pairs.{key}: key must look like q1q2")
            continue
        i, j = int(m.group(1)), int(m.group(2))
        if not (1 <= i <= n and 1 <= j <= n and i != j):
            problems.append(f"pairs.{key}: site indices out of range 1..{n}")
            continue
        missing = [f for f in ("alpha_11_khz", "alpha_12_khz", "alpha_21_khz", "alpha_22_khz") if f not in val]
        if missing:
            problems.append(f"pairs.{key}: missing {', '.join(missing)}")
            continue
        try:
            pairs[(i, j)] = CrossKerrCoeffs.from_khz(
                val["alpha_11_khz"], val["alpha_12_khz"], val["alpha_21_khz"], val["alpha_22_khz"]
            )
        except ValueError as exc:
            problems.append(f"pairs.{key}: {exc}")
    for i in range(1, n):
        if (i, i + 1) not in pairs and (i + 1, i) not in pairs:
            problems.append(f"pairs: missing nearest-neighbor pair q{i}q{i + 1}")

    if problems:
        raise ConfigValidationError(problems)
    return DeviceConfig(tuple(qutrits), pairs, name=raw.get("name", "device"))
