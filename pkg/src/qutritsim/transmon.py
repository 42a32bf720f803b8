"""Transmon parameter formulas: charge dispersion and anharmonicity."""

from __future__ import annotations

from dataclasses import dataclass
from math import exp, factorial, pi, sqrt


@dataclass(frozen=True)
class TransmonParams:
    """Josephson and charging energies in any common angular-frequency unit."""

    e_j: float
    e_c: float

    def __post_init__(self):
        if self.e_j <= 0 or self.e_c <= 0:
            raise ValueError("transmon energies must be positive")

    @property
    def ratio(self) -> float:
        return self.e_j / self.e_c


def charge_dispersion(m: int, params: TransmonParams) -> float:
    """Asymptotic offset-charge sensitivity of level m (sign alternates with m).

    Valid deep in the large-E_J/E_C regime; the returned value carries the
    units of E_C.
    """
    if m < 0:
        raise ValueError("level index must be nonnegative")
    if params.ratio <= 1:
        raise ValueError("formula requires E_J/E_C > 1")
    r = params.ratio
    return (
        (-1.0) ** m
        * params.e_c
        * 2.0 ** (4 * m + 5)
        / factorial(m)
        * sqrt(2.0 / pi)
        * (r / 2.0) ** (m / 2.0 + 0.75)
        * exp(-sqrt(8.0 * r))
    )


def relative_anharmonicity(params: TransmonParams) -> float:
    """alpha_r = -(8 E_J / E_C)**(-1/2); shrinks as the ratio grows."""
    return -((8.0 * params.ratio) ** -0.5)
