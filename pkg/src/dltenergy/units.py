"""Energy and power quantities with exact unit conversion.

Factors are held as rationals relative to the SI base unit (J for energy,
W for power). A conversion multiplies the magnitude by the exact rational
ratio of the two factors and rounds once, so A -> B -> A lands within one
ulp of the start.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import UnitMismatchError

SECONDS_PER_HOUR = 3600

ENERGY_UNITS: dict[str, Fraction] = {
    "J": Fraction(1),
    "Ws": Fraction(1),
    "mJ": Fraction(1, 1000),
    "Wh": Fraction(3600),
    "mWh": Fraction(36, 10),
    "kWh": Fraction(3_600_000),
    "MWh": Fraction(3_600_000_000),
    "GWh": Fraction(3_600_000_000_000),
    "TWh": Fraction(3_600_000_000_000_000),
}

POWER_UNITS: dict[str, Fraction] = {
    "W": Fraction(1),
    "mW": Fraction(1, 1000),
    "kW": Fraction(1000),
}


def dimension_of(unit: str) -> str:
    if unit in ENERGY_UNITS:
        return "energy"
    if unit in POWER_UNITS:
        return "power"
    raise UnitMismatchError(f"unknown unit {unit!r}")


def _table(dimension: str) -> dict[str, Fraction]:
    return ENERGY_UNITS if dimension == "energy" else POWER_UNITS


def scale(magnitude: float, src: str, dst: str) -> float:
    """Convert a bare magnitude from unit ``src`` to unit ``dst``."""
    dim = dimension_of(src)
    if dimension_of(dst) != dim:
        raise UnitMismatchError(
            f"cannot convert {src} ({dim}) to {dst} ({dimension_of(dst)}); "
            "energy and power differ by a duration"
        )
    if src == dst:
        return float(magnitude)
    table = _table(dim)
    return float(Fraction(magnitude) * table[src] / table[dst])


@dataclass(frozen=True)
class _Quantity:
    magnitude: float
    unit: str

    dimension = ""

    def __post_init__(self):
        if dimension_of(self.unit) != self.dimension:
            raise UnitMismatchError(f"{self.unit!r} is not a unit of {self.dimension}")

    def to(self, unit: str):
        return convert(self, unit)

    @property
    def si(self) -> float:
        """Magnitude in the SI base unit (J or W)."""
        return scale(self.magnitude, self.unit, "J" if self.dimension == "energy" else "W")

    def __str__(self) -> str:
        return f"{self.magnitude:g} {self.unit}"


@dataclass(frozen=True)
class EnergyQuantity(_Quantity):
    dimension = "energy"


@dataclass(frozen=True)
class PowerQuantity(_Quantity):
    dimension = "power"


def quantity(magnitude: float, unit: str) -> EnergyQuantity | PowerQuantity:
    if dimension_of(unit) == "energy":
        return EnergyQuantity(magnitude, unit)
    return PowerQuantity(magnitude, unit)


def convert(q: EnergyQuantity | PowerQuantity, unit: str) -> EnergyQuantity | PowerQuantity:
    return type(q)(scale(q.magnitude, q.unit, unit), unit)


def joules_to_kwh(e_j: float) -> float:
    return scale(e_j, "J", "kWh")


def joules_to_twh(e_j: float) -> float:
    return scale(e_j, "J", "TWh")
