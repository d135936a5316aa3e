"""Total annual energy consumption of a node fleet.

The estimate has two terms:

* base energy: each node drawing its base power all year, scaled by the
  PUE of the facility it runs in;
* message energy: per day, every node processes ``x_d`` messages per
  second at the per-message energy its hardware needs at that rate.

Reductions use ``math.fsum`` so the result does not depend on the order
classes or days are visited in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError
from .measurement import ScenarioStats
from .metrics import PerMessageCurve, interpolate_energy
from .units import joules_to_kwh, joules_to_twh

SECONDS_PER_DAY = 86_400
DAYS_PER_YEAR = 365


def _number(value, what: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{what} must be a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"{what} must be finite, got {value!r}")
    return float(value)


@dataclass(frozen=True)
class HardwareClass:
    name: str
    pue: float
    p_base_W: float
    node_count: int
    curve: PerMessageCurve

    def __post_init__(self):
        if not self.pue >= 1.0:
            raise ConfigError(f"class {self.name!r}: PUE must be >= 1, got {self.pue!r}")
        if not self.p_base_W > 0:
            raise ConfigError(f"class {self.name!r}: base power must be > 0, got {self.p_base_W!r}")
        if isinstance(self.node_count, bool) or not isinstance(self.node_count, int) or self.node_count < 1:
            raise ConfigError(f"class {self.name!r}: node_count must be a positive integer")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "pue": self.pue,
            "p_base_w": self.p_base_W,
            "node_count": self.node_count,
            "curve": self.curve.to_list(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "HardwareClass":
        if not isinstance(data, dict):
            raise ConfigError("hardware class must be a JSON object")
        missing = {"name", "pue", "p_base_w", "node_count", "curve"} - set(data)
        if missing:
            raise ConfigError(f"hardware class: missing fields {sorted(missing)}")
        name = str(data["name"])
        n = data["node_count"]
        if isinstance(n, bool) or not isinstance(n, int):
            raise ConfigError(f"class {name!r}: node_count must be an integer, got {n!r}")
        return cls(
            name=name,
            pue=_number(data["pue"], f"class {name!r} pue"),
            p_base_W=_number(data["p_base_w"], f"class {name!r} p_base_w"),
            node_count=n,
            curve=PerMessageCurve.from_list(data["curve"]),
        )


@dataclass(frozen=True)
class Fleet:
    classes: tuple[HardwareClass, ...]

    def __post_init__(self):
        object.__setattr__(self, "classes", tuple(self.classes))
        if not self.classes:
            raise ConfigError("fleet needs at least one hardware class")
        names = [c.name for c in self.classes]
        if len(set(names)) != len(names):
            raise ConfigError(f"hardware class names must be unique: {names}")

    @property
    def n_total(self) -> int:
        return sum(c.node_count for c in self.classes)

    def to_dict(self) -> dict:
        return {"classes": [c.to_dict() for c in self.classes]}

    @classmethod
    def from_dict(cls, data: dict) -> "Fleet":
        if not isinstance(data, dict) or not isinstance(data.get("classes"), list):
            raise ConfigError("fleet must be an object with a 'classes' list")
        return cls(tuple(HardwareClass.from_dict(c) for c in data["classes"]))


@dataclass(frozen=True)
class RateProfile:
    """Average message rate (mps) for each day of the modeled period."""

    daily_rates_mps: tuple[float, ...]

    def __post_init__(self):
        rates = tuple(float(x) for x in self.daily_rates_mps)
        if not rates:
            raise ConfigError("rate profile needs at least one day")
        for x in rates:
            if not (math.isfinite(x) and x >= 0):
                raise ConfigError(f"daily rates must be finite and >= 0, got {x!r}")
        object.__setattr__(self, "daily_rates_mps", rates)

    @property
    def days(self) -> int:
        return len(self.daily_rates_mps)

    @classmethod
    def constant(cls, mps: float, days: int = DAYS_PER_YEAR) -> "RateProfile":
        return cls((float(mps),) * days)

    @classmethod
    def from_json(cls, data) -> "RateProfile":
        """Accept a list of daily rates or ``{"constant_mps": x, "days": n}``."""
        if isinstance(data, list):
            return cls(tuple(_number(x, "daily rate") for x in data))
        if isinstance(data, dict) and "constant_mps" in data:
            unknown = set(data) - {"constant_mps", "days"}
            if unknown:
                raise ConfigError(f"rate profile: unknown keys {sorted(unknown)}")
            days = data.get("days", DAYS_PER_YEAR)
            if isinstance(days, bool) or not isinstance(days, int) or days < 1:
                raise ConfigError(f"rate profile: days must be a positive integer, got {days!r}")
            return cls.constant(_number(data["constant_mps"], "constant_mps"), days)
        raise ConfigError("rate profile must be a list of daily mps or {constant_mps, days}")


@dataclass(frozen=True)
class ClassBreakdown:
    name: str
    node_count: int
    pue: float
    e_base_J: float
    e_messages_J: float
    e_messages_it_J: float  # before the PUE multiplier

    @property
    def total_J(self) -> float:
        return self.e_base_J + self.e_messages_J


def _energy_dict(e_j: float) -> dict:
    return {"j": e_j, "kwh": joules_to_kwh(e_j), "twh": joules_to_twh(e_j)}


@dataclass(frozen=True)
class AnnualEstimate:
    e_base_J: float
    e_messages_J: float
    total_J: float
    classes: tuple[ClassBreakdown, ...] = ()
    days: int = DAYS_PER_YEAR

    @property
    def total_kWh(self) -> float:
        return joules_to_kwh(self.total_J)

    def to_dict(self) -> dict:
        return {
            "days": self.days,
            "e_base": _energy_dict(self.e_base_J),
            "e_messages": _energy_dict(self.e_messages_J),
            "total": _energy_dict(self.total_J),
            "classes": [
                {
                    "name": c.name,
                    "node_count": c.node_count,
                    "pue": c.pue,
                    "e_base": _energy_dict(c.e_base_J),
                    "e_messages": _energy_dict(c.e_messages_J),
                    "e_messages_before_pue_j": c.e_messages_it_J,
                    "total": _energy_dict(c.total_J),
                }
                for c in self.classes
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AnnualEstimate":
        """Re-read an estimate document; only the joule values are used."""
        try:
            classes = tuple(
                ClassBreakdown(
                    name=str(c["name"]),
                    node_count=int(c["node_count"]),
                    pue=float(c["pue"]),
                    e_base_J=float(c["e_base"]["j"]),
                    e_messages_J=float(c["e_messages"]["j"]),
                    e_messages_it_J=float(c.get("e_messages_before_pue_j", 0.0)),
                )
                for c in data.get("classes", [])
            )
            return cls(
                e_base_J=float(data["e_base"]["j"]),
                e_messages_J=float(data["e_messages"]["j"]),
                total_J=float(data["total"]["j"]),
                classes=classes,
                days=int(data.get("days", DAYS_PER_YEAR)),
            )
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise ConfigError(f"not an annual-estimate document: {exc!r}") from None


def _class_base(c: HardwareClass, days: int) -> float:
    return c.pue * c.p_base_W * c.node_count * SECONDS_PER_DAY * days


def e_base(fleet: Fleet, days: int = DAYS_PER_YEAR) -> tuple[float, list[float]]:
    """Base energy over ``days`` days; returns (total, per-class terms)."""
    terms = [_class_base(c, days) for c in fleet.classes]
    return math.fsum(terms), terms


def e_messages_class(c: HardwareClass, profile: RateProfile) -> float:
    """Message-processing energy of one class before its PUE multiplier."""
    per_day = [
        c.node_count * interpolate_energy(c.curve, x) * x * SECONDS_PER_DAY
        for x in profile.daily_rates_mps
        if x > 0
    ]
    return math.fsum(per_day)


def e_messages_total(fleet: Fleet, profile: RateProfile) -> tuple[float, list[float]]:
    terms = [c.pue * e_messages_class(c, profile) for c in fleet.classes]
    return math.fsum(terms), terms


def annual_total(fleet: Fleet, profile: RateProfile) -> AnnualEstimate:
    # the base term covers the same number of days as the profile
    base, base_terms = e_base(fleet, profile.days)
    raw_terms = [e_messages_class(c, profile) for c in fleet.classes]
    msg_terms = [c.pue * raw for c, raw in zip(fleet.classes, raw_terms)]
    msgs = math.fsum(msg_terms)
    breakdown = tuple(
        ClassBreakdown(
            name=c.name,
            node_count=c.node_count,
            pue=c.pue,
            e_base_J=b,
            e_messages_J=m,
            e_messages_it_J=raw,
        )
        for c, b, m, raw in zip(fleet.classes, base_terms, msg_terms, raw_terms)
    )
    return AnnualEstimate(base, msgs, base + msgs, breakdown, profile.days)


def p_base_from_measurement(reference: ScenarioStats, resting_per_node_above_ref_W: float) -> float:
    """Base node power: bare-device reference plus the per-node resting overhead."""
    if reference.mean_power_W < 0 or resting_per_node_above_ref_W < 0:
        raise ConfigError("reference power and resting overhead must be non-negative")
    return reference.mean_power_W + resting_per_node_above_ref_W

