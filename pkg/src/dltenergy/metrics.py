"""Normalized per-node power and energy-per-message figures.

A :class:`ScenarioSet` bundles the reference (bare device), resting (node
network at base activity) and loaded (fixed message rate) scenarios of one
measurement campaign. Fleet-level measurements are split across nodes only
when a node-uniformity report passed or the caller explicitly overrides.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Mapping

from .errors import (
    ConfigError,
    InputError,
    InvariantViolation,
    NegativeNormalizationError,
    NonUniformError,
)
from .measurement import (
    DEFAULT_UNIFORMITY_TOL,
    NodeAnalytics,
    ScenarioStats,
    UniformityReport,
    check_node_uniformity,
)

BULB_W = 60.0
RESTING = "resting"
REFERENCE = "reference"


def _parse_rate(key) -> float:
    text = str(key).strip().lower()
    if text.endswith("mps"):
        text = text[:-3].strip()
    try:
        rate = float(text)
    except ValueError:
        raise ConfigError(f"loaded scenario key {key!r} is not a rate in mps") from None
    if not (math.isfinite(rate) and rate > 0):
        raise ConfigError(f"loaded scenario rate must be positive, got {key!r}")
    return rate


def format_rate(rate: float) -> str:
    return f"{rate:g}"


@dataclass(frozen=True)
class ScenarioSet:
    node_count: int
    reference: ScenarioStats
    resting: ScenarioStats
    loaded: Mapping[float, ScenarioStats]
    node_analytics: tuple[NodeAnalytics, ...] = ()
    uniformity_tol: float = DEFAULT_UNIFORMITY_TOL
    allow_nonuniform: bool = False
    uniformity: UniformityReport | None = field(init=False, default=None)

    def __post_init__(self):
        if not isinstance(self.node_count, int) or self.node_count < 1:
            raise ConfigError(f"node_count must be a positive integer, got {self.node_count!r}")
        loaded = {float(r): s for r, s in sorted(self.loaded.items())}
        for rate in loaded:
            if not rate > 0:
                raise ConfigError(f"loaded rates must be positive, got {rate!r}")
        object.__setattr__(self, "loaded", loaded)
        object.__setattr__(self, "node_analytics", tuple(self.node_analytics))
        if self.resting.mean_power_W < self.reference.mean_power_W:
            raise NegativeNormalizationError(
                "resting", self.resting.mean_power_W, self.reference.mean_power_W
            )
        for rate, stats in loaded.items():
            if stats.mean_power_W < self.resting.mean_power_W:
                raise NegativeNormalizationError(
                    f"{format_rate(rate)} mps", stats.mean_power_W, self.resting.mean_power_W
                )
        if len(self.node_analytics) >= 2:
            object.__setattr__(
                self, "uniformity", check_node_uniformity(self.node_analytics, self.uniformity_tol)
            )

    @property
    def rates(self) -> list[float]:
        return list(self.loaded)

    def stats_for(self, label) -> ScenarioStats:
        if isinstance(label, str) and label.strip().lower() == RESTING:
            return self.resting
        if isinstance(label, str) and label.strip().lower() == REFERENCE:
            return self.reference
        try:
            rate = float(label) if not isinstance(label, str) else _parse_rate(label)
        except (ConfigError, TypeError, ValueError):
            raise InputError(f"unknown scenario {label!r}") from None
        if rate not in self.loaded:
            raise InputError(f"no loaded scenario at {format_rate(rate)} mps")
        return self.loaded[rate]

    def check_division(self) -> None:
        """Raise unless splitting fleet power by ``node_count`` is licensed."""
        if self.node_count == 1 or self.allow_nonuniform:
            return
        if self.uniformity is None:
            raise NonUniformError(
                f"dividing by {self.node_count} nodes needs node analytics for a "
                "uniformity check (or an explicit override)"
            )
        if not self.uniformity.passed:
            raise NonUniformError(
                f"node analytics are not uniform: max spread {self.uniformity.max_spread:.4g} "
                f"exceeds tolerance {self.uniformity.tolerance:g}"
            )

    def to_dict(self) -> dict:
        d = {
            "node_count": self.node_count,
            "reference": self.reference.to_dict(),
            "resting": self.resting.to_dict(),
            "loaded": {format_rate(r): s.to_dict() for r, s in self.loaded.items()},
            "uniformity_tol": self.uniformity_tol,
        }
        if self.node_analytics:
            d["node_analytics"] = [n.to_dict() for n in self.node_analytics]
        return d

    @classmethod
    def from_dict(cls, data: dict, allow_nonuniform: bool = False) -> "ScenarioSet":
        if not isinstance(data, dict):
            raise ConfigError("scenario set must be a JSON object")
        for key in ("node_count", "reference", "resting", "loaded"):
            if key not in data:
                raise ConfigError(f"scenario set: missing field {key!r}")
        node_count = data["node_count"]
        if isinstance(node_count, bool) or not isinstance(node_count, int):
            raise ConfigError(f"node_count must be an integer, got {node_count!r}")
        if not isinstance(data["loaded"], dict):
            raise ConfigError("scenario set: 'loaded' must map rates to scenarios")
        analytics = data.get("node_analytics") or []
        if not isinstance(analytics, list) or not all(isinstance(a, dict) for a in analytics):
            raise ConfigError("node_analytics must be a list of objects")
        tol = data.get("uniformity_tol", DEFAULT_UNIFORMITY_TOL)
        if isinstance(tol, bool) or not isinstance(tol, (int, float)) or not 0 < tol < 1:
            raise ConfigError(f"uniformity_tol must lie in (0, 1), got {tol!r}")
        loaded = {}
        for key, value in data["loaded"].items():
            rate = _parse_rate(key)
            if rate in loaded:
                raise ConfigError(f"duplicate loaded rate {key!r}")
            loaded[rate] = ScenarioStats.from_dict(value, f"{format_rate(rate)}mps")
        return cls(
            node_count=node_count,
            reference=ScenarioStats.from_dict(data["reference"], REFERENCE),
            resting=ScenarioStats.from_dict(data["resting"], RESTING),
            loaded=loaded,
            node_analytics=tuple(NodeAnalytics.from_dict(a) for a in analytics),
            uniformity_tol=float(tol),
            allow_nonuniform=allow_nonuniform,
        )


@dataclass(frozen=True)
class PerMessageCurve:
    """Measured (rate in mps, energy per message in J) knots."""

    points: tuple[tuple[float, float], ...]

    def __post_init__(self):
        pts = tuple((float(r), float(e)) for r, e in self.points)
        if not pts:
            raise ConfigError("per-message curve needs at least one point")
        for r, e in pts:
            if not (math.isfinite(r) and r > 0):
                raise ConfigError(f"curve rate must be positive, got {r!r}")
            if not (math.isfinite(e) and e > 0):
                raise ConfigError(f"curve energy must be positive, got {e!r}")
        for (r0, _), (r1, _) in zip(pts, pts[1:]):
            if not r1 > r0:
                raise ConfigError("curve rates must be strictly increasing")
        object.__setattr__(self, "points", pts)

    @property
    def rates(self) -> list[float]:
        return [r for r, _ in self.points]

    def to_list(self) -> list[dict]:
        return [{"rate_mps": r, "energy_j": e} for r, e in self.points]

    @classmethod
    def from_list(cls, data) -> "PerMessageCurve":
        if not isinstance(data, list):
            raise ConfigError("curve must be a list of {rate_mps, energy_j} objects")
        pts = []
        for item in data:
            if not isinstance(item, dict) or set(item) != {"rate_mps", "energy_j"}:
                raise ConfigError(f"bad curve point {item!r}")
            r, e = item["rate_mps"], item["energy_j"]
            if any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in (r, e)):
                raise ConfigError(f"bad curve point {item!r}")
            pts.append((r, e))
        return cls(tuple(pts))


def per_node_power(total_W: float, node_count: int) -> float:
    if node_count < 1:
        raise ConfigError(f"node_count must be >= 1, got {node_count!r}")
    return total_W / node_count


def normalize_reference(s: ScenarioSet, label) -> float:
    """Per-node power above the bare-device reference, in W."""
    stats = s.stats_for(label)
    s.check_division()
    return (stats.mean_power_W - s.reference.mean_power_W) / s.node_count


def normalize_resting(s: ScenarioSet, rate) -> float:
    """Per-node power above resting for a loaded rate, in W."""
    if isinstance(rate, str) and rate.strip().lower() in (RESTING, REFERENCE):
        raise InputError(f"{rate!r} is not a loaded rate")
    stats = s.stats_for(rate)
    s.check_division()
    return (stats.mean_power_W - s.resting.mean_power_W) / s.node_count


def energy_per_message(s: ScenarioSet, rate) -> float:
    """Marginal energy per message (issuance included) at a loaded rate, in J."""
    if isinstance(rate, (int, float)) and rate == 0:
        raise InputError("energy per message is undefined at zero rate")
    if isinstance(rate, str) and rate.strip().lower() in (RESTING, REFERENCE):
        raise InputError(f"{rate!r} is not a loaded rate")
    stats = s.stats_for(rate)
    x = float(rate) if not isinstance(rate, str) else _parse_rate(rate)
    s.check_division()
    return (stats.mean_power_W - s.resting.mean_power_W) / (s.node_count * x)


def per_message_curve(s: ScenarioSet) -> PerMessageCurve:
    points = tuple((r, energy_per_message(s, r)) for r in s.rates)
    for r, e in points:
        if not e > 0:
            raise InvariantViolation(
                f"{format_rate(r)} mps draws no power above resting; no per-message energy"
            )
    return PerMessageCurve(points)


def message_total_energy(e_issue_J: float, e_proc_J: float, n_nodes: int) -> float:
    """Network-wide energy to add one message: one issuer, n-1 processors."""
    if n_nodes < 1:
        raise ConfigError(f"n_nodes must be >= 1, got {n_nodes!r}")
    if e_issue_J < 0 or e_proc_J < 0:
        raise ConfigError("message energies must be non-negative")
    return e_issue_J + (n_nodes - 1) * e_proc_J


def interpolate_energy(curve: PerMessageCurve, rate: float) -> float:
    """Energy per message at ``rate``, linear between knots, clamped outside."""
    if curve is None or not curve.points:
        raise ConfigError("empty per-message curve")
    if not rate > 0:
        raise InputError(f"rate must be positive, got {rate!r}")
    pts = curve.points
    rates = curve.rates
    if rate <= rates[0]:
        return pts[0][1]
    if rate >= rates[-1]:
        return pts[-1][1]
    i = bisect.bisect_left(rates, rate)
    if rates[i] == rate:
        return pts[i][1]
    (r0, e0), (r1, e1) = pts[i - 1], pts[i]
    value = e0 + (e1 - e0) * ((rate - r0) / (r1 - r0))
    # keep rounding from overshooting the bracketing knots
    return min(max(value, min(e0, e1)), max(e0, e1))


def percent_difference(candidate: float, baseline: float) -> float:
    if baseline == 0:
        raise InputError("percent difference against a zero baseline")
    return (candidate - baseline) / baseline * 100.0


def bulb_fraction(power_W: float, bulb_W: float = BULB_W) -> float:
    """Power as a percentage of a light bulb's draw (60 W by default)."""
    if not bulb_W > 0:
        raise InputError("bulb power must be positive")
    return power_W / bulb_W * 100.0


@dataclass(frozen=True)
class MetricsTables:
    """Per-node normalized power and energy-per-message for every loaded rate."""

    node_count: int
    above_reference_W: dict[str, float]
    above_resting_W: dict[float, float]
    energy_per_message_J: dict[float, float]
    curve: PerMessageCurve | None
    uniformity: UniformityReport | None = None
    override_used: bool = False

    def to_dict(self) -> dict:
        d = {
            "node_count": self.node_count,
            "per_node_above_reference_w": dict(self.above_reference_W),
            "per_node_above_resting_w": {format_rate(r): v for r, v in self.above_resting_W.items()},
            "energy_per_message_j": {format_rate(r): v for r, v in self.energy_per_message_J.items()},
            "curve": self.curve.to_list() if self.curve else [],
            "allow_nonuniform": self.override_used,
        }
        if self.uniformity is not None:
            d["uniformity"] = self.uniformity.to_dict()
        return d


def compute_tables(s: ScenarioSet) -> MetricsTables:
    s.check_division()
    above_ref = {RESTING: normalize_reference(s, RESTING)}
    for r in s.rates:
        above_ref[format_rate(r)] = normalize_reference(s, r)
    return MetricsTables(
        node_count=s.node_count,
        above_reference_W=above_ref,
        above_resting_W={r: normalize_resting(s, r) for r in s.rates},
        energy_per_message_J={r: energy_per_message(s, r) for r in s.rates},
        curve=per_message_curve(s) if s.rates else None,
        uniformity=s.uniformity,
        override_used=s.allow_nonuniform and s.node_count > 1,
    )
