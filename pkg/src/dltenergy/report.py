"""Baseline comparisons and deterministic text/JSON report rendering."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .errors import ConfigError, UnitMismatchError
from .measurement import ScenarioStats, UniformityReport
from .metrics import MetricsTables, bulb_fraction, format_rate, per_node_power
from .taec import AnnualEstimate
from .units import EnergyQuantity, PowerQuantity, dimension_of, quantity, scale

SCHEMA_VERSION = 1
ANNUAL_KINDS = ("annual_energy", "per_capita_energy")
BASELINE_KINDS = ANNUAL_KINDS + ("device_power", "reference_energy")
LED_SECOND_J = 1.0


@dataclass(frozen=True)
class Baseline:
    name: str
    kind: str
    quantity: EnergyQuantity | PowerQuantity
    source: str = ""
    decimals: int = 2

    def __post_init__(self):
        if self.kind not in BASELINE_KINDS:
            raise ConfigError(f"baseline {self.name!r}: unknown kind {self.kind!r}")
        if not self.quantity.magnitude > 0:
            raise ConfigError(f"baseline {self.name!r}: magnitude must be > 0")

    @classmethod
    def from_dict(cls, data: dict) -> "Baseline":
        if not isinstance(data, dict):
            raise ConfigError("baseline must be a JSON object")
        missing = {"name", "kind", "magnitude", "unit"} - set(data)
        if missing:
            raise ConfigError(f"baseline: missing fields {sorted(missing)}")
        mag = data["magnitude"]
        if isinstance(mag, bool) or not isinstance(mag, (int, float)) or not math.isfinite(mag):
            raise ConfigError(f"baseline {data['name']!r}: magnitude must be a number")
        decimals = data.get("decimals", 2)
        if isinstance(decimals, bool) or not isinstance(decimals, int) or not 0 <= decimals <= 15:
            raise ConfigError(f"baseline {data['name']!r}: decimals must be an integer in [0, 15]")
        return cls(
            name=str(data["name"]),
            kind=str(data["kind"]),
            quantity=quantity(float(mag), str(data["unit"])),
            source=str(data.get("source", "")),
            decimals=decimals,
        )

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "magnitude": self.quantity.magnitude,
            "unit": self.quantity.unit,
            "decimals": self.decimals,
            "source": self.source,
        }


def load_baselines(path: str | Path | None = None) -> list[Baseline]:
    """Read a baselines file; ``None`` loads the bundled defaults."""
    if path is None:
        text = resources.files("dltenergy").joinpath("data/baselines.json").read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"baselines file is not valid JSON: {exc}") from None
    if not isinstance(data, list):
        raise ConfigError("baselines file must hold a JSON list")
    return [Baseline.from_dict(b) for b in data]


@dataclass(frozen=True)
class ComparisonEntry:
    baseline: str
    kind: str
    percentage: float
    direction: str
    decimals: int = 2

    @property
    def display(self) -> str:
        return f"{self.percentage:.{self.decimals}f}%"


@dataclass(frozen=True)
class ComparisonReport:
    subject: str
    entries: tuple[ComparisonEntry, ...]
    skipped: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "subject": self.subject,
            "comparisons": [
                {
                    "baseline": e.baseline,
                    "kind": e.kind,
                    "percentage": e.percentage,
                    "direction": e.direction,
                    "display": e.display,
                }
                for e in self.entries
            ],
            "skipped": list(self.skipped),
        }


def _direction(pct: float) -> str:
    if pct < 100.0:
        return "below"
    if pct > 100.0:
        return "above"
    return "equal"


def compare_annual(est: AnnualEstimate, b: Baseline) -> float:
    """Estimated total as a percentage of an annual or per-capita baseline."""
    if b.kind not in ANNUAL_KINDS:
        raise UnitMismatchError(f"baseline {b.name!r} ({b.kind}) is not an annual energy figure")
    if dimension_of(b.quantity.unit) != "energy":
        raise UnitMismatchError(
            f"baseline {b.name!r} is {b.quantity.unit}, an annual comparison needs an energy unit"
        )
    total = scale(est.total_J, "J", b.quantity.unit)
    return total / b.quantity.magnitude * 100.0


def compare_energy_to_led_second(e_J: float) -> float:
    """Energy as a percentage of a 1 W LED running for one second."""
    if e_J < 0:
        raise ConfigError("energy must be non-negative")
    return e_J / LED_SECOND_J * 100.0


def compare_estimate(
    est: AnnualEstimate, baselines: Iterable[Baseline], subject: str = "annual estimate"
) -> ComparisonReport:
    """Compare against every annual-kind baseline; other kinds are listed as skipped."""
    entries, skipped = [], []
    for b in baselines:
        if b.kind not in ANNUAL_KINDS:
            skipped.append(b.name)
            continue
        pct = compare_annual(est, b)
        entries.append(ComparisonEntry(b.name, b.kind, pct, _direction(pct), b.decimals))
    return ComparisonReport(subject, tuple(entries), tuple(skipped))


@dataclass(frozen=True)
class Section:
    key: str
    title: str
    lines: tuple[str, ...] = ()
    data: dict = field(default_factory=dict)

    @property
    def empty(self) -> bool:
        return not self.lines and not self.data


def format_stats(s: ScenarioStats) -> str:
    return (
        f"{s.mean_power_W:.3f} W (min {s.min_trial_W:.3f}, max {s.max_trial_W:.3f}, "
        f"σ {s.stddev_W:.3f}, SE {s.stderr_W:.3f})"
    )


def scenario_section(stats: Sequence[ScenarioStats], node_count: int | None = None) -> Section:
    width = max((len(s.label) for s in stats), default=0)
    lines = []
    for s in stats:
        line = f"{s.label:<{width}}  {format_stats(s)}, {s.trials} trials"
        if node_count and s.label.strip().lower() != "reference":
            per_node = per_node_power(s.mean_power_W, node_count)
            line += f", per node {per_node:.4f} W ({bulb_fraction(per_node):.2f}% of a 60 W bulb)"
        else:
            line += f" ({bulb_fraction(s.mean_power_W):.2f}% of a 60 W bulb)"
        lines.append(line)
    data = {"scenarios": [s.to_dict() for s in stats]}
    if node_count:
        data["node_count"] = node_count
    return Section("scenarios", "Scenario power statistics", tuple(lines), data)


def _uniformity_line(u: UniformityReport) -> str:
    verdict = "pass" if u.passed else "FAIL"
    return f"node uniformity: {verdict} (max spread {u.max_spread:.5f}, tolerance {u.tolerance:g})"


def metrics_section(t: MetricsTables) -> Section:
    lines = []
    if t.uniformity is not None:
        lines.append(_uniformity_line(t.uniformity))
    if t.override_used:
        lines.append("per-node division forced by override")
    lines.append(f"per node above reference [mW] (node_count {t.node_count}):")
    for label, w in t.above_reference_W.items():
        name = label if label == "resting" else f"{label} mps"
        lines.append(f"  {name:<10} {w * 1e3:.2f}")
    lines.append("per node above resting [mW]:")
    for r, w in t.above_resting_W.items():
        lines.append(f"  {format_rate(r) + ' mps':<10} {w * 1e3:.2f}")
    lines.append("energy per message, issuance included [mJ]:")
    for r, e in t.energy_per_message_J.items():
        lines.append(f"  {format_rate(r) + ' mps':<10} {e * 1e3:.2f}")
    return Section("metrics", "Normalized power and energy per message", tuple(lines), t.to_dict())


def estimate_section(est: AnnualEstimate) -> Section:
    def fmt(e_j: float) -> str:
        return f"{e_j:,.3f} Ws = {scale(e_j, 'J', 'kWh'):.2f} kWh = {scale(e_j, 'J', 'TWh'):.9f} TWh"

    period = "one year" if est.days == 365 else f"{est.days} days"
    lines = [
        f"period: {period}",
        f"base     {fmt(est.e_base_J)}",
        f"messages {fmt(est.e_messages_J)}",
        f"total    {fmt(est.total_J)}",
    ]
    if len(est.classes) > 1:
        for c in est.classes:
            lines.append(
                f"  {c.name}: N={c.node_count}, PUE {c.pue:g}, "
                f"{scale(c.total_J, 'J', 'kWh'):.2f} kWh"
            )
    return Section("estimate", "Annual energy estimate", tuple(lines), est.to_dict())


def comparison_section(rep: ComparisonReport) -> Section:
    lines = [f"{e.display} of {e.baseline} ({e.direction})" for e in rep.entries]
    return Section("comparisons", f"Comparisons: {rep.subject}", tuple(lines), rep.to_dict())


def render_report(*sections: Section) -> tuple[str, str]:
    """Render sections as (text, JSON); empty sections are omitted.

    Output is a pure function of the inputs: no timestamps, stable key
    order, full-precision numbers in the JSON.
    """
    kept = [s for s in sections if s is not None and not s.empty]
    if not kept:
        raise ConfigError("a report needs at least one non-empty section")
    blocks = ["\n".join([s.title, "-" * len(s.title), *s.lines]) + "\n" for s in kept]
    text = "\n".join(blocks)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "sections": [{"key": s.key, "title": s.title, "data": s.data} for s in kept],
    }
    js = json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False, allow_nan=False) + "\n"
    return text, js
