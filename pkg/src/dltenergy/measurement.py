"""Power-meter traces, per-trial summaries and per-scenario statistics.

A trace file is a CSV with one sample per row. The canonical layout is::

    t_s,volts,amps
    0,5.1,0.52
    1,5.1,0.52

Foreign layouts are read through a :class:`ColumnMapping` that names the
source columns (by header name or zero-based index) and optional scale
factors, e.g. ``{"volts": "U(mV)", "scale": {"volts": 0.001}}``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field
from typing import IO, Iterable, Sequence

from .errors import ConfigError, InvariantViolation, TraceParseError

CANONICAL_HEADER = ("t_s", "volts", "amps")
DURATION_TOLERANCE = 0.05
DEFAULT_UNIFORMITY_TOL = 0.01


@dataclass(frozen=True)
class PowerSample:
    t: float
    volts: float
    amps: float

    def __post_init__(self):
        if not self.t >= 0:
            raise InvariantViolation(f"sample time must be >= 0, got {self.t!r}")
        if not self.volts > 0:
            raise InvariantViolation(f"voltage must be > 0, got {self.volts!r}")
        if not self.amps >= 0:
            raise InvariantViolation(f"current must be >= 0, got {self.amps!r}")

    @property
    def power_w(self) -> float:
        return instantaneous_power(self)


@dataclass(frozen=True)
class TrialTrace:
    scenario_label: str
    samples: tuple[PowerSample, ...]
    declared_duration_s: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        if len(self.samples) < 2:
            raise InvariantViolation(
                f"trial {self.scenario_label!r} needs at least 2 samples, got {len(self.samples)}"
            )
        for prev, cur in zip(self.samples, self.samples[1:]):
            if not cur.t > prev.t:
                raise InvariantViolation(
                    f"trial {self.scenario_label!r}: time not strictly increasing at t={cur.t!r}"
                )
        if self.declared_duration_s is not None:
            if not self.declared_duration_s > 0:
                raise InvariantViolation("declared duration must be positive")
            span = self.duration_s
            if abs(span - self.declared_duration_s) > DURATION_TOLERANCE * self.declared_duration_s:
                raise InvariantViolation(
                    f"trial {self.scenario_label!r} spans {span:g} s, declared "
                    f"{self.declared_duration_s:g} s (more than 5% apart)"
                )

    @property
    def duration_s(self) -> float:
        return self.samples[-1].t - self.samples[0].t


@dataclass(frozen=True)
class TrialSummary:
    mean_power_W: float
    duration_s: float
    sample_count: int

    def __post_init__(self):
        if not self.mean_power_W > 0:
            raise InvariantViolation(f"trial mean power must be > 0, got {self.mean_power_W!r}")
        if not self.duration_s > 0:
            raise InvariantViolation(f"trial duration must be > 0, got {self.duration_s!r}")


@dataclass(frozen=True)
class ScenarioStats:
    """Statistics over the per-trial mean powers of one scenario.

    ``stderr_W`` is always derived from ``stddev_W`` and ``trials``.
    """

    label: str
    trials: int
    mean_power_W: float
    min_trial_W: float
    max_trial_W: float
    stddev_W: float
    stderr_W: float = field(init=False)

    def __post_init__(self):
        if self.trials < 1:
            raise InvariantViolation(f"{self.label}: trials must be >= 1")
        if not self.stddev_W >= 0:
            raise InvariantViolation(f"{self.label}: stddev must be >= 0")
        if not self.min_trial_W <= self.mean_power_W <= self.max_trial_W:
            raise InvariantViolation(
                f"{self.label}: mean {self.mean_power_W!r} W outside "
                f"[{self.min_trial_W!r}, {self.max_trial_W!r}]"
            )
        object.__setattr__(self, "stderr_W", standard_error(self.stddev_W, self.trials))

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "trials": self.trials,
            "mean_power_w": self.mean_power_W,
            "min_trial_w": self.min_trial_W,
            "max_trial_w": self.max_trial_W,
            "stddev_w": self.stddev_W,
            "stderr_w": self.stderr_W,
        }

    @classmethod
    def from_dict(cls, data: dict, label: str | None = None) -> "ScenarioStats":
        """Build from a JSON object.

        Only ``mean_power_w`` is required; a bare mean is read as a single
        zero-spread trial. Keys are case-insensitive. A supplied ``stderr_w``
        is ignored in favour of the derived value.
        """
        if not isinstance(data, dict):
            raise ConfigError(f"scenario {label!r}: expected an object, got {type(data).__name__}")
        d = {str(k).lower(): v for k, v in data.items()}
        try:
            mean = float(d["mean_power_w"])
            return cls(
                label=str(d.get("label", label or "")),
                trials=int(d.get("trials", 1)),
                mean_power_W=mean,
                min_trial_W=float(d.get("min_trial_w", mean)),
                max_trial_W=float(d.get("max_trial_w", mean)),
                stddev_W=float(d.get("stddev_w", 0.0)),
            )
        except KeyError as exc:
            raise ConfigError(f"scenario {label!r}: missing field {exc.args[0]}") from None
        except (TypeError, ValueError) as exc:
            if isinstance(exc, InvariantViolation):
                raise
            raise ConfigError(f"scenario {label!r}: {exc}") from None


@dataclass(frozen=True)
class NodeAnalytics:
    node_id: str
    messages_in_db: int
    scheduled_messages: int
    tip_pool: int = 0
    avg_mps: float = 0.0
    avg_cpu_pct: float = 0.0
    avg_mem_MB: float = 0.0

    def __post_init__(self):
        for name in ("messages_in_db", "scheduled_messages", "tip_pool"):
            if getattr(self, name) < 0:
                raise ConfigError(f"node {self.node_id}: {name} must be >= 0")

    @classmethod
    def from_dict(cls, data: dict) -> "NodeAnalytics":
        d = {str(k).lower(): v for k, v in data.items()}
        try:
            return cls(
                node_id=str(d["node_id"]),
                messages_in_db=int(d["messages_in_db"]),
                scheduled_messages=int(d["scheduled_messages"]),
                tip_pool=int(d.get("tip_pool", 0)),
                avg_mps=float(d.get("avg_mps", 0.0)),
                avg_cpu_pct=float(d.get("avg_cpu_pct", 0.0)),
                avg_mem_MB=float(d.get("avg_mem_mb", 0.0)),
            )
        except KeyError as exc:
            raise ConfigError(f"node analytics: missing field {exc.args[0]}") from None
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"node analytics: {exc}") from None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["avg_mem_mb"] = d.pop("avg_mem_MB")
        return d


@dataclass(frozen=True)
class UniformityReport:
    passed: bool
    tolerance: float
    spreads: dict[str, float]
    node_count: int

    @property
    def max_spread(self) -> float:
        return max(self.spreads.values())

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "tolerance": self.tolerance,
            "node_count": self.node_count,
            "max_spread": self.max_spread,
            "spreads": dict(sorted(self.spreads.items())),
        }


@dataclass(frozen=True)
class ColumnMapping:
    """Where the time, voltage and current values live in a trace file."""

    time: str | int = "t_s"
    volts: str | int = "volts"
    amps: str | int = "amps"
    time_scale: float = 1.0
    volts_scale: float = 1.0
    amps_scale: float = 1.0

    @classmethod
    def from_dict(cls, data: dict) -> "ColumnMapping":
        if not isinstance(data, dict):
            raise ConfigError("column mapping must be a JSON object")
        unknown = set(data) - {"time", "volts", "amps", "scale"}
        if unknown:
            raise ConfigError(f"column mapping: unknown keys {sorted(unknown)}")
        scales = data.get("scale", {}) or {}
        bad = set(scales) - {"time", "volts", "amps"}
        if bad:
            raise ConfigError(f"column mapping: unknown scale keys {sorted(bad)}")
        kwargs = {k: data[k] for k in ("time", "volts", "amps") if k in data}
        for k, v in kwargs.items():
            if not isinstance(v, (str, int)) or isinstance(v, bool):
                raise ConfigError(f"column mapping: {k} must be a column name or index")
        for k, v in scales.items():
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not v > 0:
                raise ConfigError(f"column mapping: scale for {k} must be a positive number")
            kwargs[f"{k}_scale"] = float(v)
        return cls(**kwargs)

    @property
    def is_canonical(self) -> bool:
        return self == ColumnMapping()


def instantaneous_power(s: PowerSample) -> float:
    return s.volts * s.amps


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def _resolve(col: str | int, header: list[str] | None, what: str) -> int:
    if isinstance(col, int):
        return col
    if header is None:
        # headerless canonical file: fall back to the canonical positions
        if col in CANONICAL_HEADER:
            return CANONICAL_HEADER.index(col)
        raise TraceParseError(f"trace has no header; cannot locate {what} column {col!r}", 1)
    stripped = [h.strip() for h in header]
    if col not in stripped:
        raise TraceParseError(f"header lacks {what} column {col!r}", 1)
    return stripped.index(col)


def parse_trace(
    stream: IO[str] | str,
    mapping: ColumnMapping | None = None,
    label: str = "",
    declared_duration_s: float | None = None,
) -> TrialTrace:
    """Read one trial from CSV text.

    The header row is optional: if every field of the first row is numeric
    the file is treated as headerless. Errors carry the 1-based physical
    line number of the offending row.
    """
    mapping = mapping or ColumnMapping()
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    # newline="" semantics: the csv module copes with LF and CRLF itself
    reader = csv.reader(stream)
    header: list[str] | None = None
    idx: tuple[int, int, int] | None = None
    samples: list[PowerSample] = []
    prev_t: float | None = None
    for row in reader:
        line = reader.line_num
        if not row or all(not f.strip() for f in row):
            continue
        if idx is None:
            if row[0].startswith("\ufeff"):
                row[0] = row[0][1:]
            if not all(_is_number(f) for f in row):
                header = row
                idx = (
                    _resolve(mapping.time, header, "time"),
                    _resolve(mapping.volts, header, "voltage"),
                    _resolve(mapping.amps, header, "current"),
                )
                continue
            idx = (
                _resolve(mapping.time, None, "time"),
                _resolve(mapping.volts, None, "voltage"),
                _resolve(mapping.amps, None, "current"),
            )
        try:
            t, v, a = (float(row[i]) for i in idx)
        except IndexError:
            raise TraceParseError(f"row has {len(row)} fields, expected at least {max(idx) + 1}", line) from None
        except ValueError:
            raise TraceParseError(f"non-numeric field in row {','.join(row)!r}", line) from None
        t *= mapping.time_scale
        v *= mapping.volts_scale
        a *= mapping.amps_scale
        if not all(math.isfinite(x) for x in (t, v, a)):
            raise TraceParseError("non-finite value", line)
        if t < 0:
            raise TraceParseError(f"negative time {t!r}", line)
        if prev_t is not None and not t > prev_t:
            raise TraceParseError(f"time {t!r} does not increase (previous {prev_t!r})", line)
        if not v > 0:
            raise TraceParseError(f"non-positive voltage {v!r}", line)
        if a < 0:
            raise TraceParseError(f"negative current {a!r}", line)
        samples.append(PowerSample(t, v, a))
        prev_t = t
    if not samples:
        raise TraceParseError("empty trace", reader.line_num or 1)
    if len(samples) < 2:
        raise TraceParseError("trace needs at least 2 samples", reader.line_num)
    return TrialTrace(label, samples, declared_duration_s)


def serialize_trace(trace: TrialTrace) -> str:
    """Render a trace in the canonical format (repr floats, LF endings)."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CANONICAL_HEADER)
    for s in trace.samples:
        writer.writerow((repr(s.t), repr(s.volts), repr(s.amps)))
    return out.getvalue()


def _sorted_mean(values: Sequence[float]) -> float:
    mean = math.fsum(sorted(values)) / len(values)
    # one rounding step can push the mean a hair past an extreme
    return min(max(mean, min(values)), max(values))


def trial_summary(t: TrialTrace) -> TrialSummary:
    if len(t.samples) < 2:
        raise InvariantViolation("trial summary needs at least 2 samples")
    powers = [instantaneous_power(s) for s in t.samples]
    return TrialSummary(_sorted_mean(powers), t.duration_s, len(powers))


def standard_error(stddev: float, n: int) -> float:
    return stddev / math.sqrt(n)


def sample_stddev(values: Sequence[float]) -> float:
    """n-1 estimator; zero for a single value."""
    n = len(values)
    if n < 2:
        return 0.0
    ordered = sorted(values)
    mean = _sorted_mean(ordered)
    return math.sqrt(math.fsum((x - mean) ** 2 for x in ordered) / (n - 1))


def aggregate_scenario(label: str, trials: Iterable[TrialSummary]) -> ScenarioStats:
    means = sorted(tr.mean_power_W for tr in trials)
    if not means:
        raise InvariantViolation(f"scenario {label!r} has no trials")
    return ScenarioStats(
        label=label,
        trials=len(means),
        mean_power_W=_sorted_mean(means),
        min_trial_W=means[0],
        max_trial_W=means[-1],
        stddev_W=sample_stddev(means),
    )


def _relative_spread(values: Sequence[float]) -> float:
    mean = math.fsum(values) / len(values)
    if mean == 0:
        return 0.0 if max(values) == min(values) else math.inf
    return (max(values) - min(values)) / mean


def check_node_uniformity(
    nodes: Sequence[NodeAnalytics], tol: float = DEFAULT_UNIFORMITY_TOL
) -> UniformityReport:
    """Check that every node saw essentially the same message set.

    Passes when the relative spread (max - min) / mean of both the stored
    and the scheduled message counts is within ``tol``.
    """
    if len(nodes) < 2:
        raise ConfigError("uniformity check needs at least 2 nodes")
    if not 0 < tol < 1:
        raise ConfigError(f"uniformity tolerance must lie in (0, 1), got {tol!r}")
    spreads = {
        "messages_in_db": _relative_spread([n.messages_in_db for n in nodes]),
        "scheduled_messages": _relative_spread([n.scheduled_messages for n in nodes]),
    }
    passed = all(s <= tol for s in spreads.values())
    return UniformityReport(passed, tol, spreads, len(nodes))
