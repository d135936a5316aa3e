"""Energy profiling toolkit for DLT node hardware.

Turns power-meter traces into scenario statistics, derives per-node power
and energy-per-message figures, and projects annual fleet consumption.
"""

from .errors import (
    ConfigError,
    DltEnergyError,
    InputError,
    InvariantViolation,
    NegativeNormalizationError,
    NonUniformError,
    TraceParseError,
    UnitMismatchError,
)
from .measurement import (
    ColumnMapping,
    NodeAnalytics,
    PowerSample,
    ScenarioStats,
    TrialSummary,
    TrialTrace,
    UniformityReport,
    aggregate_scenario,
    check_node_uniformity,
    instantaneous_power,
    parse_trace,
    serialize_trace,
    trial_summary,
)
from .metrics import (
    PerMessageCurve,
    ScenarioSet,
    bulb_fraction,
    compute_tables,
    energy_per_message,
    interpolate_energy,
    message_total_energy,
    normalize_reference,
    normalize_resting,
    per_node_power,
    percent_difference,
)
from .report import (
    Baseline,
    ComparisonReport,
    compare_annual,
    compare_energy_to_led_second,
    compare_estimate,
    load_baselines,
    render_report,
)
from .taec import (
    AnnualEstimate,
    Fleet,
    HardwareClass,
    RateProfile,
    annual_total,
    e_base,
    e_messages_class,
    e_messages_total,
    p_base_from_measurement,
)
from .units import EnergyQuantity, PowerQuantity, convert

__version__ = "0.1.0"
