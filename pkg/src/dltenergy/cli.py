"""Command-line pipeline: traces -> scenario stats -> metrics -> projection -> report.

Exit codes: 0 success, 2 input or usage error, 3 data-invariant violation.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .errors import ConfigError, InputError, InvariantViolation, TraceParseError
from .measurement import (
    ColumnMapping,
    ScenarioStats,
    aggregate_scenario,
    parse_trace,
    trial_summary,
)
from .metrics import REFERENCE, RESTING, ScenarioSet, _parse_rate, compute_tables
from .report import (
    Section,
    comparison_section,
    compare_estimate,
    estimate_section,
    load_baselines,
    metrics_section,
    render_report,
    scenario_section,
)
from .taec import AnnualEstimate, Fleet, RateProfile, annual_total

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INVARIANT = 3

log = logging.getLogger("dltenergy")


def _read_json(path: str | Path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from None


def _section_data(doc, key: str):
    """Unwrap the ``key`` section of a rendered report, else return ``doc``."""
    if isinstance(doc, dict) and "sections" in doc and "schema_version" in doc:
        for s in doc["sections"]:
            if isinstance(s, dict) and s.get("key") == key:
                return s.get("data")
        raise ConfigError(f"report document has no {key!r} section")
    return doc


# analyze ------------------------------------------------------------------


def _load_trial(path: Path, label: str, mapping: ColumnMapping, declared: float | None):
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            return trial_summary(parse_trace(fh, mapping, label, declared))
    except TraceParseError as exc:
        raise exc.with_source(str(path)) from None
    except InvariantViolation as exc:
        raise exc.__class__(f"{path}: {exc}") from None
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from None
    except UnicodeDecodeError:
        raise TraceParseError("not UTF-8 text", None, str(path)) from None


def _scenario_entries(manifest: dict):
    scenarios = manifest.get("scenarios")
    if not isinstance(scenarios, dict) or not scenarios:
        raise ConfigError("manifest must map at least one scenario label to trial files")
    for label, entry in scenarios.items():
        declared = None
        if isinstance(entry, dict):
            declared = entry.get("declared_duration_s")
            entry = entry.get("trials")
        if not isinstance(entry, list) or not entry or not all(isinstance(p, str) for p in entry):
            raise ConfigError(f"scenario {label!r}: expected a non-empty list of trial files")
        yield str(label), entry, declared


def analyze(manifest_path: str, trace_dir: str | None = None) -> tuple[list[ScenarioStats], dict]:
    manifest = _read_json(manifest_path)
    if not isinstance(manifest, dict):
        raise ConfigError("manifest must be a JSON object")
    base = Path(trace_dir) if trace_dir else Path(manifest_path).parent
    mapping = ColumnMapping.from_dict(manifest.get("column_mapping") or {})
    jobs = []
    for label, files, declared in _scenario_entries(manifest):
        for f in files:
            jobs.append((label, base / f, declared))
    with ThreadPoolExecutor(max_workers=min(8, len(jobs))) as pool:
        summaries = list(pool.map(lambda j: _load_trial(j[1], j[0], mapping, j[2]), jobs))
    by_label: dict[str, list] = {}
    for (label, _, _), summary in zip(jobs, summaries):
        by_label.setdefault(label, []).append(summary)
    stats = [aggregate_scenario(label, trials) for label, trials in by_label.items()]

    data = {"scenarios": [s.to_dict() for s in stats]}
    node_count = manifest.get("node_count")
    if node_count is not None:
        data["node_count"] = node_count
    scenario_set = _as_scenario_set(stats, manifest)
    if scenario_set is not None:
        data["scenario_set"] = scenario_set.to_dict()
    return stats, data


def _as_scenario_set(stats: list[ScenarioStats], manifest: dict) -> ScenarioSet | None:
    by_label = {s.label.strip().lower(): s for s in stats}
    if REFERENCE not in by_label or RESTING not in by_label or "node_count" not in manifest:
        return None
    loaded = {}
    for label, s in by_label.items():
        if label in (REFERENCE, RESTING):
            continue
        try:
            loaded[_parse_rate(label)] = s
        except ConfigError:
            log.warning("scenario %r is not a rate; left out of the scenario set", s.label)
    doc = {
        "node_count": manifest["node_count"],
        "reference": by_label[REFERENCE].to_dict(),
        "resting": by_label[RESTING].to_dict(),
        "loaded": {f"{r:g}": s.to_dict() for r, s in loaded.items()},
    }
    for key in ("node_analytics", "uniformity_tol"):
        if key in manifest:
            doc[key] = manifest[key]
    return ScenarioSet.from_dict(doc, allow_nonuniform=True)


def cmd_analyze(args) -> list[Section]:
    stats, data = analyze(args.manifest, args.trace_dir)
    section = scenario_section(stats, data.get("node_count"))
    return [Section(section.key, section.title, section.lines, data)]


# metrics ------------------------------------------------------------------


def load_scenario_set(path: str, allow_nonuniform: bool) -> ScenarioSet:
    doc = _section_data(_read_json(path), "scenarios")
    if isinstance(doc, dict) and "scenario_set" in doc:
        doc = doc["scenario_set"]
    return ScenarioSet.from_dict(doc, allow_nonuniform=allow_nonuniform)


def cmd_metrics(args) -> list[Section]:
    s = load_scenario_set(args.scenario_set, args.allow_nonuniform)
    return [metrics_section(compute_tables(s))]


# project / compare ----------------------------------------------------------


def load_fleet(path: str) -> Fleet:
    return Fleet.from_dict(_read_json(path))


def load_profile(path: str) -> RateProfile:
    return RateProfile.from_json(_read_json(path))


def load_estimate(path: str) -> AnnualEstimate:
    return AnnualEstimate.from_dict(_section_data(_read_json(path), "estimate"))


def cmd_project(args) -> list[Section]:
    est = annual_total(load_fleet(args.fleet), load_profile(args.profile))
    return [estimate_section(est)]


def cmd_compare(args) -> list[Section]:
    est = load_estimate(args.estimate)
    baselines = load_baselines(args.baselines) if args.baselines else load_baselines()
    return [comparison_section(compare_estimate(est, baselines))]


def cmd_report(args) -> list[Section]:
    sections: list[Section] = []
    if args.manifest:
        sections.extend(cmd_analyze(args))
    if args.scenario_set:
        sections.extend(cmd_metrics(args))
    est = None
    if args.fleet or args.profile:
        if not (args.fleet and args.profile):
            raise InputError("--fleet and --profile must be given together")
        est = annual_total(load_fleet(args.fleet), load_profile(args.profile))
    elif args.estimate:
        est = load_estimate(args.estimate)
    if est is not None:
        sections.append(estimate_section(est))
        baselines = load_baselines(args.baselines) if args.baselines else load_baselines()
        sections.append(comparison_section(compare_estimate(est, baselines)))
    if not sections:
        raise InputError("report needs at least one input (--manifest, --scenario-set, --fleet/--profile, --estimate)")
    return sections


# wiring ---------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--format", choices=("text", "json"), default=d("text"), help="output format")
    p.add_argument("--output", metavar="PATH", default=d(None), help="write output here instead of stdout")
    p.add_argument("--baselines", metavar="PATH", default=d(None), help="baselines JSON (default: bundled)")
    p.add_argument(
        "--allow-nonuniform",
        action="store_true",
        default=d(False),
        help="divide by node count even without a passing uniformity check",
    )
    p.add_argument("-v", "--verbose", action="store_true", default=d(False))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dltenergy",
        description="Energy profiling of DLT nodes: trace statistics, per-message energy, annual projections.",
    )
    _add_common(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help):
        p = sub.add_parser(name, help=help)
        _add_common(p, suppress=True)
        p.set_defaults(func=func)
        return p

    p = add("analyze", cmd_analyze, "aggregate trace files into per-scenario statistics")
    p.add_argument("manifest", help="scenario manifest JSON")
    p.add_argument("--trace-dir", help="directory trial paths are relative to (default: manifest's)")

    p = add("metrics", cmd_metrics, "normalized power tables and per-message energy curve")
    p.add_argument("scenario_set", help="scenario-set JSON (or analyze JSON output)")

    p = add("project", cmd_project, "annual energy estimate for a fleet and rate profile")
    p.add_argument("fleet", help="fleet configuration JSON")
    p.add_argument("profile", help="rate profile JSON")

    p = add("compare", cmd_compare, "compare an annual estimate against baselines")
    p.add_argument("estimate", help="estimate JSON (project output)")

    p = add("report", cmd_report, "combined report from any of the pipeline inputs")
    p.add_argument("--manifest")
    p.add_argument("--trace-dir")
    p.add_argument("--scenario-set")
    p.add_argument("--fleet")
    p.add_argument("--profile")
    p.add_argument("--estimate")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
    )
    try:
        sections = args.func(args)
        text, js = render_report(*sections)
        out = js if args.format == "json" else text
        if args.output:
            Path(args.output).write_text(out, encoding="utf-8")
        else:
            sys.stdout.write(out)
    except InvariantViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
