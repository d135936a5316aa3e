import json

import pytest

# Published scenario statistics of the three-node Raspberry Pi 4B campaign:
# (trials, total mean W, min W, max W, stddev W)
MEASURED_SCENARIOS = {
    "reference": (50, 2.648, 2.494, 2.914, 0.107),
    "resting": (50, 2.745, 2.587, 3.140, 0.146),
    "50": (50, 3.761, 3.279, 4.312, 0.250),
    "100": (50, 4.080, 3.796, 4.549, 0.178),
    "200": (25, 4.268, 4.101, 4.445, 0.070),
}

MEASURED_ANALYTICS = [
    {"node_id": "9311", "messages_in_db": 4203, "scheduled_messages": 4540, "tip_pool": 1,
     "avg_mps": 1.5, "avg_cpu_pct": 5.35, "avg_mem_mb": 47.08},
    {"node_id": "9312", "messages_in_db": 4207, "scheduled_messages": 4544, "tip_pool": 1,
     "avg_mps": 1.5, "avg_cpu_pct": 7.07, "avg_mem_mb": 39.69},
    {"node_id": "9313", "messages_in_db": 4204, "scheduled_messages": 4541, "tip_pool": 1,
     "avg_mps": 1.5, "avg_cpu_pct": 5.01, "avg_mem_mb": 40.37},
]

EXAMPLE_FLEET = {
    "classes": [
        {
            "name": "rpi4b",
            "pue": 1.59,
            "p_base_w": 2.680131,
            "node_count": 450,
            "curve": [{"rate_mps": 50, "energy_j": 0.00678}],
        }
    ]
}


def _stats(label, row):
    trials, mean, lo, hi, sd = row
    return {"label": label, "trials": trials, "mean_power_w": mean,
            "min_trial_w": lo, "max_trial_w": hi, "stddev_w": sd}


@pytest.fixture
def measured_scenario_doc():
    return {
        "node_count": 3,
        "reference": _stats("reference", MEASURED_SCENARIOS["reference"]),
        "resting": _stats("resting", MEASURED_SCENARIOS["resting"]),
        "loaded": {r: _stats(f"{r}mps", MEASURED_SCENARIOS[r]) for r in ("50", "100", "200")},
        "node_analytics": MEASURED_ANALYTICS,
    }


@pytest.fixture
def measured_scenario_set(measured_scenario_doc):
    from dltenergy.metrics import ScenarioSet

    return ScenarioSet.from_dict(measured_scenario_doc)


@pytest.fixture
def write_json(tmp_path):
    def write(name, obj):
        path = tmp_path / name
        path.write_text(json.dumps(obj), encoding="utf-8")
        return path

    return write


# acceptance summary: one line per criterion ---------------------------------

_results = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    key = (marker.args[0], marker.args[1])
    if rep.when == "call" or rep.failed:
        prev = _results.get(key, True)
        _results[key] = prev and rep.passed


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for (num, title), ok in sorted(_results.items()):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] AC{num}: {title}")
