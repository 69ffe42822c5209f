"""Smoke tests for the Python bindings.

These exercise every exported operation once against the shipped example
models and a few inline toys; the C++ test suite carries the deep coverage.
"""

import math
import os

import pytest

import ssmcheck


def example(name: str) -> str:
    base = os.environ.get(
        "SSMCHECK_EXAMPLES_DIR",
        os.path.join(os.path.dirname(__file__), "..", "..", "examples"),
    )
    return os.path.join(base, name)

CHAIN = example("chain3.ssm")
BACKUP = example("backup_system.ssm")

KNOWN_CRITICAL_SETS = sorted(
    [
        ["A1FailsSig", "A2FailsActivate"],
        ["A1FailsSig", "A2FailsSig"],
        ["A1FailsSig", "MonitorFails"],
        ["A1FailsSig", "S2FailsSig"],
        ["A2FailsActivate", "MonitorFails"],
        ["A2FailsSig", "MonitorFails"],
        ["MonitorFails", "S2FailsSig"],
        ["S1FailsSig", "S2FailsSig"],
    ]
)


def test_load_and_inspect_model():
    model = ssmcheck.load_model(CHAIN)
    assert model.automata == ["C"]
    assert model.dt_seconds == 1.0
    assert model.failure_modes == []
    assert "s2" in model.hazard
    assert "chain3" in repr(model)


def test_parse_and_validate():
    good = ssmcheck.parse_model(
        "const dt = 1s;\n"
        "automaton A { states a, b; init a; a -> b [true]; b -> b [true]; }\n"
        "hazard H = A.state == b;\n"
    )
    report = ssmcheck.validate(good)
    assert report["ok"] is True
    assert report["errors"] == []

    bad = ssmcheck.parse_model(
        "const dt = 1s;\n"
        "automaton A { states a; init a; a -> {0.5: a} [true]; }\n"
    )
    report = ssmcheck.validate(bad)
    assert report["ok"] is False
    assert any("sum" in e for e in report["errors"])

    with pytest.raises(ValueError):
        ssmcheck.parse_model("automaton {")


def test_hazard_probability_matches_closed_form():
    model = ssmcheck.load_model(CHAIN)
    # P(k) = 1 - (1/2)^(k-1) for k >= 1 on this chain.
    assert ssmcheck.hazard_probability(model, k=0) == 0.0
    assert abs(ssmcheck.hazard_probability(model, k=3) - 0.75) < 1e-15
    assert abs(ssmcheck.hazard_probability(model, k=10) - (1.0 - 0.5**9)) < 1e-15


def test_hazard_curve_records_stride_points():
    model = ssmcheck.load_model(CHAIN)
    curve = ssmcheck.hazard_curve(model, k=5, stride=2)
    assert [pt["k"] for pt in curve] == [0, 2, 4, 5]
    assert curve[0]["probability"] == 0.0
    assert abs(curve[-1]["probability"] - 0.9375) < 1e-15
    assert curve[-1]["t_seconds"] == 5.0


def test_dcca_finds_the_known_critical_sets():
    model = ssmcheck.load_model(BACKUP)
    result = ssmcheck.dcca(model)
    assert result["empty_set_critical"] is False
    assert sorted(sorted(s) for s in result["minimal_critical_sets"]) == KNOWN_CRITICAL_SETS
    assert result["stats"]["sets_found"] == 8
    assert len(result["witnesses"]) == 8
    first_trace = result["witnesses"][0]["trace"]
    assert len(first_trace) >= 2
    # Every step maps each automaton to a local state name.
    assert set(first_trace[0]) == set(first_trace[-1])
    assert "O" in first_trace[0]


def test_fta_bound_on_the_case_study():
    model = ssmcheck.load_model(BACKUP)
    result = ssmcheck.fta_bound(model, k=6000)
    assert len(result["terms"]) == 8
    total = sum(t["probability"] for t in result["terms"])
    assert math.isclose(result["bound"], total, rel_tol=1e-12)
    assert math.isclose(result["bound"], 1.9996945239054175e-07, rel_tol=1e-9)
    assert len(result["warnings"]) == 1
    assert "A2FailsActivate" in result["warnings"][0]

    # An explicit per-demand bound silences the warning.
    bounded = ssmcheck.fta_bound(model, k=6000, demand_bounds={"A2FailsActivate": 0.001})
    assert bounded["warnings"] == []
    assert bounded["bound"] > result["bound"]


def test_numeric_helpers():
    assert math.isclose(
        ssmcheck.rate_to_step_probability(1e-2, 0.010), 1.0 / 3.6e7, rel_tol=1e-12
    )
    assert math.isclose(ssmcheck.geometric_cdf(0.5, 2), 0.75, rel_tol=1e-15)

    point = ssmcheck.approximation_error(1e-2, 1.0, 100.0)
    assert point["steps"] == 360000
    assert math.isclose(point["abs_err"], 5.109442596795688e-07, rel_tol=1e-9)
    assert isinstance(point["rel_err"], float)
    assert ssmcheck.approximation_error(1e-2, 1.0, 0.0)["rel_err"] is None


def test_monte_carlo_is_reproducible():
    model = ssmcheck.load_model(CHAIN)
    a = ssmcheck.monte_carlo(model, k=5, samples=20000, seed=7)
    b = ssmcheck.monte_carlo(model, k=5, samples=20000, seed=7)
    assert a == b
    assert a["samples"] == 20000
    assert a["estimate"] == a["hits"] / 20000
    # 0.9375 with n = 20000: five sigma is ~0.0086.
    assert abs(a["estimate"] - 0.9375) < 0.0086
    assert a["half_width_95"] > 0.0


def test_pinning_and_conservative_extension():
    template = (
        "const dt = 1s;\n"
        "automaton W { states ok, bad; init ok;\n"
        "  ok -> bad [F.state == yes]; ok -> ok [!(F.state == yes)]; bad -> bad [true]; }\n"
        "pred healthy = W.state == ok;\n"
        "failure F per_time(%s/h);\n"
        "hazard H = W.state == bad;\n"
    )
    declared = ssmcheck.parse_model(template % "0.0", "toy")
    pinned_off = ssmcheck.pin_failures(declared, {"F": False})
    assert pinned_off.failure_modes == []
    assert "failure" not in ssmcheck.print_model(pinned_off)

    # A mode that can never fire is observably no extension at all.
    res = ssmcheck.check_conservative(pinned_off, declared, ["healthy"])
    assert res["equivalent"] is True

    # With a positive rate the extension is visible.
    live = ssmcheck.parse_model(template % "360.0", "toy")
    res = ssmcheck.check_conservative(pinned_off, live, ["healthy"])
    assert res["equivalent"] is False
    assert res["note"] != ""


def test_state_cap_raises_capacity_error():
    model = ssmcheck.load_model(BACKUP)
    with pytest.raises(ssmcheck.CapacityError):
        ssmcheck.hazard_probability(model, k=1, state_cap=10)
