"""Monte Carlo orchestration: sanity experiments, bound reports, check suites."""

import numpy as np
import pytest

from ftscov import experiment_from_config, run_bound_verification, run_suite
from ftscov.experiments import bound_reports, suite_names


def _config(model=None, experiment=None):
    data = {
        "schema_version": 1,
        "model": {"kind": "iid", "grid_points": 8},
        "experiment": {
            "lags": [0],
            "powers_m": [1],
            "powers_n": [1],
            "sample_sizes": [400],
            "replications": 200,
            "seed": 17,
            "bound": {"target": "xi", "horizon": 8, "moment_replications": 500},
        },
    }
    if model:
        data["model"].update(model)
    if experiment:
        data["experiment"].update(experiment)
    return data


def test_iid_sanity_cell_passes():
    # zero-operator sanity: normalized MSE below the xi_auto bound at R = 200, N = 400
    summary = run_bound_verification(experiment_from_config(_config()))
    assert len(summary.rows) == 1
    row = summary.rows[0]
    assert row.passed
    assert row.formula == "xi_auto"
    assert row.moment_source == "estimated"
    assert "geometric" in row.tail_rule


def test_moment_caps_recorded_in_rows():
    cfg = _config(
        experiment={
            "replications": 5,
            "sample_sizes": [20],
            "bound": {
                "target": "xi",
                "horizon": 4,
                "moment_replications": 50,
                "moment_caps": {"nu4_x": 2.0, "coupling_sum_x": 4.0},
            },
        }
    )
    summary = run_bound_verification(experiment_from_config(cfg))
    assert summary.rows[0].moment_source == "capped"
    # nu4^4 + 4 sqrt(2) nu4^3 * cap with kappa' = 1
    expected = 2.0**4 + 4 * np.sqrt(2) * 2.0**3 * 4.0
    assert summary.rows[0].bound == pytest.approx(expected, rel=1e-12)


def test_bound_reports_cover_grid():
    cfg = _config(
        model={"kind": "far", "contraction": 0.5, "cross": {"norm": 0.7}},
        experiment={
            "lags": [0, 1],
            "powers_m": [1, 2],
            "powers_n": [1, 2],
            "sample_sizes": [50],
            "replications": 5,
            "bound": {"target": "auto", "horizon": 6, "moment_replications": 100},
        },
    )
    reports = bound_reports(experiment_from_config(cfg))
    assert len(reports) == 8
    assert all(r.formula == "xi_cross" for r in reports)
    assert all(r.value >= r.leading_term >= 0 for r in reports)


def test_all_suites_pass():
    assert set(suite_names()) == {"invariants", "eigen", "yulewalker", "bounds-closed-form"}
    for name in suite_names():
        result = run_suite(name, seed=3)
        assert result.exit_status == 0, f"{name}: {[c for c in result.checks if not c.passed]}"


def test_csv_summary_shape():
    summary = run_bound_verification(
        experiment_from_config(_config(experiment={"replications": 3, "sample_sizes": [20]}))
    )
    text = summary.to_csv_string()
    lines = text.strip().split("\n")
    assert lines[0].count(",") == 12
    assert all(line.count(",") == 12 for line in lines[1:])
    obj = summary.to_json_obj()
    assert obj["all_passed"] == summary.all_passed
    import json

    json.dumps(obj)  # JSON-serializable end to end
