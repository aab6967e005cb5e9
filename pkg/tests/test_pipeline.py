import json

import numpy as np
import pytest

from structpath import (
    DataTable,
    PipelineError,
    default_scenario,
    emit_outputs,
    generate,
    run_pipeline,
)
from structpath.pipeline import heatmap_csv, report_json


@pytest.fixture(scope="module")
def full_report():
    return run_pipeline(spec=default_scenario(), boot_b=5000)


def test_headline_statistics_in_band(full_report):
    head = full_report.strategy_evaluation["headline"]
    assert 0.46 <= head["Y2_r2"] <= 0.62
    assert 0.34 <= head["Y3_r2"] <= 0.50
    assert 0.63 <= head["Y1_auc"] <= 0.79
    ci = head["indirect_ci"]
    assert ci[0] > 0 or ci[1] < 0          # excludes zero
    assert ci[0] <= 0.47 and ci[1] >= 0.12  # intersects the reference interval
    assert head["moderation_interaction_p"] < 0.05


def test_quality_gate_passes(full_report):
    assert full_report.quality["passed"]


def test_report_p_values_in_unit_interval(full_report):
    doc = full_report.to_dict()
    for entry in doc["models"].values():
        for p in entry["fit"]["p"]:
            assert 0.0 <= p <= 1.0
    for key in ("p_a", "p_b", "p_c", "p_c_prime"):
        assert 0.0 <= doc["mediation"]["paths"][key] <= 1.0


def test_heatmap_layout_and_blanks(full_report):
    hm = full_report.heatmap
    assert hm["columns"] == ["Y1", "Y2", "Y3"]
    assert hm["rows"] == ["X2", "X3", "X5", "X6", "M1", "M2", "MOD1"]
    cells = hm["cells"]
    # nonblank exactly for terms of each outcome's model
    assert cells["X2"]["Y1"] is None and cells["X2"]["Y2"] is not None
    assert cells["MOD1"]["Y2"] is None and cells["MOD1"]["Y1"] is not None
    assert cells["X5"]["Y3"] is not None and cells["X5"]["Y1"] is None
    # calibration band around the survival/compliance cell
    assert 0.20 <= cells["X3"]["Y1"] <= 0.65


def test_heatmap_signs_match_reference_pattern(full_report):
    cells = full_report.heatmap["cells"]
    expected = {
        ("X3", "Y1"): +1, ("M1", "Y1"): +1, ("MOD1", "Y1"): +1, ("X6", "Y1"): -1,
        ("M2", "Y2"): -1, ("X2", "Y2"): -1, ("X6", "Y2"): +1,
        ("M2", "Y3"): +1, ("X5", "Y3"): +1, ("X6", "Y3"): -1,
    }
    for (row, col), sign in expected.items():
        assert np.sign(cells[row][col]) == sign, (row, col, cells[row][col])


def test_stepwise_cross_check_present(full_report):
    for name in ("Y2", "Y3"):
        entry = full_report.models[name]
        assert "stepwise" in entry
        assert entry["stepwise"]["trace"]["criterion"] == "aic"


def test_moderation_report_variants(full_report):
    mod = full_report.moderation
    assert mod["headline"] == "survival_interaction"
    assert mod["survival_interaction"]["interaction"]["p"] < 0.05
    assert "mediator_path_interaction" in mod


def test_report_json_round_trips(full_report):
    doc = json.loads(report_json(full_report))
    assert doc["schema_version"] == 1
    assert doc["run"]["seed"] == 42
    assert doc["run"]["n"] == 150


def test_determinism_byte_identical_minus_timestamp():
    a = run_pipeline(spec=default_scenario(), boot_b=800)
    b = run_pipeline(spec=default_scenario(), boot_b=800)
    da = json.loads(report_json(a))
    db = json.loads(report_json(b))
    da["run"]["timestamp"] = db["run"]["timestamp"] = "T"
    assert json.dumps(da, indent=2) == json.dumps(db, indent=2)


def test_csv_round_trip_reproduces_model_results(full_report, tmp_path):
    table = full_report.table
    path = tmp_path / "data.csv"
    table.write_csv(path)
    ingested = DataTable.read_csv(path)
    rerun = run_pipeline(spec=default_scenario(), table=ingested, boot_b=400)
    for name in ("Y1", "Y2", "Y3"):
        assert rerun.models[name]["fit"]["coef"] == full_report.models[name]["fit"]["coef"]
        assert rerun.models[name]["fit"]["p"] == full_report.models[name]["fit"]["p"]
    assert rerun.quality["passed"]


def test_missing_column_failure_names_model_and_column():
    table = generate(default_scenario())
    broken = table.select([n for n in table.names if n != "M1"])
    with pytest.raises(PipelineError) as exc:
        run_pipeline(table=broken, boot_b=50)
    msg = str(exc.value)
    assert "M1" in msg and "Y1" in msg
    assert exc.value.stage == "models"
    partial = exc.value.partial
    assert partial.failed_stage == "models"
    assert partial.eda is not None and partial.vif is not None
    assert partial.models == {}


def test_emit_outputs_manifest(full_report, tmp_path):
    out = tmp_path / "run1"
    manifest = emit_outputs(full_report, out)
    assert [m["file"] for m in manifest] == [
        "report.json", "data.csv", "heatmap.csv", "trace.txt",
    ]
    import hashlib
    for entry in manifest:
        data = (out / entry["file"]).read_bytes()
        assert hashlib.sha256(data).hexdigest() == entry["sha256"]
        assert len(data) == entry["bytes"]
    assert (out / "manifest.json").exists()


def test_heatmap_csv_shape(full_report):
    text = heatmap_csv(full_report)
    lines = text.strip().split("\n")
    assert lines[0] == "predictor,Y1,Y2,Y3"
    assert len(lines) == 1 + 7
    x2 = lines[1].split(",")
    assert x2[0] == "X2" and x2[1] == ""  # blank cell for a term not in the model


def test_run_pipeline_requires_input():
    with pytest.raises(ValueError):
        run_pipeline()
