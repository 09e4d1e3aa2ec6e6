import csv
import json
import math

import numpy as np
import pytest

from holobeam.cli import main
from holobeam.experiment import (
    RECORD_FIELDS,
    ExperimentResult,
    derive_seed,
    parse_spec,
    read_records,
    rhs_shape,
    run_experiment,
    snr_to_noise_var,
    write_oracle_reports,
    write_results,
)
from holobeam.geometry import ConfigError
from holobeam.oracles import OracleReport

PAPER_SYSTEM = {
    "num_users": 3,
    "num_feeds": 6,
    "num_paths": 5,
    "carrier_freq_hz": 30e9,
    "element_spacing_wavelengths": 0.25,
    "k_surface_mag": 200 * math.sqrt(3) * math.pi,
    "k_free_mag": 200 * math.pi,
}


def _spec(**overrides):
    doc = {
        "system": dict(PAPER_SYSTEM, rhs_rows=3, rhs_cols=3),
        "sweep": {"kind": "snr", "snr_db": [0, 10]},
        "num_trials": 2,
        "methods": ["proposed", "random_w"],
        "master_seed": 17,
        "optimizer": {"max_iters": 15},
    }
    doc.update(overrides)
    return json.dumps(doc)


def test_paper_scenario_is_accepted():
    spec = parse_spec(_spec())
    assert spec.base.num_users == 3 and spec.base.num_feeds == 6
    assert spec.base.element_spacing_m == pytest.approx(0.25 * 299_792_458 / 30e9)
    assert spec.grid == (0.0, 10.0)


def test_too_few_feeds_rejected():
    with pytest.raises(ConfigError) as err:
        parse_spec(_spec(system=dict(PAPER_SYSTEM, num_feeds=2)))
    assert "num_feeds" in err.value.field


@pytest.mark.parametrize("doc, field", [
    ('{"num_trials": 0}', "num_trials"),
    ('{"methods": ["bogus"]}', "methods"),
    ('{"sweep": {"kind": "snr", "snr_db": []}}', "sweep"),
    ('{"sweep": {"kind": "nope"}}', "sweep.kind"),
    ('{"system": {"bogus": 1}}', "system.bogus"),
    ('{"system": {"noise_vars": [1, -1, 1]}}', "system.noise_vars"),
    ('[1, 2]', "<document>"),
    ('{"oops"', "<document>"),
])
def test_structured_errors(doc, field):
    with pytest.raises(ConfigError) as err:
        parse_spec(doc)
    assert err.value.field == field


def test_snr_conversion():
    assert snr_to_noise_var(0.0) == 1.0
    assert snr_to_noise_var(10.0) == pytest.approx(0.1)
    assert snr_to_noise_var(20.0, 2.0) == pytest.approx(0.02)


def test_rhs_shape():
    assert rhs_shape(25) == (5, 5)
    assert rhs_shape(512) == (16, 32)
    assert rhs_shape(7) == (1, 7)
    assert rhs_shape([2, 3]) == (2, 3)


def test_seed_derivation_is_stable():
    assert derive_seed(17, 0) == derive_seed(17, 0)
    assert derive_seed(17, 0) != derive_seed(17, 1) != derive_seed(17, 1, 1)
    assert 0 <= derive_seed(2**64 - 1, 5) < 2**64


def test_paired_records_share_channel_seed():
    spec = parse_spec(_spec(num_trials=1, sweep={"kind": "snr", "snr_db": [5]}))
    result = run_experiment(spec)
    assert len(result.records) == 2
    assert {r.method for r in result.records} == {"proposed", "random_w"}
    assert len({r.channel_seed for r in result.records}) == 1


def test_record_count_and_values():
    spec = parse_spec(_spec())
    result = run_experiment(spec)
    assert len(result.records) == 2 * 2 * 2
    assert all(r.status == "ok" and math.isfinite(r.sum_rate) and r.sum_rate >= 0
               for r in result.records)
    aggs = result.aggregates()
    assert len(aggs) == 4 and all(a["stderr_sum_rate"] >= 0 for a in aggs)


def test_rhs_size_sweep_shares_paths_across_sizes():
    spec = parse_spec(_spec(sweep={"kind": "rhs_size", "rhs_sizes": [4, 9], "snr_db": 10},
                            methods=["proposed"]))
    result = run_experiment(spec)
    seeds = {}
    for r in result.records:
        seeds.setdefault(r.trial, set()).add(r.channel_seed)
    assert all(len(s) == 1 for s in seeds.values())
    assert {r.grid_value for r in result.records} == {4.0, 9.0}


def test_convergence_mode_emits_monotone_traces(tmp_path):
    spec = parse_spec(_spec(sweep={"kind": "convergence", "snr_db": 0},
                            methods=["proposed"], num_trials=2))
    result = run_experiment(spec)
    traces = result.traces["snr_db=0"]
    assert len(traces) == 2
    for t in traces:
        assert np.all(np.diff(t) >= -1e-6)
    write_results(result, tmp_path, plot=True)
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert len(summary["mean_traces"]["snr_db=0"]) == max(len(t) for t in traces)
    assert (tmp_path / "plot.svg").read_text().lstrip().startswith("<?xml")


def test_timing_mode_records_one_row_per_size():
    spec = parse_spec(_spec(sweep={"kind": "timing", "rhs_sizes": [16, 36], "iterations": 2,
                                   "repeats": 1}, num_trials=1))
    result = run_experiment(spec)
    assert [r.grid_value for r in result.records] == [16.0, 36.0]
    assert all(r.wall_time_ms > 0 and r.iterations == 2 for r in result.records)


def test_empty_result_writes_header_only(tmp_path):
    write_results(ExperimentResult(spec=None), tmp_path)
    assert (tmp_path / "records.csv").read_text() == ",".join(RECORD_FIELDS) + "\n"


def test_table_round_trip(tmp_path):
    spec = parse_spec(_spec(num_trials=1, sweep={"kind": "snr", "snr_db": [3]}))
    result = run_experiment(spec)
    write_results(result, tmp_path)
    lines = (tmp_path / "records.csv").read_text(encoding="utf-8").splitlines()
    assert len(lines) == 3
    assert read_records(tmp_path) == result.records


def test_write_reports_path_errors(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError, match="file"):
        write_results(ExperimentResult(spec=None), blocker / "sub")


def test_oracle_reports_table(tmp_path):
    path = write_oracle_reports({"holo_quadratic": OracleReport(1e-5, "(3,)", 100)}, tmp_path / "o.csv")
    with path.open() as fh:
        rows = list(csv.DictReader(fh))
    assert rows == [{"check": "holo_quadratic", "max_abs_discrepancy": "1e-05", "location": "(3,)",
                     "samples_checked": "100"}]


def test_cli_run_and_errors(tmp_path, capsys):
    spec_file = tmp_path / "spec.json"
    spec_file.write_text(_spec(num_trials=1))
    out = tmp_path / "out"
    assert main(["run", str(spec_file), "--out", str(out), "--trials", "1", "--seed", "3"]) == 0
    records = read_records(out)
    assert len(records) == 4 and records[0].channel_seed == derive_seed(3, 0)

    bad = tmp_path / "bad.json"
    bad.write_text(_spec(system=dict(PAPER_SYSTEM, num_feeds=2)))
    assert main(["run", str(bad)]) == 2
    assert "num_feeds" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "missing.json")]) == 1


def test_cli_convergence_and_timing(tmp_path):
    spec_file = tmp_path / "spec.json"
    spec_file.write_text(_spec(num_trials=1, sweep={"kind": "rhs_size", "rhs_sizes": [4, 9],
                                                     "snr_db": 0}))
    assert main(["convergence", str(spec_file), "--out", str(tmp_path / "c")]) == 0
    summary = json.loads((tmp_path / "c" / "summary.json").read_text())
    assert summary["sweep"] == "convergence" and summary["mean_traces"]
    assert main(["timing", str(spec_file), "--out", str(tmp_path / "t")]) == 0
    assert len(read_records(tmp_path / "t")) == 2
