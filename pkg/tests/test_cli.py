"""Command-line pipeline: artifacts, exit codes, config handling."""
import json
import math

import pytest

from drivescore.fileio import read_csv_rows
from drivescore.glm import model_to_dict, fit_logistic, DesignMatrix
from conftest import run_cli

import numpy as np


def rows_of(path):
    _, rows = read_csv_rows(path)
    return rows


class TestSynthArtifacts:
    def test_outputs_exist(self, small_pop):
        for name in ("features.csv", "claims.csv", "truth.json", "events.jsonl"):
            assert (small_pop / name).exists(), name

    def test_features_csv_shape(self, small_pop):
        rows = rows_of(small_pop / "features.csv")
        assert len(rows) == 160
        assert rows[0]["window_kind"] == "lifetime"
        assert float(rows[0]["mileage"]) > 0

    def test_truth_lists_all_targets(self, small_pop):
        truth = json.loads((small_pop / "truth.json").read_text())
        assert set(truth["planted_betas"]) == {"weak", "medium", "strong"}
        assert truth["n_drivers"] == 160

    def test_requires_population_size(self, tmp_path):
        assert run_cli("synth", "--weeks", 4, "--out-dir", tmp_path) == 4


class TestEventPipeline:
    def test_parse(self, small_pop, tmp_path, capsys):
        rc = run_cli("parse", "--events", small_pop / "events.jsonl",
                     "--out-dir", tmp_path)
        assert rc == 0
        report = json.loads((tmp_path / "parse_report.json").read_text())
        assert report["n_devices"] == 2
        assert report["skipped"] == []
        assert (tmp_path / "parsed.jsonl").exists()

    def test_aggregate_then_features(self, small_pop, tmp_path):
        assert run_cli("aggregate", "--events", small_pop / "events.jsonl",
                       "--tz", "UTC", "--out-dir", tmp_path) == 0
        hourly = rows_of(tmp_path / "hourly.csv")
        trips = rows_of(tmp_path / "trips.csv")
        assert hourly and trips
        assert sum(float(r["mileage_km"]) for r in hourly) == pytest.approx(
            sum(float(r["mileage_km"]) for r in trips), rel=1e-6)
        assert run_cli("features", "--hourly", tmp_path / "hourly.csv",
                       "--trips", tmp_path / "trips.csv", "--window", "lifetime",
                       "--tz", "UTC", "--holidays", "none",
                       "--out-dir", tmp_path) == 0
        fv_rows = rows_of(tmp_path / "features.csv")
        assert len(fv_rows) == 2   # one lifetime row per logged device

    def test_weekly_window_multiplies_rows(self, small_pop, tmp_path):
        assert run_cli("aggregate", "--events", small_pop / "events.jsonl",
                       "--out-dir", tmp_path) == 0
        assert run_cli("features", "--hourly", tmp_path / "hourly.csv",
                       "--trips", tmp_path / "trips.csv", "--window", "weekly",
                       "--out-dir", tmp_path) == 0
        weekly = rows_of(tmp_path / "features.csv")
        assert len(weekly) > 2
        assert {r["window_kind"] for r in weekly} == {"weekly"}


class TestLabel:
    def test_labels_csv(self, small_pop, tmp_path):
        assert run_cli("label", "--claims", small_pop / "claims.csv",
                       "--out-dir", tmp_path) == 0
        labels = rows_of(tmp_path / "labels.csv")
        claims = rows_of(small_pop / "claims.csv")
        assert len(labels) == len(claims)
        assert set(r["class"] for r in labels) <= \
            {"none", "weak", "medium", "strong"}


class TestScoreAndPremium:
    def test_reference_scoring_and_premiums(self, small_pop, tmp_path):
        assert run_cli("score", "--model", "paper-reference", "--target", "any",
                       "--features", small_pop / "features.csv",
                       "--out-dir", tmp_path) == 0
        scores = rows_of(tmp_path / "scores.csv")
        assert len(scores) == 160
        for r in scores[:10]:
            assert 0.0 < float(r["probability"]) < 1.0
        assert run_cli("premium", "--scores", tmp_path / "scores.csv",
                       "--loss", 40000, "--admin", 1200, "--margin", 800,
                       "--out-dir", tmp_path) == 0
        prem = rows_of(tmp_path / "premiums.csv")
        for r in prem[:10]:
            want = float(r["probability"]) * 40000 + 1200 + 800
            assert float(r["premium"]) == pytest.approx(want, rel=1e-12)

    def test_scoring_with_model_file(self, small_pop, tmp_path):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(200, 1))
        y = (rng.random(200) < 1 / (1 + np.exp(-X[:, 0]))).astype(int)
        rows = [{"mileage": float(v)} for v in X[:, 0]]
        model = fit_logistic(DesignMatrix.from_rows(rows, y, ("mileage",)),
                             target="any")
        path = tmp_path / "model.json"
        path.write_text(json.dumps(model_to_dict(model)))
        assert run_cli("score", "--model", path,
                       "--features", small_pop / "features.csv",
                       "--out-dir", tmp_path) == 0
        assert rows_of(tmp_path / "scores.csv")

    def test_premium_requires_loss(self, small_pop, tmp_path):
        assert run_cli("score", "--model", "paper-reference",
                       "--features", small_pop / "features.csv",
                       "--out-dir", tmp_path) == 0
        assert run_cli("premium", "--scores", tmp_path / "scores.csv",
                       "--out-dir", tmp_path) == 4


class TestFitAndReport:
    def test_fit_without_positives_exits_3(self, small_pop, tmp_path):
        empty = tmp_path / "claims.csv"
        empty.write_text("device,loss_size,ins_sum,culprit\n")
        rc = run_cli("fit", "--features", small_pop / "features.csv",
                     "--claims", empty, "--out-dir", tmp_path)
        assert rc == 3

    def test_report_artifacts(self, small_pop, tmp_path):
        assert run_cli("report", "--features", small_pop / "features.csv",
                       "--claims", small_pop / "claims.csv",
                       "--out-dir", tmp_path) == 0
        desc = rows_of(tmp_path / "descriptive.csv")
        assert {r["feature"] for r in desc} >= {"mileage", "a1", "max_sp"}
        corr = rows_of(tmp_path / "correlation.csv")
        first = corr[0]
        assert float(first[first["feature"]]) == pytest.approx(1.0)

    def test_ablate_grouping(self, closed_loop, tmp_path):
        src = closed_loop(0)
        rc = run_cli("ablate", "--features", src / "features.csv",
                     "--claims", src / "claims.csv",
                     "--group", "mileage,avg_sp", "--out-dir", tmp_path)
        assert rc == 0
        rows = rows_of(tmp_path / "ablation.csv")
        assert [r["target"] for r in rows] == ["any", "weak", "medium", "strong"]
        assert all(r["group"] == "mileage avg_sp" for r in rows)


class TestErrorPaths:
    def test_missing_input_exits_2(self, tmp_path):
        assert run_cli("parse", "--events", tmp_path / "nope.jsonl") == 2

    def test_unknown_config_key_exits_4(self, small_pop, tmp_path):
        cfg = tmp_path / "drivescore.cfg"
        cfg.write_text("bogus = 1\n")
        assert run_cli("--config", cfg, "label",
                       "--claims", small_pop / "claims.csv") == 4

    def test_malformed_config_line_exits_4(self, small_pop, tmp_path):
        cfg = tmp_path / "drivescore.cfg"
        cfg.write_text("just some words\n")
        assert run_cli("--config", cfg, "label",
                       "--claims", small_pop / "claims.csv") == 4

    def test_bad_window_exits_4(self, small_pop, tmp_path):
        assert run_cli("aggregate", "--events", small_pop / "events.jsonl",
                       "--out-dir", tmp_path) == 0
        cfg = tmp_path / "drivescore.cfg"
        cfg.write_text("window = daily\n")
        assert run_cli("--config", cfg, "features",
                       "--hourly", tmp_path / "hourly.csv",
                       "--trips", tmp_path / "trips.csv",
                       "--out-dir", tmp_path) == 4

    def test_negative_loss_exits_1(self, small_pop, tmp_path):
        assert run_cli("score", "--model", "paper-reference",
                       "--features", small_pop / "features.csv",
                       "--out-dir", tmp_path) == 0
        assert run_cli("premium", "--scores", tmp_path / "scores.csv",
                       "--loss", -5, "--out-dir", tmp_path) == 1


class TestConfigPassthrough:
    def test_config_supplies_out_dir(self, small_pop, tmp_path):
        out = tmp_path / "from_config"
        cfg = tmp_path / "drivescore.cfg"
        cfg.write_text(f"out_dir = {out}\nloss = 30000\n")
        assert run_cli("--config", cfg, "label",
                       "--claims", small_pop / "claims.csv") == 0
        assert (out / "labels.csv").exists()

    def test_flags_beat_config(self, small_pop, tmp_path):
        cfg = tmp_path / "drivescore.cfg"
        other = tmp_path / "flagged"
        cfg.write_text(f"out_dir = {tmp_path / 'ignored'}\n")
        assert run_cli("--config", cfg, "label",
                       "--claims", small_pop / "claims.csv",
                       "--out-dir", other) == 0
        assert (other / "labels.csv").exists()
        assert not (tmp_path / "ignored").exists()
