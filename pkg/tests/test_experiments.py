"""Harness tests on the synthetic corpus: runs, sweeps, caching, determinism."""

import json

import numpy as np
import pytest

from ngrc_har.exceptions import (
    ConfigurationError,
    DataError,
    MissingWeightError,
)
from ngrc_har.experiments import (
    DEFAULT_LAMBDA_GRID,
    DEFAULT_NONUNIFORM_WEIGHTS,
    ExperimentConfig,
    ablation_table,
    run_ablation,
    run_digest,
    run_esn_sweep,
    run_lambda_sweep,
    run_ngrc,
    run_weighted,
)
from ngrc_har.features import FeatureFamily

GRID3 = (1e-4, 1e-2, 1.0)


def test_run_ngrc_fixed_lambda(synth_root):
    cfg = ExperimentConfig(dataset_root=synth_root, mode="ngrc",
                           feature_set=7, ridge_lambda=1e-2)
    report = run_ngrc(cfg)
    assert report.mode == "ngrc"
    assert report.label == "set-7"
    assert report.lambda_used == 1e-2
    assert report.lambda_curve is None
    assert 0.0 <= report.accuracy <= 1.0
    assert report.feature_dims == {"lin": 384, "nls": 381, "total": 765}
    assert sum(sum(row) for row in report.confusion["counts"]) == 42
    assert set(report.timings) == {"feature_build_s", "train_s", "predict_s"}
    assert report.config["feature_set"] == 7
    assert report.version


def test_run_ngrc_sweeps_lambda_by_default(synth_root):
    cfg = ExperimentConfig(dataset_root=synth_root, mode="ngrc",
                           feature_set=8, lambda_grid=GRID3)
    report = run_ngrc(cfg)
    assert report.lambda_used in GRID3
    assert [entry["lambda"] for entry in report.lambda_curve] == list(GRID3)
    for entry in report.lambda_curve:
        assert 0.0 <= entry["validation_accuracy"] <= 1.0


def test_reports_are_deterministic(synth_root):
    cfg = ExperimentConfig(dataset_root=synth_root, mode="ngrc",
                           feature_set=7, lambda_grid=GRID3)
    a = run_ngrc(cfg).reproducible_dict()
    b = run_ngrc(cfg).reproducible_dict()
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_stage_names_in_errors(tmp_path):
    cfg = ExperimentConfig(dataset_root=tmp_path / "nowhere", mode="ngrc",
                           ridge_lambda=1e-3)
    with pytest.raises(DataError, match=r"^\[load-dataset\]"):
        run_ngrc(cfg)


@pytest.fixture(scope="module")
def ablation_reports(synth_root):
    cfg = ExperimentConfig(dataset_root=synth_root, mode="ablate", lambda_grid=GRID3)
    return run_ablation(cfg)


def test_ablation_runs_all_ten_sets(ablation_reports):
    reports = ablation_reports
    assert len(reports) == 10
    assert [r.extra["feature_set"] for r in reports] == list(range(1, 11))
    assert [r.label for r in reports] == [f"set-{i}" for i in range(1, 11)]
    best = reports[0].extra["best_feature_set"]
    best_acc = max(r.accuracy for r in reports)
    assert reports[best - 1].accuracy == best_acc
    table = ablation_table(reports)
    assert table.count("\n") == 10
    assert "#10" in table


def test_ablation_entry_matches_standalone_run(synth_root, ablation_reports):
    reports = ablation_reports
    standalone = run_ngrc(
        ExperimentConfig(dataset_root=synth_root, mode="ngrc",
                         feature_set=8, lambda_grid=GRID3)
    )
    entry = reports[7]
    assert entry.accuracy == standalone.accuracy  # full float equality
    assert entry.confusion["counts"] == standalone.confusion["counts"]
    assert entry.lambda_used == standalone.lambda_used


def test_ablation_rejects_weights(synth_root):
    cfg = ExperimentConfig(dataset_root=synth_root, mode="ablate",
                           weights={FeatureFamily.LIN: 2.0})
    with pytest.raises(ConfigurationError):
        run_ablation(cfg)


def test_weighted_default_tuple(synth_root):
    cfg = ExperimentConfig(dataset_root=synth_root, mode="weighted", lambda_grid=GRID3)
    report = run_weighted(cfg)
    assert report.label == "weighted-set-1"
    assert report.config["weights"] == {
        "lin": 1.0, "nls": 1.8, "nlq": 2.0, "nlcs": 1.4, "nlt": 0.4
    }
    assert report.feature_dims["total"] == 2039


def test_weighted_unit_weights_match_uniform_run(synth_root):
    weights = {f: 1.0 for f in DEFAULT_NONUNIFORM_WEIGHTS}
    weighted = run_weighted(
        ExperimentConfig(dataset_root=synth_root, mode="weighted", feature_set=1,
                         weights=weights, lambda_grid=GRID3)
    )
    uniform = run_ngrc(
        ExperimentConfig(dataset_root=synth_root, mode="ngrc", feature_set=1,
                         lambda_grid=GRID3)
    )
    assert weighted.accuracy == uniform.accuracy
    assert weighted.confusion["counts"] == uniform.confusion["counts"]
    assert weighted.lambda_used == uniform.lambda_used


def test_weighted_missing_weights(synth_root):
    with pytest.raises(MissingWeightError):
        run_weighted(
            ExperimentConfig(dataset_root=synth_root, mode="weighted", feature_set=1,
                             weights={FeatureFamily.LIN: 1.0})
        )
    with pytest.raises(MissingWeightError):
        run_weighted(
            ExperimentConfig(dataset_root=synth_root, mode="weighted", feature_set=2)
        )


def test_weighted_common_rescaling_keeps_decisions(synth_root):
    c = 2.0
    lam = 1e-2
    base = run_weighted(
        ExperimentConfig(dataset_root=synth_root, mode="weighted", feature_set=1,
                         weights={f: 1.0 for f in DEFAULT_NONUNIFORM_WEIGHTS},
                         ridge_lambda=lam)
    )
    scaled = run_weighted(
        ExperimentConfig(dataset_root=synth_root, mode="weighted", feature_set=1,
                         weights={f: c for f in DEFAULT_NONUNIFORM_WEIGHTS},
                         ridge_lambda=lam * c * c)
    )
    assert scaled.confusion["counts"] == base.confusion["counts"]
    assert scaled.accuracy == base.accuracy


def test_lambda_sweep_reports_and_selection(synth_root):
    cfg = ExperimentConfig(dataset_root=synth_root, mode="lambda-sweep",
                           feature_set=8, lambda_grid=DEFAULT_LAMBDA_GRID)
    reports, selected = run_lambda_sweep(cfg)
    assert len(reports) == 9
    assert selected in DEFAULT_LAMBDA_GRID
    flags = [r.extra["selected"] for r in reports]
    assert sum(flags) == 1
    chosen = reports[flags.index(True)]
    assert chosen.lambda_used == selected
    best_val = max(r.extra["validation_accuracy"] for r in reports)
    assert chosen.extra["validation_accuracy"] == best_val
    for r in reports:
        assert 0.0 <= r.accuracy <= 1.0  # test accuracy recorded per lambda


def test_lambda_sweep_rejects_fixed_lambda(synth_root):
    cfg = ExperimentConfig(dataset_root=synth_root, mode="lambda-sweep",
                           feature_set=8, ridge_lambda=1e-3)
    with pytest.raises(ConfigurationError):
        run_lambda_sweep(cfg)


def test_esn_sweep_reports(synth_root):
    cfg = ExperimentConfig(dataset_root=synth_root, mode="esn-sweep",
                           node_counts=(12, 18), k=2, target_rho=0.9,
                           ridge_lambda=1e-3, seeds=(0, 1))
    reports = run_esn_sweep(cfg)
    assert [r.extra["n_nodes"] for r in reports] == [12, 18]
    for report in reports:
        per_seed = report.extra["per_seed"]
        assert [entry["seed"] for entry in per_seed] == [0, 1]
        assert report.accuracy == pytest.approx(
            np.mean([entry["accuracy"] for entry in per_seed])
        )
        for entry in per_seed:
            total = sum(sum(row) for row in entry["confusion"]["counts"])
            assert total == 42


def test_esn_sweep_config_validation(synth_root):
    with pytest.raises(ConfigurationError):
        ExperimentConfig(dataset_root=synth_root, mode="esn-sweep", node_counts=())
    with pytest.raises(ConfigurationError):
        ExperimentConfig(dataset_root=synth_root, mode="esn-sweep",
                         node_counts=(12,), lambda_grid=GRID3)
    with pytest.raises(ConfigurationError):
        ExperimentConfig(dataset_root=synth_root, mode="esn-sweep",
                         node_counts=(12,), seeds=())


def test_digest_reports(synth_root):
    reports = run_digest(
        ExperimentConfig(dataset_root=synth_root, mode="digest", include_magnitude=True)
    )
    assert [r.label for r in reports] == ["train", "test"]
    train_digest = reports[0].extra["digest"]
    assert train_digest["n_windows"] == 90
    assert sum(train_digest["class_counts"].values()) == 90
    assert "magnitude_stats" in train_digest


def test_experiment_config_validation(tmp_path):
    with pytest.raises(ConfigurationError):
        ExperimentConfig(dataset_root=tmp_path, mode="bogus")
    with pytest.raises(ConfigurationError):
        ExperimentConfig(dataset_root=tmp_path, mode="ngrc",
                         ridge_lambda=1e-3, lambda_grid=GRID3)
    with pytest.raises(ConfigurationError):
        ExperimentConfig(dataset_root=tmp_path, mode="ngrc",
                         feature_set=1, families=("lin",))
    with pytest.raises(ConfigurationError):
        ExperimentConfig(dataset_root=tmp_path, mode="ngrc", ridge_lambda=-1.0)
    with pytest.raises(ConfigurationError):
        ExperimentConfig(dataset_root=tmp_path, mode="ngrc", output_format="xml")
