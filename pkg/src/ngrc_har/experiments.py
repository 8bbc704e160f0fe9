"""Benchmark experiment harness: single runs, ablations, and sweeps.

Every run produces a :class:`RunReport` that echoes enough configuration to
reproduce it exactly.  When no fixed ridge lambda is supplied, runs sweep a
logarithmic grid and select by internal validation on the last 20% of the
training windows, so the test split is only touched for final scoring.
"""

from __future__ import annotations

import logging
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .dataset import (
    Dataset,
    Split,
    dataset_digest,
    load_har_split,
)
from .exceptions import (
    ConfigurationError,
    MissingWeightError,
    NgrcHarError,
)
from .features import (
    FAMILY_ORDER,
    FeatureConfig,
    FeatureFamily,
    FeatureMatrix,
    assemble_feature_matrix,
    family_matrix,
    named_feature_set,
)
from .metrics import accuracy, confusion
from .readout import classify, one_hot, predict_scores, solve_readout_weights, train_readout
from .reservoir import ReservoirSpec, node_sweep

logger = logging.getLogger(__name__)

MODES = ("ngrc", "ablate", "weighted", "esn-sweep", "lambda-sweep", "digest")

DEFAULT_LAMBDA_GRID = tuple(float(x) for x in np.logspace(-6.0, 2.0, 9))

# Nonuniform family weights for the weighted benchmark default, applied to
# feature set #1 (lin, nls, nlq, nlcs, nlt).
DEFAULT_NONUNIFORM_WEIGHTS = {
    FeatureFamily.LIN: 1.0,
    FeatureFamily.NLS: 1.8,
    FeatureFamily.NLQ: 2.0,
    FeatureFamily.NLCS: 1.4,
    FeatureFamily.NLT: 0.4,
}

VALIDATION_FRACTION = 0.2


@contextmanager
def _stage(name: str):
    """Prefix any package error with the failing stage's name."""
    try:
        yield
    except NgrcHarError as exc:
        if exc.args and isinstance(exc.args[0], str):
            exc.args = (f"[{name}] {exc.args[0]}",) + exc.args[1:]
        else:
            exc.args = (f"[{name}]",) + exc.args
        raise


@dataclass
class ExperimentConfig:
    """All knobs of one benchmark invocation (CLI flags mirror these)."""

    dataset_root: str | Path
    mode: str
    feature_set: int | None = None
    families: tuple[FeatureFamily, ...] | None = None
    weights: dict | None = None
    ridge_lambda: float | None = None
    lambda_grid: tuple[float, ...] | None = None
    include_bias: bool = False
    node_counts: tuple[int, ...] | None = None
    k: int = 4
    p_rewire: float = 0.5
    target_rho: float = 8.41
    input_scale: float = 1.0
    leak_rate: float = 1.0
    washout: int = 8
    seeds: tuple[int, ...] = (0, 1, 2)
    include_magnitude: bool = False
    output_path: str | Path | None = None
    output_format: str = "json"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigurationError(f"unknown mode {self.mode!r}; valid: {MODES}")
        if self.output_format not in ("json", "csv"):
            raise ConfigurationError(
                f"unknown output format {self.output_format!r} (use json or csv)"
            )
        if self.feature_set is not None and self.families is not None:
            raise ConfigurationError("give either a feature-set id or a family list, not both")
        if self.ridge_lambda is not None and self.lambda_grid is not None:
            raise ConfigurationError("give either a fixed lambda or a sweep grid, not both")
        if self.ridge_lambda is not None and self.ridge_lambda < 0:
            raise ConfigurationError(f"lambda must be >= 0, got {self.ridge_lambda}")
        if self.lambda_grid is not None and len(self.lambda_grid) == 0:
            raise ConfigurationError("lambda grid must not be empty")
        if self.mode == "esn-sweep":
            if not self.node_counts:
                raise ConfigurationError("esn-sweep requires a nonempty node count list")
            if self.lambda_grid is not None:
                raise ConfigurationError("esn-sweep takes a fixed lambda, not a sweep grid")
            if not self.seeds:
                raise ConfigurationError("esn-sweep requires at least one seed")

    def resolve_families(self) -> tuple[FeatureFamily, ...]:
        if self.feature_set is not None:
            return named_feature_set(self.feature_set)
        if self.families is not None:
            return tuple(FeatureFamily(f) for f in self.families)
        return FAMILY_ORDER

    def echo(self) -> dict:
        families = self.resolve_families()
        out = {
            "dataset_root": str(self.dataset_root),
            "mode": self.mode,
            "feature_set": self.feature_set,
            "families": [f.value for f in families],
            "weights": {FeatureFamily(k).value: float(v) for k, v in (self.weights or {}).items()},
            "include_bias": self.include_bias,
            "lambda": None if self.ridge_lambda is None else float(self.ridge_lambda),
            "lambda_grid": [float(x) for x in self.lambda_grid] if self.lambda_grid else None,
            "seeds": [int(s) for s in self.seeds],
        }
        if self.mode == "esn-sweep":
            out["reservoir"] = {
                "node_counts": list(self.node_counts or ()),
                "k": self.k,
                "p_rewire": self.p_rewire,
                "target_rho": self.target_rho,
                "input_scale": self.input_scale,
                "leak_rate": self.leak_rate,
                "washout": self.washout,
            }
        return out


@dataclass
class RunReport:
    """One experiment outcome plus everything needed to reproduce it."""

    mode: str
    label: str
    config: dict
    accuracy: float | None = None
    confusion: dict | None = None
    feature_dims: dict | None = None
    lambda_used: float | None = None
    lambda_curve: list | None = None
    extra: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    version: str = __version__
    created_at: str = ""

    def __post_init__(self):
        if not self.created_at:
            self.created_at = datetime.now(timezone.utc).isoformat()

    def to_dict(self) -> dict:
        out = {
            "mode": self.mode,
            "label": self.label,
            "version": self.version,
            "created_at": self.created_at,
            "config": self.config,
            "timings": self.timings,
        }
        for key in ("accuracy", "confusion", "feature_dims", "lambda_used", "lambda_curve"):
            value = getattr(self, key)
            if value is not None:
                out[key] = value
        if self.extra:
            out["extra"] = self.extra
        return out

    def reproducible_dict(self) -> dict:
        """Report contents minus wall-clock noise, for determinism checks."""
        out = self.to_dict()
        out.pop("timings", None)
        out.pop("created_at", None)
        return out


def _load_splits(cfg: ExperimentConfig) -> tuple[Dataset, Dataset]:
    with _stage("load-dataset"):
        train = load_har_split(cfg.dataset_root, Split.TRAIN)
        test = load_har_split(cfg.dataset_root, Split.TEST)
    return train, test


def _get_family_blocks(samples: np.ndarray, families, cache: dict | None) -> dict:
    blocks = {}
    for f in families:
        if cache is not None and f in cache:
            blocks[f] = cache[f]
            continue
        block = family_matrix(samples, f)
        if cache is not None:
            cache[f] = block
        blocks[f] = block
    return blocks


def _sweep_validation(
    features: FeatureMatrix,
    labels: np.ndarray,
    n_classes: int,
    grid,
) -> tuple[list[dict], float]:
    """Validation-accuracy curve over a lambda grid (last 20% of train held out).

    Returns the curve and the best-validation lambda; ties break toward the
    earliest grid entry.
    """
    M = features.sample_count
    n_val = int(M * VALIDATION_FRACTION)
    if n_val < 1 or M - n_val < 1:
        raise ConfigurationError(
            f"training split with {M} windows is too small for a 20% holdout"
        )
    cut = M - n_val
    fit_values = features.values[:, :cut]
    val_values = features.values[:, cut:]
    fit_targets = one_hot(labels[:cut], n_classes)
    val_labels = labels[cut:]
    gram = fit_values @ fit_values.T
    cross = fit_targets @ fit_values.T
    curve = []
    for lam in grid:
        weights = solve_readout_weights(gram, cross, float(lam))
        predicted = classify(weights @ val_values)
        val_acc = accuracy(confusion(val_labels, predicted, n_classes))
        curve.append({"lambda": float(lam), "validation_accuracy": val_acc})
    best_index = int(np.argmax([entry["validation_accuracy"] for entry in curve]))
    return curve, float(grid[best_index])


def _evaluate(
    train: Dataset,
    test: Dataset,
    config: FeatureConfig,
    lambda_spec: tuple[str, object],
    *,
    mode: str,
    label: str,
    config_echo: dict,
    cache_train: dict | None = None,
    cache_test: dict | None = None,
) -> RunReport:
    """Shared single-configuration path: features, (swept) training, scoring."""
    n_classes = len(train.class_names)
    timings = {}

    with _stage("feature-build"):
        t0 = time.perf_counter()
        train_fm = assemble_feature_matrix(
            _get_family_blocks(train.samples, config.families, cache_train),
            config, n_samples=len(train),
        )
        test_fm = assemble_feature_matrix(
            _get_family_blocks(test.samples, config.families, cache_test),
            config, n_samples=len(test),
        )
        timings["feature_build_s"] = time.perf_counter() - t0

    with _stage("train"):
        t0 = time.perf_counter()
        kind, value = lambda_spec
        curve = None
        if kind == "fixed":
            lambda_used = float(value)  # type: ignore[arg-type]
        else:
            curve, lambda_used = _sweep_validation(train_fm, train.labels, n_classes, value)
        model = train_readout(
            train_fm,
            one_hot(train.labels, n_classes),
            lambda_used,
            class_names=train.class_names,
        )
        timings["train_s"] = time.perf_counter() - t0

    with _stage("predict"):
        t0 = time.perf_counter()
        predicted = classify(predict_scores(model, test_fm))
        cm = confusion(test.labels, predicted, n_classes, class_names=test.class_names)
        timings["predict_s"] = time.perf_counter() - t0

    dims = {b.family.value: b.length for b in train_fm.blocks}
    dims["total"] = train_fm.n_features
    return RunReport(
        mode=mode,
        label=label,
        config=config_echo,
        accuracy=accuracy(cm),
        confusion=cm.to_dict(),
        feature_dims=dims,
        lambda_used=lambda_used,
        lambda_curve=curve,
        timings=timings,
    )


def _lambda_spec(cfg: ExperimentConfig) -> tuple[str, object]:
    if cfg.ridge_lambda is not None:
        return ("fixed", cfg.ridge_lambda)
    return ("sweep", cfg.lambda_grid or DEFAULT_LAMBDA_GRID)


def run_ngrc(cfg: ExperimentConfig) -> RunReport:
    """One end-to-end run: load, featurize, train on Train, score on Test."""
    train, test = _load_splits(cfg)
    families = cfg.resolve_families()
    config = FeatureConfig(families=families, weights=cfg.weights, include_bias=cfg.include_bias)
    label = f"set-{cfg.feature_set}" if cfg.feature_set else "+".join(f.value for f in families)
    logger.info("ngrc run: %s", label)
    return _evaluate(
        train, test, config, _lambda_spec(cfg),
        mode=cfg.mode, label=label, config_echo=cfg.echo(),
    )


def run_ablation(cfg: ExperimentConfig) -> list[RunReport]:
    """Evaluate feature sets #1..#10, sharing the dataset load and family blocks."""
    train, test = _load_splits(cfg)
    if cfg.weights:
        raise ConfigurationError("the ablation runs uniform weights; drop the weight map")
    cache_train: dict = {}
    cache_test: dict = {}
    reports = []
    for set_id in range(1, 11):
        config = FeatureConfig(families=named_feature_set(set_id), include_bias=cfg.include_bias)
        echo = cfg.echo()
        echo["feature_set"] = set_id
        echo["families"] = [f.value for f in config.families]
        logger.info("ablation: feature set #%d", set_id)
        report = _evaluate(
            train, test, config, _lambda_spec(cfg),
            mode=cfg.mode, label=f"set-{set_id}", config_echo=echo,
            cache_train=cache_train, cache_test=cache_test,
        )
        report.extra["feature_set"] = set_id
        reports.append(report)
    best = max(range(len(reports)), key=lambda i: reports[i].accuracy)
    for report in reports:
        report.extra["best_feature_set"] = best + 1
    return reports


def run_weighted(cfg: ExperimentConfig) -> RunReport:
    """NG-RC run with nonuniform family weights.

    With no explicit selection this evaluates the benchmark default: weights
    (1.0, 1.8, 2.0, 1.4, 0.4) on feature set #1.  Explicit family choices
    must come with a weight for every enabled family.
    """
    weights = cfg.weights
    feature_set = cfg.feature_set
    families = cfg.families
    if weights is None:
        if feature_set is None and families is None:
            feature_set = 1
            weights = dict(DEFAULT_NONUNIFORM_WEIGHTS)
        else:
            raise MissingWeightError(
                "weighted mode needs a weight for every enabled family"
            )
    resolved = (
        named_feature_set(feature_set) if feature_set is not None
        else tuple(FeatureFamily(f) for f in families) if families is not None
        else FAMILY_ORDER
    )
    weights = {FeatureFamily(k): float(v) for k, v in weights.items()}
    missing = [f.value for f in resolved if f not in weights]
    if missing:
        raise MissingWeightError(f"missing weights for families: {missing}")
    train, test = _load_splits(cfg)
    config = FeatureConfig(families=resolved, weights=weights, include_bias=cfg.include_bias)
    echo = cfg.echo()
    echo["feature_set"] = feature_set
    echo["families"] = [f.value for f in resolved]
    echo["weights"] = {f.value: w for f, w in weights.items()}
    label = f"weighted-set-{feature_set}" if feature_set else "weighted"
    logger.info("weighted run: %s", label)
    return _evaluate(
        train, test, config, _lambda_spec(cfg),
        mode=cfg.mode, label=label, config_echo=echo,
    )


def run_lambda_sweep(cfg: ExperimentConfig) -> tuple[list[RunReport], float]:
    """Per-lambda validation and test accuracy over a grid, plus the selection.

    Selection uses validation accuracy only (last 20% of the training
    windows); the per-lambda test accuracies are reported for the curve.
    """
    train, test = _load_splits(cfg)
    families = cfg.resolve_families()
    config = FeatureConfig(families=families, weights=cfg.weights, include_bias=cfg.include_bias)
    grid = [float(x) for x in (cfg.lambda_grid or DEFAULT_LAMBDA_GRID)]
    if cfg.ridge_lambda is not None:
        raise ConfigurationError("lambda-sweep needs a grid, not a fixed lambda")
    n_classes = len(train.class_names)

    with _stage("feature-build"):
        t0 = time.perf_counter()
        train_fm = assemble_feature_matrix(
            _get_family_blocks(train.samples, config.families, None),
            config, n_samples=len(train),
        )
        test_fm = assemble_feature_matrix(
            _get_family_blocks(test.samples, config.families, None),
            config, n_samples=len(test),
        )
        feature_time = time.perf_counter() - t0

    with _stage("train"):
        curve, selected = _sweep_validation(train_fm, train.labels, n_classes, grid)
        # Full-train Gram, shared across the per-lambda test models.
        gram = train_fm.values @ train_fm.values.T
        cross = one_hot(train.labels, n_classes) @ train_fm.values.T

    reports = []
    dims = {b.family.value: b.length for b in train_fm.blocks}
    dims["total"] = train_fm.n_features
    for entry in curve:
        lam = entry["lambda"]
        with _stage("train"):
            t0 = time.perf_counter()
            weights = solve_readout_weights(gram, cross, lam)
            train_time = time.perf_counter() - t0
        with _stage("predict"):
            t0 = time.perf_counter()
            predicted = classify(weights @ test_fm.values)
            cm = confusion(test.labels, predicted, n_classes, class_names=test.class_names)
            predict_time = time.perf_counter() - t0
        echo = cfg.echo()
        echo["lambda"] = lam
        report = RunReport(
            mode=cfg.mode,
            label=f"lambda={lam:g}",
            config=echo,
            accuracy=accuracy(cm),
            confusion=cm.to_dict(),
            feature_dims=dims,
            lambda_used=lam,
            extra={
                "validation_accuracy": entry["validation_accuracy"],
                "selected": lam == selected,
            },
            timings={
                "feature_build_s": feature_time,
                "train_s": train_time,
                "predict_s": predict_time,
            },
        )
        reports.append(report)
    logger.info("lambda sweep selected %g", selected)
    return reports, selected


def run_esn_sweep(cfg: ExperimentConfig) -> list[RunReport]:
    """Reservoir-baseline accuracy as a function of node count."""
    train, test = _load_splits(cfg)
    lam = cfg.ridge_lambda if cfg.ridge_lambda is not None else 1e-3
    template = ReservoirSpec(
        n_nodes=max(cfg.node_counts),
        k=cfg.k,
        p_rewire=cfg.p_rewire,
        target_rho=cfg.target_rho,
        input_scale=cfg.input_scale,
        leak_rate=cfg.leak_rate,
        washout=cfg.washout,
        seed=cfg.seeds[0],
    )
    with _stage("esn-sweep"):
        t0 = time.perf_counter()
        points = node_sweep(
            train, test, cfg.node_counts, template, lam, seeds=cfg.seeds
        )
        sweep_time = time.perf_counter() - t0
    reports = []
    for point in points:
        echo = cfg.echo()
        report = RunReport(
            mode=cfg.mode,
            label=f"n={point.n_nodes}",
            config=echo,
            accuracy=point.mean_accuracy,
            lambda_used=lam,
            extra={
                "n_nodes": point.n_nodes,
                "per_seed": [
                    {
                        "seed": r.seed,
                        "accuracy": r.accuracy,
                        "confusion": r.confusion.to_dict(),
                    }
                    for r in point.per_seed
                ],
            },
            timings={"sweep_total_s": sweep_time},
        )
        reports.append(report)
    return reports


def run_digest(cfg: ExperimentConfig) -> list[RunReport]:
    """Ingestion sanity report for both splits."""
    reports = []
    for split in (Split.TRAIN, Split.TEST):
        with _stage("load-dataset"):
            t0 = time.perf_counter()
            data = load_har_split(cfg.dataset_root, split)
            load_time = time.perf_counter() - t0
        digest = dataset_digest(data, include_magnitude=cfg.include_magnitude)
        reports.append(
            RunReport(
                mode=cfg.mode,
                label=split.value,
                config=cfg.echo(),
                extra={"digest": digest.to_dict()},
                timings={"load_s": load_time},
            )
        )
    return reports


def ablation_table(reports: list[RunReport]) -> str:
    """Aligned comparison table for an ablation's ten reports."""
    lines = ["set   families                          lambda     accuracy"]
    for report in reports:
        families = "+".join(report.config["families"])
        mark = " *" if report.extra.get("feature_set") == report.extra.get("best_feature_set") else ""
        lines.append(
            f"#{report.extra['feature_set']:<4} {families:<32}  {report.lambda_used:<9.3g}  "
            f"{100 * report.accuracy:6.2f}%{mark}"
        )
    return "\n".join(lines)
