"""Closed-form ridge readout: one-hot targets, training, scoring, decoding.

Training solves the regularized normal equations

    W = Y O^T (O O^T + lambda I)^{-1}

for the feature matrix O (features x samples) and one-hot targets Y
(classes x samples).  The N x N Gram system is factorized once via a
symmetric positive-definite Cholesky factorization and solved for all class
rows; the matrix inverse is never formed explicitly.  All linear algebra is
float64: squared and cubed raw accelerations span several orders of
magnitude.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg

from .exceptions import (
    ConfigurationError,
    DimensionMismatchError,
    LabelOutOfRangeError,
    LayoutMismatchError,
    NonFiniteInputError,
    NonFiniteScoresError,
    SingularSystemError,
)
from .features import FeatureMatrix

MODEL_FORMAT_VERSION = 1


def one_hot(labels, n_classes: int) -> np.ndarray:
    """One-hot target matrix: entry (label_j - 1, j) is 1, all else 0."""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.ndim != 1:
        raise DimensionMismatchError(f"labels must be 1-D, got shape {labels.shape}")
    if labels.size and (labels.min() < 1 or labels.max() > n_classes):
        bad = labels[(labels < 1) | (labels > n_classes)][0]
        raise LabelOutOfRangeError(f"label {bad} outside 1..{n_classes}")
    targets = np.zeros((n_classes, labels.size), dtype=np.float64)
    targets[labels - 1, np.arange(labels.size)] = 1.0
    return targets


def _features_and_layout(features) -> tuple[np.ndarray, tuple]:
    """Accept a FeatureMatrix or a plain (N, M) array (e.g. reservoir states)."""
    if isinstance(features, FeatureMatrix):
        return features.values, features.layout_signature()
    values = np.asarray(features, dtype=np.float64)
    if values.ndim != 2:
        raise DimensionMismatchError(
            f"features must be a 2-D (N, M) matrix, got shape {values.shape}"
        )
    return values, ("dense", values.shape[0])


@dataclass(frozen=True)
class ReadoutModel:
    """Trained linear readout: class scores are ``w_out @ features``."""

    w_out: np.ndarray
    ridge_lambda: float
    feature_layout: tuple
    class_names: tuple[str, ...]

    @property
    def n_classes(self) -> int:
        return self.w_out.shape[0]

    @property
    def n_features(self) -> int:
        return self.w_out.shape[1]

    def save(self, path) -> None:
        meta = {
            "format_version": MODEL_FORMAT_VERSION,
            "ridge_lambda": self.ridge_lambda,
            "feature_layout": _layout_to_jsonable(self.feature_layout),
            "class_names": list(self.class_names),
        }
        np.savez(path, w_out=self.w_out, meta=np.array(json.dumps(meta)))

    @classmethod
    def load(cls, path) -> "ReadoutModel":
        path = Path(path)
        with np.load(path, allow_pickle=False) as data:
            meta = json.loads(str(data["meta"]))
            version = meta.get("format_version")
            if version != MODEL_FORMAT_VERSION:
                raise ConfigurationError(
                    f"unsupported model format version {version!r} in {path}"
                )
            return cls(
                w_out=np.array(data["w_out"], dtype=np.float64),
                ridge_lambda=float(meta["ridge_lambda"]),
                feature_layout=_layout_from_jsonable(meta["feature_layout"]),
                class_names=tuple(meta["class_names"]),
            )


def _layout_to_jsonable(layout: tuple):
    if layout and layout[0] == "dense":
        return ["dense", int(layout[1])]
    blocks, bias = layout
    return [[list(b) for b in blocks], bool(bias)]


def _layout_from_jsonable(obj) -> tuple:
    if obj and obj[0] == "dense":
        return ("dense", int(obj[1]))
    blocks, bias = obj
    return (tuple((str(f), int(o), int(n), float(w)) for f, o, n, w in blocks), bool(bias))


def solve_readout_weights(gram: np.ndarray, cross: np.ndarray, ridge_lambda: float) -> np.ndarray:
    """Solve W (G + lambda I) = cross for W given G = O O^T and cross = Y O^T.

    Shared by :func:`train_readout` and the lambda-sweep machinery so every
    path through the package computes weights identically.
    """
    if ridge_lambda < 0:
        raise ConfigurationError(f"ridge lambda must be >= 0, got {ridge_lambda}")
    system = gram.copy()
    n = system.shape[0]
    system.flat[:: n + 1] += ridge_lambda
    try:
        factor = scipy.linalg.cho_factor(system, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(
            f"regularized Gram matrix is not positive definite "
            f"(lambda={ridge_lambda!r}): {exc}"
        ) from None
    return scipy.linalg.cho_solve(factor, cross.T, check_finite=False).T


def train_readout(
    features,
    targets: np.ndarray,
    ridge_lambda: float,
    class_names: tuple[str, ...] | None = None,
) -> ReadoutModel:
    """Train the readout on (features x samples) against one-hot targets.

    ``features`` is a :class:`FeatureMatrix` (whose layout the model
    remembers and enforces at prediction time) or a plain (N, M) array.
    With ``ridge_lambda == 0`` the Gram matrix must be numerically
    nonsingular.
    """
    values, layout = _features_and_layout(features)
    targets = np.asarray(targets, dtype=np.float64)
    if targets.ndim != 2:
        raise DimensionMismatchError(f"targets must be 2-D, got shape {targets.shape}")
    if targets.shape[1] != values.shape[1]:
        raise DimensionMismatchError(
            f"feature sample count {values.shape[1]} != target sample count "
            f"{targets.shape[1]}"
        )
    if not np.isfinite(values).all():
        raise NonFiniteInputError("features contain NaN or Inf")
    if not np.isfinite(targets).all():
        raise NonFiniteInputError("targets contain NaN or Inf")
    gram = values @ values.T
    cross = targets @ values.T
    w_out = solve_readout_weights(gram, cross, float(ridge_lambda))
    if class_names is None:
        class_names = tuple(f"class-{s}" for s in range(1, targets.shape[0] + 1))
    return ReadoutModel(
        w_out=w_out,
        ridge_lambda=float(ridge_lambda),
        feature_layout=layout,
        class_names=tuple(class_names),
    )


def predict_scores(model: ReadoutModel, features) -> np.ndarray:
    """Class scores (classes x samples) for new features under a trained model."""
    values, layout = _features_and_layout(features)
    if values.shape[0] != model.n_features:
        raise DimensionMismatchError(
            f"model expects {model.n_features} features, got {values.shape[0]}"
        )
    if layout != model.feature_layout:
        raise LayoutMismatchError(
            "feature layout differs from the model's training layout "
            "(families, weights, or bias do not match)"
        )
    return model.w_out @ values


def classify(scores: np.ndarray) -> np.ndarray:
    """Decode scores to 1-based class indices: per-column argmax.

    Ties break toward the smallest class index.
    """
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 2:
        raise DimensionMismatchError(f"scores must be 2-D, got shape {scores.shape}")
    if not np.isfinite(scores).all():
        raise NonFiniteScoresError("scores contain NaN or Inf")
    return np.argmax(scores, axis=0).astype(np.int64) + 1
