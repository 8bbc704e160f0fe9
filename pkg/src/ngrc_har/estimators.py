"""Scikit-learn style estimators wrapping the functional core.

These adapters use the sklearn sample-major convention: X rows are windows,
either as a 3-D array (n_windows, 3, T) or the equivalent flattened 2-D
array (n_windows, 3 * T).  They compose with ``sklearn.pipeline.Pipeline``,
``clone``, and ``get_params``/``set_params``:

    pipe = make_pipeline(
        DelayPolynomialFeatures(feature_set=1),
        RidgeReadoutClassifier(alpha=1e-3),
    )
    pipe.fit(X_train, y_train).score(X_test, y_test)
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import readout
from .exceptions import ConfigurationError
from .features import (
    FeatureConfig,
    build_feature_matrix,
    feature_names,
    named_feature_set,
)
from .reservoir import ReservoirSpec, build_reservoir, collect_state_features


def _as_windows(X, n_axes: int = 3) -> np.ndarray:
    """Coerce X to (n_windows, 3, T); accepts the flattened 2-D layout too."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 2:
        if X.shape[1] % n_axes != 0:
            raise ConfigurationError(
                f"flattened windows need {n_axes}*T columns, got {X.shape[1]}"
            )
        X = X.reshape(X.shape[0], n_axes, X.shape[1] // n_axes)
    if X.ndim != 3 or X.shape[1] != n_axes:
        raise ConfigurationError(
            f"expected (n_windows, {n_axes}, T) or (n_windows, {n_axes}*T), "
            f"got shape {X.shape}"
        )
    if not np.isfinite(X).all():
        raise ConfigurationError("windows contain NaN or Inf")
    return X


class DelayPolynomialFeatures(TransformerMixin, BaseEstimator):
    """Expand 3-axis windows into delay-embedded polynomial monomials.

    Parameters
    ----------
    families : iterable of str, or "all", default "all"
        Monomial families to enable (subset of lin, nls, nlq, nlcq, nlcs,
        nlt).  Ignored when ``feature_set`` is given.
    feature_set : int or None, default None
        Benchmark feature-set id 1..10 selecting a predefined family
        combination.
    weights : dict or None, default None
        Per-family block weights; missing families default to 1.0.
    include_bias : bool, default False
        Append a constant-1 feature.
    """

    def __init__(self, families="all", feature_set=None, weights=None, include_bias=False):
        self.families = families
        self.feature_set = feature_set
        self.weights = weights
        self.include_bias = include_bias

    def _config(self) -> FeatureConfig:
        if self.feature_set is not None:
            families = named_feature_set(self.feature_set)
        elif isinstance(self.families, str):
            if self.families != "all":
                families = [self.families]
            else:
                families = list(FeatureConfig().families)
        else:
            families = list(self.families)
        return FeatureConfig(
            families=families, weights=self.weights, include_bias=self.include_bias
        )

    def fit(self, X, y=None):
        X = _as_windows(X)
        config = self._config()
        self.config_ = config
        self.n_time_steps_ = X.shape[2]
        self.n_features_in_ = X.shape[1] * X.shape[2]
        self.n_features_out_ = config.feature_dimension(X.shape[2])
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "config_")
        X = _as_windows(X)
        if X.shape[2] != self.n_time_steps_:
            raise ConfigurationError(
                f"fitted on {self.n_time_steps_}-step windows, got {X.shape[2]}"
            )
        return build_feature_matrix(X, self.config_).values.T

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "config_")
        return np.asarray(feature_names(self.config_, self.n_time_steps_), dtype=object)


class RidgeReadoutClassifier(ClassifierMixin, BaseEstimator):
    """Multiclass classifier with a closed-form ridge-regressed linear readout.

    Fits one-hot targets by regularized least squares and predicts the
    argmax class; ties break toward the smallest class index.

    Parameters
    ----------
    alpha : float, default 1e-3
        Ridge regularization strength (lambda).
    """

    def __init__(self, alpha=1e-3):
        self.alpha = alpha

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2:
            raise ConfigurationError(f"X must be 2-D (n_samples, n_features), got {X.shape}")
        y = np.asarray(y)
        if y.shape != (X.shape[0],):
            raise ConfigurationError(
                f"y must have shape ({X.shape[0]},), got {y.shape}"
            )
        self.classes_, indices = np.unique(y, return_inverse=True)
        targets = readout.one_hot(indices + 1, len(self.classes_))
        self.model_ = readout.train_readout(
            X.T, targets, float(self.alpha),
            class_names=tuple(str(c) for c in self.classes_),
        )
        self.n_features_in_ = X.shape[1]
        return self

    def decision_function(self, X) -> np.ndarray:
        check_is_fitted(self, "model_")
        X = np.asarray(X, dtype=np.float64)
        scores = readout.predict_scores(self.model_, X.T).T
        return scores[:, 0] if scores.shape[1] == 1 else scores

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "model_")
        X = np.asarray(X, dtype=np.float64)
        indices = readout.classify(readout.predict_scores(self.model_, X.T))
        return self.classes_[indices - 1]


class EchoStateFeatures(TransformerMixin, BaseEstimator):
    """Map windows to reservoir state features (mean + final state, length 2n).

    ``fit`` draws the small-world reservoir deterministically from the
    parameters; ``transform`` runs each window through it.

    Parameters
    ----------
    n_nodes : int, default 100
        Reservoir size.
    k : int, default 4
        Ring-lattice degree parameter; every node starts with 2k neighbors.
    p_rewire : float, default 0.5
        Watts-Strogatz rewiring probability.
    spectral_radius : float, default 8.41
        Target spectral radius of the recurrent weight matrix.
    input_scale : float, default 1.0
        Input weights are uniform on [-input_scale, input_scale].
    leak_rate : float, default 1.0
        Leaky-integration rate in (0, 1].
    washout : int, default 8
        Initial steps excluded from the mean-state feature.
    seed : int, default 0
        Seed for graph generation and weight draws.
    """

    def __init__(self, n_nodes=100, k=4, p_rewire=0.5, spectral_radius=8.41,
                 input_scale=1.0, leak_rate=1.0, washout=8, seed=0):
        self.n_nodes = n_nodes
        self.k = k
        self.p_rewire = p_rewire
        self.spectral_radius = spectral_radius
        self.input_scale = input_scale
        self.leak_rate = leak_rate
        self.washout = washout
        self.seed = seed

    def fit(self, X, y=None):
        X = _as_windows(X)
        spec = ReservoirSpec(
            n_nodes=self.n_nodes,
            k=self.k,
            p_rewire=self.p_rewire,
            target_rho=self.spectral_radius,
            input_scale=self.input_scale,
            leak_rate=self.leak_rate,
            washout=self.washout,
            seed=self.seed,
        )
        self.reservoir_ = build_reservoir(spec)
        self.n_time_steps_ = X.shape[2]
        self.n_features_in_ = X.shape[1] * X.shape[2]
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "reservoir_")
        X = _as_windows(X)
        return collect_state_features(self.reservoir_, X).T
