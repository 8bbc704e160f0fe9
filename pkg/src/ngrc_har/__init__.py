"""Reservoir computing without the reservoir: delay-embedded polynomial
features with a ridge readout for multiclass time-series classification,
plus a conventional small-world echo-state-network baseline and a benchmark
CLI for the six-activity smartphone-accelerometer task.
"""

__version__ = "0.1.0"

from .dataset import (
    CLASS_NAMES,
    Dataset,
    DatasetDigest,
    Split,
    Window,
    dataset_digest,
    load_har_split,
    save_har_split,
)
from .exceptions import (
    ConfigurationError,
    DataError,
    NgrcHarError,
    NumericalError,
)
from .features import (
    FAMILY_ORDER,
    FeatureConfig,
    FeatureFamily,
    FeatureMatrix,
    build_feature_matrix,
    build_feature_vector,
    family_dimension,
    gen_family,
    named_feature_set,
)
from .metrics import ConfusionMatrix, accuracy, confusion
from .readout import (
    ReadoutModel,
    classify,
    one_hot,
    predict_scores,
    train_readout,
)
from .reservoir import (
    Reservoir,
    ReservoirSpec,
    build_reservoir,
    build_small_world,
    collect_state_features,
    node_sweep,
    run_reservoir,
    spectral_radius,
)
from .estimators import (
    DelayPolynomialFeatures,
    EchoStateFeatures,
    RidgeReadoutClassifier,
)

__all__ = [
    "__version__",
    "CLASS_NAMES",
    "ConfigurationError",
    "ConfusionMatrix",
    "DataError",
    "Dataset",
    "DatasetDigest",
    "DelayPolynomialFeatures",
    "EchoStateFeatures",
    "FAMILY_ORDER",
    "FeatureConfig",
    "FeatureFamily",
    "FeatureMatrix",
    "NgrcHarError",
    "NumericalError",
    "ReadoutModel",
    "Reservoir",
    "ReservoirSpec",
    "RidgeReadoutClassifier",
    "Split",
    "Window",
    "accuracy",
    "build_feature_matrix",
    "build_feature_vector",
    "build_reservoir",
    "build_small_world",
    "classify",
    "collect_state_features",
    "confusion",
    "dataset_digest",
    "family_dimension",
    "gen_family",
    "load_har_split",
    "named_feature_set",
    "node_sweep",
    "one_hot",
    "predict_scores",
    "run_reservoir",
    "save_har_split",
    "spectral_radius",
    "train_readout",
]
