"""Exception hierarchy.

Three top-level buckets map onto the CLI's exit codes: configuration
errors (exit 1), data errors (exit 2), numerical failures (exit 3).
"""


class NgrcHarError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(NgrcHarError, ValueError):
    """Invalid parameters, options, or incompatible call arguments."""


class DataError(NgrcHarError, ValueError):
    """Problems with dataset files or label/window contents."""


class NumericalError(NgrcHarError, ArithmeticError):
    """Failures of the numerical machinery (singular systems, divergence)."""


# -- dataset ingestion ------------------------------------------------------

class MissingFileError(DataError):
    """A required dataset file does not exist."""


class RowCountMismatchError(DataError):
    """Axis files and/or the label file disagree on the window count."""


class MalformedRowError(DataError):
    """A signal row does not parse to the expected number of finite values."""


class BadLabelError(DataError):
    """A label is not an integer in the valid class range."""


class EmptyDatasetError(DataError):
    """An operation that needs at least one window received none."""


class HeterogeneousWindowsError(DataError):
    """Windows in one collection disagree on length or axis count."""


# -- feature generation -----------------------------------------------------

class UnsupportedAxesError(ConfigurationError):
    """Feature generation is only defined for 3-axis windows."""


class DegenerateWindowError(ConfigurationError):
    """Window is too short for delay features (fewer than 2 time steps)."""


class EmptyConfigError(ConfigurationError):
    """Feature configuration enables no families and no bias."""


class UnknownFeatureSetError(ConfigurationError):
    """Named feature-set id outside 1..10."""


class MissingWeightError(ConfigurationError):
    """A weighted run did not supply a weight for every enabled family."""


# -- readout ----------------------------------------------------------------

class LabelOutOfRangeError(DataError):
    """A class label falls outside 1..n_classes."""


class DimensionMismatchError(ConfigurationError):
    """Matrix shapes are incompatible for the requested operation."""


class LayoutMismatchError(ConfigurationError):
    """Feature layout (families/weights/bias) differs from the model's."""


class LengthMismatchError(ConfigurationError):
    """Paired label sequences have different lengths."""


class EmptyMatrixError(ConfigurationError):
    """A metric was requested on an empty confusion matrix."""


class SingularSystemError(NumericalError):
    """Unregularized Gram matrix is rank-deficient beyond solver tolerance."""


class NonFiniteInputError(NumericalError):
    """NaN or Inf encountered in a numerical input."""


class NonFiniteScoresError(NumericalError):
    """NaN or Inf encountered in classifier scores."""


# -- reservoir baseline -----------------------------------------------------

class InvalidDegreeError(ConfigurationError):
    """Ring-lattice degree parameter k violates 2k < n."""


class InvalidProbabilityError(ConfigurationError):
    """Rewiring probability outside [0, 1]."""


class NonConvergenceError(NumericalError):
    """Spectral-radius iteration hit its cap; carries the best estimate."""

    def __init__(self, message, best_estimate=None):
        super().__init__(message)
        self.best_estimate = best_estimate


class ZeroSpectralRadiusError(NumericalError):
    """Random reservoir draw produced a (numerically) nilpotent matrix."""


class NonFiniteStateError(NumericalError):
    """Reservoir state diverged; carries the offending 1-based time step."""

    def __init__(self, message, time_step=None):
        super().__init__(message)
        self.time_step = time_step
