"""Delay-embedded polynomial features for 3-axis windows.

A window of T time steps on axes (x, y, z) expands into six named monomial
families.  With 1-based time index i and a_i one axis sample:

    lin   a_i                       linear delay terms            3*T
    nls   a_i * a_{i-1}             same-axis adjacent-lag        3*(T-1)
    nlq   a_i^2                     same-axis squares             3*T
    nlcq  x_i*y_i, y_i*z_i, x_i*z_i cross-axis, same time         3*T
    nlcs  a_i*b_{i-1}, a_{i-1}*b_i  cross-axis, one lag, both     6*(T-1)
                                    orderings per unordered pair
    nlt   x_i * y_i * z_i           triple product                T

For T = 128 the dimensions are (384, 381, 384, 384, 762, 128), 2423 in
total.  The total feature vector is the concatenation of the enabled
families in the fixed order above, each block scaled by its family weight,
optionally followed by a constant bias entry.

Canonical element order inside a block: outer loop over the family's axis
list (x, y, z) or axis-pair list ((x,y), (y,z), (x,z)), inner loop over the
time index descending from i = T (latest sample first).  For nlcs the two
orderings of a pair are emitted adjacently per time step.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from .dataset import Dataset, Window, stack_windows
from .exceptions import (
    ConfigurationError,
    DegenerateWindowError,
    EmptyConfigError,
    EmptyDatasetError,
    UnknownFeatureSetError,
    UnsupportedAxesError,
)


class FeatureFamily(str, Enum):
    LIN = "lin"
    NLS = "nls"
    NLQ = "nlq"
    NLCQ = "nlcq"
    NLCS = "nlcs"
    NLT = "nlt"


FAMILY_ORDER = (
    FeatureFamily.LIN,
    FeatureFamily.NLS,
    FeatureFamily.NLQ,
    FeatureFamily.NLCQ,
    FeatureFamily.NLCS,
    FeatureFamily.NLT,
)

# Unordered axis pairs for the cross families, in canonical order.
AXIS_PAIRS = ((0, 1), (1, 2), (0, 2))

# Polynomial degree per family (drives the homogeneity contract).
FAMILY_DEGREE = {
    FeatureFamily.LIN: 1,
    FeatureFamily.NLS: 2,
    FeatureFamily.NLQ: 2,
    FeatureFamily.NLCQ: 2,
    FeatureFamily.NLCS: 2,
    FeatureFamily.NLT: 3,
}

# Feature-set ids 1..10 used throughout the benchmark ablation.
NAMED_FEATURE_SETS: dict[int, tuple[FeatureFamily, ...]] = {
    1: (FeatureFamily.LIN, FeatureFamily.NLS, FeatureFamily.NLQ,
        FeatureFamily.NLCS, FeatureFamily.NLT),
    2: (FeatureFamily.LIN, FeatureFamily.NLS, FeatureFamily.NLQ,
        FeatureFamily.NLCS),
    3: (FeatureFamily.LIN, FeatureFamily.NLS, FeatureFamily.NLCQ),
    4: (FeatureFamily.LIN, FeatureFamily.NLCS),
    5: (FeatureFamily.LIN, FeatureFamily.NLS, FeatureFamily.NLQ,
        FeatureFamily.NLT),
    6: (FeatureFamily.LIN, FeatureFamily.NLS, FeatureFamily.NLQ),
    7: (FeatureFamily.LIN, FeatureFamily.NLS),
    8: (FeatureFamily.LIN,),
    9: (FeatureFamily.LIN, FeatureFamily.NLCQ),
    10: FAMILY_ORDER,
}


def named_feature_set(set_id: int) -> tuple[FeatureFamily, ...]:
    """Return the family tuple for benchmark feature set ``set_id`` (1..10)."""
    try:
        return NAMED_FEATURE_SETS[int(set_id)]
    except (KeyError, ValueError, TypeError):
        raise UnknownFeatureSetError(
            f"unknown feature set {set_id!r}; valid ids are 1..10"
        ) from None


def _check_window_shape(n_axes: int, n_steps: int) -> None:
    if n_axes != 3:
        raise UnsupportedAxesError(f"features are defined for 3 axes, got {n_axes}")
    if n_steps < 2:
        raise DegenerateWindowError(
            f"delay features need at least 2 time steps, got {n_steps}"
        )


def family_dimension(family: FeatureFamily, time_steps: int, n_axes: int = 3) -> int:
    """Number of monomials a family generates for a (n_axes, time_steps) window."""
    family = FeatureFamily(family)
    _check_window_shape(n_axes, time_steps)
    T = time_steps
    if family is FeatureFamily.LIN:
        return 3 * T
    if family is FeatureFamily.NLS:
        return 3 * (T - 1)
    if family is FeatureFamily.NLQ:
        return 3 * T
    if family is FeatureFamily.NLCQ:
        return 3 * T
    if family is FeatureFamily.NLCS:
        return 6 * (T - 1)
    return T  # NLT


def _family_block(latest_first: np.ndarray, family: FeatureFamily) -> np.ndarray:
    """Compute one family for a batch of windows.

    ``latest_first`` has shape (M, 3, T) with the time axis already reversed
    so index 0 is the latest sample.  Returns (M, family_dimension) in
    canonical element order.
    """
    R = latest_first
    M, _, T = R.shape
    if family is FeatureFamily.LIN:
        return R.reshape(M, 3 * T)
    if family is FeatureFamily.NLS:
        return (R[:, :, :-1] * R[:, :, 1:]).reshape(M, 3 * (T - 1))
    if family is FeatureFamily.NLQ:
        return (R * R).reshape(M, 3 * T)
    if family is FeatureFamily.NLCQ:
        return np.concatenate([R[:, a] * R[:, b] for a, b in AXIS_PAIRS], axis=1)
    if family is FeatureFamily.NLCS:
        blocks = []
        for a, b in AXIS_PAIRS:
            u, v = R[:, a], R[:, b]
            lead = u[:, :-1] * v[:, 1:]   # a_i * b_{i-1}
            lag = u[:, 1:] * v[:, :-1]    # a_{i-1} * b_i
            blocks.append(np.stack([lead, lag], axis=2).reshape(M, 2 * (T - 1)))
        return np.concatenate(blocks, axis=1)
    return R[:, 0] * R[:, 1] * R[:, 2]  # NLT


def gen_family(window: Window | np.ndarray, family: FeatureFamily) -> np.ndarray:
    """Generate one family's monomials for a single window, canonical order."""
    family = FeatureFamily(family)
    samples = window.samples if isinstance(window, Window) else np.asarray(window, dtype=np.float64)
    if samples.ndim != 2:
        raise UnsupportedAxesError(f"expected a (3, T) window, got shape {samples.shape}")
    _check_window_shape(samples.shape[0], samples.shape[1])
    return _family_block(samples[None, :, ::-1], family)[0]


def family_matrix(samples: np.ndarray, family: FeatureFamily) -> np.ndarray:
    """One family for every window of an (M, 3, T) batch, feature-major.

    Returns a (family_dimension, M) block; column j belongs to window j.
    """
    family = FeatureFamily(family)
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 3:
        raise UnsupportedAxesError(f"expected (M, 3, T) samples, got shape {samples.shape}")
    _check_window_shape(samples.shape[1], samples.shape[2])
    return np.ascontiguousarray(_family_block(samples[:, :, ::-1], family).T)


def _normalize_families(families: Iterable[FeatureFamily | str]) -> tuple[FeatureFamily, ...]:
    try:
        seen = {FeatureFamily(f) for f in families}
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from None
    return tuple(f for f in FAMILY_ORDER if f in seen)


@dataclass(frozen=True)
class FeatureConfig:
    """Which monomial families to build, their weights, and the readout λ.

    Family order in the concatenation is always the canonical one (lin, nls,
    nlq, nlcq, nlcs, nlt), skipping disabled families; the bias entry, if
    enabled, comes last.  Weights default to 1.0 (the uniform case) and
    scale whole blocks before the regression sees them.
    """

    families: tuple[FeatureFamily, ...] = FAMILY_ORDER
    weights: Mapping[FeatureFamily, float] = None  # type: ignore[assignment]
    ridge_lambda: float = 1e-3
    include_bias: bool = False

    def __post_init__(self):
        families = _normalize_families(self.families)
        if not families and not self.include_bias:
            raise EmptyConfigError("no feature families enabled and no bias")
        raw = dict(self.weights) if self.weights else {}
        weights = {}
        for key, value in raw.items():
            try:
                fam = FeatureFamily(key)
            except ValueError as exc:
                raise ConfigurationError(str(exc)) from None
            if fam not in families:
                raise ConfigurationError(
                    f"weight given for disabled family {fam.value!r}"
                )
            value = float(value)
            if not np.isfinite(value) or value < 0:
                raise ConfigurationError(
                    f"weight for {fam.value!r} must be finite and >= 0, got {value}"
                )
            weights[fam] = value
        for fam in families:
            weights.setdefault(fam, 1.0)
        lam = float(self.ridge_lambda)
        if not np.isfinite(lam) or lam < 0:
            raise ConfigurationError(f"ridge lambda must be finite and >= 0, got {lam}")
        object.__setattr__(self, "families", families)
        object.__setattr__(
            self, "weights",
            MappingProxyType({f: weights[f] for f in families}),
        )
        object.__setattr__(self, "ridge_lambda", lam)
        object.__setattr__(self, "include_bias", bool(self.include_bias))

    @classmethod
    def from_set_id(cls, set_id: int, **kwargs) -> "FeatureConfig":
        return cls(families=named_feature_set(set_id), **kwargs)

    def weight_of(self, family: FeatureFamily) -> float:
        return self.weights[FeatureFamily(family)]

    def feature_dimension(self, time_steps: int) -> int:
        total = sum(family_dimension(f, time_steps) for f in self.families)
        return total + (1 if self.include_bias else 0)

    def replace_lambda(self, ridge_lambda: float) -> "FeatureConfig":
        return FeatureConfig(
            families=self.families,
            weights=dict(self.weights),
            ridge_lambda=ridge_lambda,
            include_bias=self.include_bias,
        )


@dataclass(frozen=True)
class FeatureBlock:
    family: FeatureFamily
    offset: int
    length: int
    weight: float


@dataclass(frozen=True)
class FeatureMatrix:
    """Feature-major design matrix: column j is window j's feature vector."""

    values: np.ndarray
    blocks: tuple[FeatureBlock, ...]
    include_bias: bool

    @property
    def n_features(self) -> int:
        return self.values.shape[0]

    @property
    def sample_count(self) -> int:
        return self.values.shape[1]

    def layout_signature(self) -> tuple:
        """Hashable layout identity: families, offsets, lengths, weights, bias."""
        return (
            tuple((b.family.value, b.offset, b.length, b.weight) for b in self.blocks),
            self.include_bias,
        )

    def block_values(self, family: FeatureFamily) -> np.ndarray:
        family = FeatureFamily(family)
        for b in self.blocks:
            if b.family is family:
                return self.values[b.offset : b.offset + b.length]
        raise ConfigurationError(f"family {family.value!r} not in this matrix")


def assemble_feature_matrix(
    family_blocks: Mapping[FeatureFamily, np.ndarray],
    config: FeatureConfig,
    n_samples: int | None = None,
) -> FeatureMatrix:
    """Stack precomputed per-family blocks into one weighted FeatureMatrix.

    ``family_blocks`` maps each enabled family to its (dim, M) block as
    produced by :func:`family_matrix`.  Blocks stay unmodified; weights are
    applied on the copy.  ``n_samples`` is only needed for bias-only
    configurations, where no block pins the sample count.
    """
    if not config.families and not config.include_bias:
        raise EmptyConfigError("no feature families enabled and no bias")
    sizes = {family_blocks[f].shape[1] for f in config.families}
    if n_samples is not None:
        sizes.add(int(n_samples))
    if len(sizes) > 1:
        raise ConfigurationError(f"family blocks disagree on sample count: {sizes}")
    M = sizes.pop() if sizes else 0
    blocks = []
    offset = 0
    for f in config.families:
        block = family_blocks[f]
        blocks.append(FeatureBlock(f, offset, block.shape[0], config.weights[f]))
        offset += block.shape[0]
    n_features = offset + (1 if config.include_bias else 0)
    values = np.empty((n_features, M), dtype=np.float64)
    for b in blocks:
        block = family_blocks[b.family]
        out = values[b.offset : b.offset + b.length]
        if b.weight != 1.0:
            np.multiply(block, b.weight, out=out)
        else:
            np.copyto(out, block)
    if config.include_bias:
        values[-1] = 1.0
    return FeatureMatrix(values=values, blocks=tuple(blocks), include_bias=config.include_bias)


def build_feature_matrix(
    data: Dataset | Sequence[Window] | np.ndarray,
    config: FeatureConfig,
) -> FeatureMatrix:
    """Build the total feature matrix for a dataset (columns in dataset order)."""
    if isinstance(data, Dataset):
        samples = data.samples
    elif isinstance(data, np.ndarray):
        samples = data
    else:
        samples, _ = stack_windows(data)
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 3:
        raise ConfigurationError(f"expected (M, 3, T) samples, got shape {samples.shape}")
    if samples.shape[0] == 0:
        raise EmptyDatasetError("cannot build features for an empty dataset")
    family_blocks = {f: family_matrix(samples, f) for f in config.families}
    return assemble_feature_matrix(family_blocks, config, n_samples=samples.shape[0])


def build_feature_vector(window: Window | np.ndarray, config: FeatureConfig) -> np.ndarray:
    """Total feature vector of a single window (weighted blocks + optional bias)."""
    samples = window.samples if isinstance(window, Window) else np.asarray(window, dtype=np.float64)
    if samples.ndim != 2:
        raise ConfigurationError(f"expected a (3, T) window, got shape {samples.shape}")
    return build_feature_matrix(samples[None], config).values[:, 0]


def feature_names(config: FeatureConfig, time_steps: int) -> list[str]:
    """Human-readable monomial names matching the canonical element order."""
    axes = ("x", "y", "z")
    names: list[str] = []
    for f in config.families:
        T = time_steps
        if f in (FeatureFamily.LIN, FeatureFamily.NLQ):
            power = "" if f is FeatureFamily.LIN else "^2"
            names += [f"{a}[{i}]{power}" for a in axes for i in range(T, 0, -1)]
        elif f is FeatureFamily.NLS:
            names += [f"{a}[{i}]*{a}[{i - 1}]" for a in axes for i in range(T, 1, -1)]
        elif f is FeatureFamily.NLCQ:
            names += [
                f"{axes[a]}[{i}]*{axes[b]}[{i}]"
                for a, b in AXIS_PAIRS
                for i in range(T, 0, -1)
            ]
        elif f is FeatureFamily.NLCS:
            for a, b in AXIS_PAIRS:
                for i in range(T, 1, -1):
                    names.append(f"{axes[a]}[{i}]*{axes[b]}[{i - 1}]")
                    names.append(f"{axes[a]}[{i - 1}]*{axes[b]}[{i}]")
        else:
            names += [f"x[{i}]*y[{i}]*z[{i}]" for i in range(T, 0, -1)]
    if config.include_bias:
        names.append("bias")
    return names


def dump_feature_matrix(fm: FeatureMatrix, path, fmt: str = "csv") -> None:
    """Debug dump of a feature matrix, row-major, with the layout in a header.

    ``csv`` writes '#'-prefixed header lines then one row per feature;
    ``npy`` writes the raw array next to a ``.layout.txt`` header file.
    """
    header_lines = [
        "feature matrix dump (rows = features, columns = windows)",
        f"shape: {fm.n_features} x {fm.sample_count}",
        "layout: " + "; ".join(
            f"{b.family.value}:offset={b.offset},length={b.length},weight={b.weight!r}"
            for b in fm.blocks
        ),
        f"bias: {fm.include_bias}",
    ]
    path = str(path)
    if fmt == "csv":
        np.savetxt(path, fm.values, fmt="%.17e", delimiter=",",
                   header="\n".join(header_lines))
    elif fmt == "npy":
        np.save(path, fm.values)
        with open(path + ".layout.txt", "w") as fh:
            fh.write("\n".join(header_lines) + "\n")
    else:
        raise ConfigurationError(f"unknown dump format {fmt!r} (use 'csv' or 'npy')")
