"""Loading the UCI HAR smartphone corpus into labeled 3-axis windows.

The corpus ships raw inertial signals as plain-text matrices: one row per
window, 128 whitespace-separated samples per row, one file per axis, plus a
label file with one integer per line:

    <root>/train/Inertial Signals/total_acc_x_train.txt
    <root>/train/Inertial Signals/total_acc_y_train.txt
    <root>/train/Inertial Signals/total_acc_z_train.txt
    <root>/train/y_train.txt

and the same under ``test/``.  The canonical distribution holds 7352
training and 2947 test windows over six activity classes.  Only the
``total_acc`` channels (raw accelerometer including gravity) are read here;
no filtering or normalization happens at ingestion.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterator

import numpy as np

from .exceptions import (
    BadLabelError,
    DataError,
    EmptyDatasetError,
    HeterogeneousWindowsError,
    MalformedRowError,
    MissingFileError,
    RowCountMismatchError,
)

AXES = ("x", "y", "z")
N_AXES = 3
WINDOW_LEN = 128
N_CLASSES = 6
CLASS_NAMES = (
    "walking",
    "walking-upstairs",
    "walking-downstairs",
    "sitting",
    "standing",
    "laying",
)
CANONICAL_SPLIT_SIZES = {"train": 7352, "test": 2947}


class Split(str, Enum):
    TRAIN = "train"
    TEST = "test"


@dataclass(frozen=True)
class Window:
    """One labeled sample: 3 axes of acceleration plus a class in 1..6."""

    samples: np.ndarray
    label: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 2 or samples.shape[0] != N_AXES:
            raise DataError(
                f"window samples must have shape (3, T), got {samples.shape}"
            )
        if samples.shape[1] < 1:
            raise DataError("window must contain at least one time step")
        if not np.isfinite(samples).all():
            raise DataError("window samples contain NaN or Inf")
        if not (1 <= int(self.label) <= N_CLASSES):
            raise BadLabelError(
                f"label must be in 1..{N_CLASSES}, got {self.label}"
            )
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "label", int(self.label))

    @property
    def n_steps(self) -> int:
        return self.samples.shape[1]


@dataclass(frozen=True)
class Dataset:
    """An ordered collection of equally long windows from one split.

    Samples are stored as one (n_windows, 3, T) array; ``dataset[i]`` gives
    the i-th :class:`Window` view.
    """

    samples: np.ndarray
    labels: np.ndarray
    split: Split
    class_names: tuple[str, ...] = CLASS_NAMES

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        if samples.ndim != 3 or samples.shape[1] != N_AXES:
            raise DataError(
                f"dataset samples must have shape (M, 3, T), got {samples.shape}"
            )
        if labels.ndim != 1 or labels.shape[0] != samples.shape[0]:
            raise RowCountMismatchError(
                f"{labels.shape[0]} labels for {samples.shape[0]} windows"
            )
        if samples.size and not np.isfinite(samples).all():
            raise DataError("dataset samples contain NaN or Inf")
        if labels.size and not ((labels >= 1) & (labels <= len(self.class_names))).all():
            bad = labels[(labels < 1) | (labels > len(self.class_names))][0]
            raise BadLabelError(f"label {bad} outside 1..{len(self.class_names)}")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "split", Split(self.split))
        object.__setattr__(self, "class_names", tuple(self.class_names))

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def n_windows(self) -> int:
        return len(self)

    @property
    def window_len(self) -> int:
        return self.samples.shape[2]

    def __getitem__(self, i: int) -> Window:
        return Window(self.samples[i], int(self.labels[i]))

    def __iter__(self) -> Iterator[Window]:
        for i in range(len(self)):
            yield self[i]

    @property
    def windows(self) -> tuple[Window, ...]:
        return tuple(self)


def _signal_path(root: Path, split: Split, axis: str) -> Path:
    return root / split.value / "Inertial Signals" / f"total_acc_{axis}_{split.value}.txt"


def _label_path(root: Path, split: Split) -> Path:
    return root / split.value / f"y_{split.value}.txt"


def _read_signal_file(path: Path) -> np.ndarray:
    """Parse one inertial-signal file into an (M, 128) float array.

    Accepts fixed-point and scientific notation, runs of spaces/tabs, and
    leading whitespace.  Any row that does not yield exactly 128 finite
    numbers is reported with its 1-based index.
    """
    if not path.is_file():
        raise MissingFileError(f"missing signal file: {path}")
    text = path.read_text()
    try:
        values = np.loadtxt(io.StringIO(text), dtype=np.float64, ndmin=2)
    except ValueError:
        # Re-parse line by line to pinpoint the offending row.
        for i, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                row = np.array([float(tok) for tok in line.split()])
            except ValueError as exc:
                raise MalformedRowError(f"{path}, row {i}: {exc}") from None
            if row.size != WINDOW_LEN:
                raise MalformedRowError(
                    f"{path}, row {i}: expected {WINDOW_LEN} values, got {row.size}"
                )
        raise MalformedRowError(f"{path}: inconsistent row lengths")
    if values.size == 0:
        return values.reshape(0, WINDOW_LEN)
    if values.shape[1] != WINDOW_LEN:
        raise MalformedRowError(
            f"{path}: expected {WINDOW_LEN} values per row, got {values.shape[1]}"
        )
    finite = np.isfinite(values).all(axis=1)
    if not finite.all():
        bad = int(np.flatnonzero(~finite)[0]) + 1
        raise MalformedRowError(f"{path}, row {bad}: non-finite value")
    return values


def _read_label_file(path: Path) -> np.ndarray:
    if not path.is_file():
        raise MissingFileError(f"missing label file: {path}")
    labels = []
    with path.open() as fh:
        for i, line in enumerate(fh, start=1):
            tok = line.strip()
            if not tok:
                continue
            try:
                label = int(tok)
            except ValueError:
                raise BadLabelError(f"{path}, line {i}: not an integer: {tok!r}") from None
            if not 1 <= label <= N_CLASSES:
                raise BadLabelError(
                    f"{path}, line {i}: label {label} outside 1..{N_CLASSES}"
                )
            labels.append(label)
    return np.asarray(labels, dtype=np.int64)


def load_har_split(dataset_root: str | Path, split: Split | str) -> Dataset:
    """Load one split of the corpus from its canonical directory layout.

    Row k of the x/y/z signal files populates the axes of window k and the
    label comes from line k of the label file; window order is preserved.
    Loading is deterministic and purely functional.
    """
    root = Path(dataset_root)
    split = Split(split)
    per_axis = [_read_signal_file(_signal_path(root, split, axis)) for axis in AXES]
    labels = _read_label_file(_label_path(root, split))
    counts = {f"total_acc_{axis}": arr.shape[0] for axis, arr in zip(AXES, per_axis)}
    counts["labels"] = labels.shape[0]
    if len(set(counts.values())) != 1:
        raise RowCountMismatchError(f"window counts disagree: {counts}")
    samples = np.stack(per_axis, axis=1)  # (M, 3, 128)
    return Dataset(samples=samples, labels=labels, split=split)


def save_har_split(dataset: Dataset, dataset_root: str | Path) -> None:
    """Write a dataset back out in the canonical directory layout.

    Values are written with 18 significant digits so that a save/load round
    trip is value-exact for float64.
    """
    root = Path(dataset_root)
    split = dataset.split
    signal_dir = root / split.value / "Inertial Signals"
    signal_dir.mkdir(parents=True, exist_ok=True)
    for a, axis in enumerate(AXES):
        np.savetxt(_signal_path(root, split, axis), dataset.samples[:, a, :], fmt="%.17e")
    np.savetxt(_label_path(root, split), dataset.labels[:, None], fmt="%d")


@dataclass(frozen=True)
class DatasetDigest:
    """Ingestion sanity summary: class coverage and per-axis statistics."""

    split: str
    n_windows: int
    window_len: int
    class_counts: dict[str, int]
    axis_min: dict[str, float]
    axis_max: dict[str, float]
    axis_mean: dict[str, float]
    magnitude_stats: dict[str, float] | None = None

    def to_dict(self) -> dict:
        out = {
            "split": self.split,
            "n_windows": self.n_windows,
            "window_len": self.window_len,
            "class_counts": dict(self.class_counts),
            "axis_min": dict(self.axis_min),
            "axis_max": dict(self.axis_max),
            "axis_mean": dict(self.axis_mean),
        }
        if self.magnitude_stats is not None:
            out["magnitude_stats"] = dict(self.magnitude_stats)
        return out

    def to_text(self) -> str:
        lines = [
            f"split: {self.split}   windows: {self.n_windows}   "
            f"window length: {self.window_len}",
            "class counts:",
        ]
        width = max(len(name) for name in self.class_counts)
        for name, count in self.class_counts.items():
            lines.append(f"  {name:<{width}}  {count}")
        lines.append("per-axis statistics:")
        for axis in AXES:
            lines.append(
                f"  {axis}: min={self.axis_min[axis]:+.6f}  "
                f"max={self.axis_max[axis]:+.6f}  mean={self.axis_mean[axis]:+.6f}"
            )
        if self.magnitude_stats is not None:
            m = self.magnitude_stats
            lines.append(
                f"  |r| (L2): min={m['min']:+.6f}  max={m['max']:+.6f}  "
                f"mean={m['mean']:+.6f}"
            )
        return "\n".join(lines)


def dataset_digest(dataset: Dataset, include_magnitude: bool = False) -> DatasetDigest:
    """Summarize a dataset: per-class counts plus global per-axis min/max/mean.

    ``include_magnitude`` adds statistics of the per-sample Euclidean norm
    across the three axes.  The magnitude is a diagnostic only; it never
    enters feature generation.
    """
    if len(dataset) == 0:
        raise EmptyDatasetError("cannot digest an empty dataset")
    counts = np.bincount(dataset.labels, minlength=len(dataset.class_names) + 1)[1:]
    class_counts = {
        name: int(count) for name, count in zip(dataset.class_names, counts)
    }
    axis_min, axis_max, axis_mean = {}, {}, {}
    for a, axis in enumerate(AXES):
        values = dataset.samples[:, a, :]
        axis_min[axis] = float(values.min())
        axis_max[axis] = float(values.max())
        axis_mean[axis] = float(values.mean())
    magnitude_stats = None
    if include_magnitude:
        mag = np.linalg.norm(dataset.samples, axis=1)
        magnitude_stats = {
            "min": float(mag.min()),
            "max": float(mag.max()),
            "mean": float(mag.mean()),
        }
    return DatasetDigest(
        split=dataset.split.value,
        n_windows=len(dataset),
        window_len=dataset.window_len,
        class_counts=class_counts,
        axis_min=axis_min,
        axis_max=axis_max,
        axis_mean=axis_mean,
        magnitude_stats=magnitude_stats,
    )


def stack_windows(windows) -> tuple[np.ndarray, np.ndarray]:
    """Stack an iterable of :class:`Window` into (M, 3, T) samples + labels.

    Raises if the windows disagree on length or axis count.
    """
    windows = list(windows)
    if not windows:
        raise EmptyDatasetError("no windows supplied")
    shapes = {w.samples.shape for w in windows}
    if len(shapes) != 1:
        raise HeterogeneousWindowsError(f"mixed window shapes: {sorted(shapes)}")
    samples = np.stack([w.samples for w in windows], axis=0)
    labels = np.asarray([w.label for w in windows], dtype=np.int64)
    return samples, labels
