"""Multiclass evaluation: confusion matrices and accuracy."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import EmptyMatrixError, LabelOutOfRangeError, LengthMismatchError


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts with rows = true class, columns = predicted class (1-based)."""

    counts: np.ndarray
    class_names: tuple[str, ...]

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        s = len(self.class_names)
        if counts.shape != (s, s):
            raise LengthMismatchError(
                f"counts shape {counts.shape} does not match {s} class names"
            )
        if counts.size and counts.min() < 0:
            raise LabelOutOfRangeError("confusion counts must be nonnegative")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "class_names", tuple(self.class_names))

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def normalized(self) -> np.ndarray:
        """Row-normalized fractions; all-zero rows stay zero."""
        row_sums = self.counts.sum(axis=1, keepdims=True)
        with np.errstate(invalid="ignore"):
            out = np.where(row_sums > 0, self.counts / np.maximum(row_sums, 1), 0.0)
        return out

    def to_dict(self) -> dict:
        return {
            "class_names": list(self.class_names),
            "counts": self.counts.tolist(),
            "row_normalized": self.normalized().round(4).tolist(),
        }

    def to_text(self) -> str:
        """Aligned counts table, rows = true class, numbered predicted columns."""
        names = self.class_names
        width = max(max(len(n) for n in names) + 4, 12)
        cell = max(6, max(len(str(v)) for v in self.counts.ravel()) + 1)
        corner = "true / predicted"
        header = f"{corner:<{width}}" + "".join(
            f"{j + 1:>{cell}}" for j in range(len(names))
        ) + "   recall"
        lines = [header]
        norm = self.normalized()
        for i, name in enumerate(names):
            row = "".join(f"{v:>{cell}}" for v in self.counts[i])
            lines.append(f"[{i + 1}] {name:<{width - 4}}{row}   {100 * norm[i, i]:5.1f}%")
        return "\n".join(lines)


def confusion(
    true_labels,
    predicted_labels,
    n_classes: int,
    class_names: tuple[str, ...] | None = None,
) -> ConfusionMatrix:
    """Count (true, predicted) label pairs into an S x S matrix."""
    true_labels = np.asarray(true_labels, dtype=np.int64)
    predicted_labels = np.asarray(predicted_labels, dtype=np.int64)
    if true_labels.shape != predicted_labels.shape or true_labels.ndim != 1:
        raise LengthMismatchError(
            f"label sequences must be 1-D and equal length, got "
            f"{true_labels.shape} and {predicted_labels.shape}"
        )
    for name, labels in (("true", true_labels), ("predicted", predicted_labels)):
        if labels.size and (labels.min() < 1 or labels.max() > n_classes):
            bad = labels[(labels < 1) | (labels > n_classes)][0]
            raise LabelOutOfRangeError(f"{name} label {bad} outside 1..{n_classes}")
    if class_names is None:
        class_names = tuple(f"class-{s}" for s in range(1, n_classes + 1))
    if len(class_names) != n_classes:
        raise LengthMismatchError(
            f"{len(class_names)} class names for {n_classes} classes"
        )
    flat = (true_labels - 1) * n_classes + (predicted_labels - 1)
    counts = np.bincount(flat, minlength=n_classes * n_classes).reshape(n_classes, n_classes)
    return ConfusionMatrix(counts=counts, class_names=class_names)


def accuracy(cm: ConfusionMatrix) -> float:
    """Overall accuracy: trace over total count."""
    total = cm.total
    if total == 0:
        raise EmptyMatrixError("accuracy of an empty confusion matrix is undefined")
    return float(np.trace(cm.counts)) / total
