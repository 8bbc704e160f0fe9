"""Shared fixtures: a synthetic corpus in the canonical layout, plus the
optional real corpus located through the NGRC_HAR_DATA environment variable.
"""

import os
from pathlib import Path

import numpy as np
import pytest

from ngrc_har.dataset import CLASS_NAMES, Dataset, Split, load_har_split, save_har_split

REAL_DATA_ENV = "NGRC_HAR_DATA"


def make_synthetic_windows(n_per_class: int, n_steps: int = 128, seed: int = 0):
    """Six separable activity-like classes of 3-axis waveforms.

    Classes differ in oscillation frequency and per-axis amplitude pattern,
    on top of a gravity-like offset and mild noise, so both linear and
    polynomial features carry signal.
    """
    rng = np.random.default_rng(seed)
    t = np.arange(n_steps) / n_steps
    samples, labels = [], []
    for label in range(1, 7):
        freq = 1.0 + 1.4 * label
        amps = 0.15 + 0.22 * np.array([
            (label + 0) % 3, (label + 1) % 3, (label + 2) % 3,
        ])
        offsets = np.array([0.18 * label - 0.6, -0.12 * label + 0.4, 1.0 + 0.05 * label])
        for _ in range(n_per_class):
            phase = rng.uniform(0.0, 2.0 * np.pi, size=3)
            jitter = 1.0 + rng.normal(0.0, 0.02)
            window = (
                offsets[:, None]
                + amps[:, None] * np.sin(2.0 * np.pi * freq * jitter * t[None, :] + phase[:, None])
                + 0.03 * rng.standard_normal((3, n_steps))
            )
            samples.append(window)
            labels.append(label)
    order = rng.permutation(len(samples))
    samples = np.stack(samples, axis=0)[order]
    labels = np.asarray(labels, dtype=np.int64)[order]
    return samples, labels


def make_synthetic_dataset(split: Split, n_per_class: int, seed: int) -> Dataset:
    samples, labels = make_synthetic_windows(n_per_class, seed=seed)
    return Dataset(samples=samples, labels=labels, split=split, class_names=CLASS_NAMES)


@pytest.fixture(scope="session")
def synth_root(tmp_path_factory) -> Path:
    """Synthetic corpus written in the canonical directory layout."""
    root = tmp_path_factory.mktemp("synth-har")
    save_har_split(make_synthetic_dataset(Split.TRAIN, n_per_class=15, seed=11), root)
    save_har_split(make_synthetic_dataset(Split.TEST, n_per_class=7, seed=22), root)
    return root


@pytest.fixture(scope="session")
def synth_train(synth_root) -> Dataset:
    return load_har_split(synth_root, Split.TRAIN)


@pytest.fixture(scope="session")
def synth_test(synth_root) -> Dataset:
    return load_har_split(synth_root, Split.TEST)


def real_data_root() -> Path | None:
    """Root of the canonical corpus, if the environment provides one."""
    root = os.environ.get(REAL_DATA_ENV)
    if not root:
        return None
    path = Path(root)
    probe = path / "train" / "Inertial Signals" / "total_acc_x_train.txt"
    return path if probe.is_file() else None


@pytest.fixture(scope="session")
def real_root() -> Path:
    root = real_data_root()
    if root is None:
        pytest.skip(
            f"canonical corpus not available; point {REAL_DATA_ENV} at the "
            "extracted 'UCI HAR Dataset' directory to run this test"
        )
    return root
