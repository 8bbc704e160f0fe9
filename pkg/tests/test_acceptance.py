"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines.  Criteria 3, 4, 5, and 8 assert published-benchmark accuracies and
need the canonical corpus: point the NGRC_HAR_DATA environment variable at
the extracted "UCI HAR Dataset" directory (the one containing ``train/``
and ``test/``).  Without it they skip with that instruction; everything
else runs on synthetic or random inputs.
"""

import time

import numpy as np
import pytest

from ngrc_har.dataset import Split, load_har_split
from ngrc_har.experiments import (
    ExperimentConfig,
    run_ablation,
    run_esn_sweep,
    run_ngrc,
    run_weighted,
)
from ngrc_har.features import (
    FAMILY_ORDER,
    FeatureConfig,
    FeatureFamily,
    build_feature_matrix,
    family_dimension,
    gen_family,
    named_feature_set,
)
from ngrc_har.metrics import confusion
from ngrc_har.readout import classify, one_hot, predict_scores, train_readout
from ngrc_har.reservoir import ReservoirSpec, build_reservoir, build_small_world, spectral_radius

from conftest import real_data_root


def report_line(criterion: int, message: str, started: float) -> None:
    print(f"[PASS] criterion {criterion}: {message} ({time.perf_counter() - started:.1f}s)")


@pytest.fixture(scope="module")
def real_ablation(real_root):
    """Shared by criteria 3 and 4: the full uniform-weight ablation."""
    return run_ablation(ExperimentConfig(dataset_root=real_root, mode="ablate"))


def test_criterion_1_feature_dimension_exactness():
    t0 = time.perf_counter()
    dims = tuple(family_dimension(f, 128) for f in FAMILY_ORDER)
    assert dims == (384, 381, 384, 384, 762, 128)
    assert sum(dims) == 2423
    set1 = sum(family_dimension(f, 128) for f in named_feature_set(1))
    assert set1 == 2039
    report_line(1, f"family dimensions {dims}, totals 2423 / 2039 exact", t0)


def test_criterion_2_ridge_oracle_equivalence():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    lambdas = (0.0, 0.1, 10.0)
    worst = 0.0
    for i in range(50):
        lam = lambdas[i % 3]
        n = int(rng.integers(2, 11))
        m = int(rng.integers(n + 2, 21))
        s = int(rng.integers(2, 5))
        O = rng.normal(size=(n, m))
        Y = one_hot(rng.integers(1, s + 1, size=m), s)
        # independent oracle: explicit normal equations, LU solve per row
        system = O @ O.T + lam * np.eye(n)
        cross = Y @ O.T
        expected = np.stack(
            [np.linalg.solve(system, cross[row]) for row in range(s)], axis=0
        )
        got = train_readout(O, Y, lam).w_out
        rel = np.linalg.norm(got - expected) / max(np.linalg.norm(expected), 1e-300)
        worst = max(worst, rel)
        assert rel < 1e-8
    report_line(2, f"50 instances, worst relative error {worst:.2e} < 1e-8", t0)


def test_criterion_3_best_uniform_accuracy(real_ablation):
    t0 = time.perf_counter()
    best = max(r.accuracy for r in real_ablation)
    best_set = max(real_ablation, key=lambda r: r.accuracy).extra["feature_set"]
    assert best >= 0.724
    report_line(
        3,
        f"best uniform accuracy {100 * best:.2f}% (set #{best_set}) >= 72.4%",
        t0,
    )


def test_criterion_4_ablation_ordering(real_ablation):
    t0 = time.perf_counter()
    by_set = {r.extra["feature_set"]: r.accuracy for r in real_ablation}
    best = max(by_set.values())
    assert by_set[10] < by_set[8] < best
    assert abs(by_set[8] - 0.504) <= 0.03
    assert abs(by_set[10] - 0.223) <= 0.05
    report_line(
        4,
        f"#10 {100 * by_set[10]:.1f}% < #8 {100 * by_set[8]:.1f}% < best "
        f"{100 * best:.1f}%; #8 within 50.4+/-3pp, #10 within 22.3+/-5pp",
        t0,
    )


def test_criterion_5_weighted_improvement(real_root):
    t0 = time.perf_counter()
    uniform = run_ngrc(
        ExperimentConfig(dataset_root=real_root, mode="ngrc", feature_set=1)
    )
    weighted = run_weighted(
        ExperimentConfig(dataset_root=real_root, mode="weighted")
    )
    assert weighted.accuracy >= uniform.accuracy - 0.003
    assert abs(weighted.accuracy - 0.754) <= 0.02
    report_line(
        5,
        f"weighted {100 * weighted.accuracy:.2f}% vs uniform "
        f"{100 * uniform.accuracy:.2f}% on set #1; within 75.4+/-2pp",
        t0,
    )


def test_criterion_6_argmax_invariance_under_rescaling(synth_root):
    t0 = time.perf_counter()
    root = real_data_root()
    source = "canonical corpus" if root is not None else "synthetic corpus"
    if root is None:
        root = synth_root
    train = load_har_split(root, Split.TRAIN)
    test = load_har_split(root, Split.TEST)
    rng = np.random.default_rng(7)
    n_sub = min(200, len(test))
    subsample = rng.choice(len(test), size=n_sub, replace=False)
    families = named_feature_set(1)
    c = 7.0
    lam = 1e-3
    base_cfg = FeatureConfig(families=families)
    scaled_cfg = FeatureConfig(families=families, weights={f: c for f in families})
    targets = one_hot(train.labels, len(train.class_names))
    base_model = train_readout(build_feature_matrix(train, base_cfg), targets, lam)
    scaled_model = train_readout(
        build_feature_matrix(train, scaled_cfg), targets, lam * c * c
    )
    test_samples = test.samples[subsample]
    base_pred = classify(
        predict_scores(base_model, build_feature_matrix(test_samples, base_cfg))
    )
    scaled_pred = classify(
        predict_scores(scaled_model, build_feature_matrix(test_samples, scaled_cfg))
    )
    assert base_pred.tolist() == scaled_pred.tolist()
    report_line(
        6,
        f"weights x7 with lambda x49: {n_sub}-window decisions identical ({source})",
        t0,
    )


def test_criterion_7_small_world_and_spectral_contracts():
    t0 = time.perf_counter()
    # p = 0: the exact 2k-ring lattice
    for n, k in ((10, 2), (13, 3)):
        adj = build_small_world(n, k, 0.0, seed=1).toarray()
        expected = np.zeros_like(adj)
        for u in range(n):
            for j in range(1, k + 1):
                expected[u, (u + j) % n] = 1
                expected[u, (u - j) % n] = 1
        assert (adj == expected).all()
    # undirected edge count preserved on 20 random draws
    rng = np.random.default_rng(77)
    for _ in range(20):
        n = int(rng.integers(12, 300))
        k = int(rng.integers(1, min(6, (n - 1) // 2)))
        p = float(rng.uniform(0.0, 1.0))
        adj = build_small_world(n, k, p, int(rng.integers(0, 2**31)))
        assert adj.nnz == 2 * n * k
    # rescaling contract at both targets
    for target in (1.0, 8.41):
        res = build_reservoir(ReservoirSpec(n_nodes=200, target_rho=target, seed=3))
        rho = spectral_radius(res.w_res)
        assert abs(rho - target) / target <= 1e-6
    # power iteration vs dense eigensolver oracle
    worst = 0.0
    for seed in range(20):
        matrix = np.random.default_rng(seed).normal(size=(50, 50))
        oracle = float(np.max(np.abs(np.linalg.eigvals(matrix))))
        got = spectral_radius(matrix)
        worst = max(worst, abs(got - oracle) / oracle)
        assert abs(got - oracle) / oracle < 1e-8
    report_line(
        7,
        f"ring lattice exact, edge counts exact, rho targets within 1e-6, "
        f"radius vs oracle worst {worst:.2e}",
        t0,
    )


def test_criterion_8_esn_comparability(real_root, real_ablation):
    t0 = time.perf_counter()
    best_ngrc = max(r.accuracy for r in real_ablation)
    base = dict(dataset_root=real_root, mode="esn-sweep",
                k=4, p_rewire=0.5, target_rho=8.41, seeds=(0, 1, 2))
    primary = run_esn_sweep(ExperimentConfig(node_counts=(1000, 1200), **base))
    near = max(r.accuracy for r in primary)
    if abs(near - best_ngrc) <= 0.05 or near >= best_ngrc:
        report_line(
            8,
            f"ESN mean accuracy {100 * near:.2f}% at n in (1000, 1200) within "
            f"5pp of NG-RC best {100 * best_ngrc:.2f}%",
            t0,
        )
        return
    # Soft fallback: demonstrate a rising accuracy-vs-nodes trend and echo
    # the hyperparameters that were tried.
    low = run_esn_sweep(ExperimentConfig(node_counts=(200, 400, 800), **base))
    curve = [(r.extra["n_nodes"], r.accuracy) for r in low + primary]
    curve.sort()
    accs = [acc for _, acc in curve]
    assert accs[-1] > accs[0], f"accuracy-vs-nodes trend is not increasing: {curve}"
    assert all(b - a >= -0.02 for a, b in zip(accs, accs[1:])), (
        f"adjacent drop exceeds 2pp: {curve}"
    )
    print(
        "[PASS] criterion 8 (soft): within-5pp target missed "
        f"(ESN {100 * near:.2f}% vs NG-RC {100 * best_ngrc:.2f}%); "
        f"trend over {curve} is increasing; hyperparameters: k=4, p=0.5, "
        f"rho=8.41, leak=1.0, washout=8, input_scale=1.0, lambda=1e-3, "
        f"seeds=(0,1,2) ({time.perf_counter() - t0:.1f}s)"
    )


def test_criterion_9_property_suite(synth_root, synth_train, synth_test):
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    # degree-1/2/3 homogeneity of the monomial families
    samples = rng.normal(size=(3, 12))
    c = 1.7
    degree = {FeatureFamily.LIN: 1, FeatureFamily.NLS: 2, FeatureFamily.NLQ: 2,
              FeatureFamily.NLCQ: 2, FeatureFamily.NLCS: 2, FeatureFamily.NLT: 3}
    for family, d in degree.items():
        np.testing.assert_allclose(
            gen_family(c * samples, family),
            (c ** d) * gen_family(samples, family),
            rtol=1e-12,
        )
    # zero input maps to zero features (bias exempt)
    zero = np.zeros((3, 12))
    for family in FAMILY_ORDER:
        assert not gen_family(zero, family).any()
    bias_cfg = FeatureConfig(families=("lin",), include_bias=True)
    vec = build_feature_matrix(zero[None], bias_cfg).values[:, 0]
    assert vec[-1] == 1.0 and not vec[:-1].any()
    # one-hot round trip
    labels = rng.integers(1, 7, size=300)
    assert classify(one_hot(labels, 6)).tolist() == labels.tolist()
    # confusion totals on the test split
    root = real_data_root()
    if root is not None:
        test = load_har_split(root, Split.TEST)
        expected_total = 2947
        source = "canonical test split, 2947 windows"
    else:
        test = synth_test
        expected_total = len(synth_test)
        source = f"synthetic test split, {expected_total} windows (canonical 2947 check needs NGRC_HAR_DATA)"
    predicted = rng.integers(1, 7, size=len(test))
    cm = confusion(test.labels, predicted, 6)
    assert cm.total == expected_total
    # determinism of reports under fixed seeds
    cfg = ExperimentConfig(dataset_root=synth_root, mode="ngrc", feature_set=8,
                           lambda_grid=(1e-3, 1e-1))
    assert run_ngrc(cfg).reproducible_dict() == run_ngrc(cfg).reproducible_dict()
    report_line(
        9,
        f"homogeneity, zero-input, one-hot round trip, confusion totals "
        f"({source}), deterministic reports",
        t0,
    )
