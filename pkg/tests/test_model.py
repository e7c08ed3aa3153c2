import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize

from citeinfluence.features import FEATURE_NAMES, FeatureTable, PairKey, extract_features
from citeinfluence.model import (
    WEIGHT_CAP,
    LogisticModel,
    TrainConfig,
    assign_folds,
    cross_validate,
    downsample,
    f_measure,
    fit_logistic,
    greedy_feature_selection,
    load_model,
    log_likelihood,
    log_likelihood_gradient,
    predict_paper,
    random_baseline,
    random_curve,
    save_model,
    sigmoid,
    threshold_sweep,
    train,
)
from citeinfluence.synthetic import generate_corpus


def make_table(n_papers=30, refs=20, seed=0, signal=None):
    """Papers with ~10% positives; column 0 of ``values`` equals the label
    when ``signal == "exact"``, the rest is noise."""
    rng = np.random.default_rng(seed)
    keys, labels = [], []
    for p in range(n_papers):
        y = np.zeros(refs, int)
        y[rng.choice(refs, 2, replace=False)] = 1
        keys += [PairKey(f"P{p:03d}", i + 1) for i in range(refs)]
        labels += y.tolist()
    labels = np.array(labels)
    values = rng.random((len(labels), len(FEATURE_NAMES)))
    if signal == "exact":
        values[:, 0] = labels
    return FeatureTable(keys, values, labels)


# --- likelihood and gradient ------------------------------------------------------

def test_gradient_matches_central_differences():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(60, 4))
    t = (rng.random(60) < 0.4).astype(float)
    h = 1e-6
    for _ in range(20):
        w = rng.normal(scale=2, size=5)
        g = log_likelihood_gradient(w, X, t)
        num = np.array([
            (log_likelihood(w + h * e, X, t) - log_likelihood(w - h * e, X, t)) / (2 * h) for e in np.eye(5)
        ])
        assert np.linalg.norm(g - num) / max(np.linalg.norm(num), 1e-12) <= 1e-4


def test_sigmoid_stable():
    z = np.array([-1000.0, 0.0, 1000.0])
    assert sigmoid(z).tolist() == [0.0, 0.5, 1.0]


def test_fit_matches_generic_optimizer():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(300, 3))
    t = (rng.random(300) < sigmoid(0.5 + X @ np.array([1.5, -2.0, 0.3]))).astype(float)
    w, capped = fit_logistic(X, t)
    ref = minimize(lambda v: -log_likelihood(v, X, t), np.zeros(4), jac=lambda v: -log_likelihood_gradient(v, X, t),
                   method="BFGS", options={"gtol": 1e-10})
    assert not capped
    assert np.allclose(w, ref.x, atol=1e-5)
    assert np.linalg.norm(log_likelihood_gradient(w, X, t)) <= 1e-6


def test_separable_data_caps_and_boundary_near_half():
    x = np.linspace(0, 1, 101)
    t = (x > 0.5).astype(float)
    w, capped = fit_logistic(x, t)
    assert capped and w[1] > 0
    assert np.abs(w).max() <= WEIGHT_CAP
    assert -w[0] / w[1] == pytest.approx(0.505, abs=0.01)


def test_constant_feature_gives_prior_intercept():
    t = np.array([1, 0, 0, 0, 1, 0, 0, 0, 0, 0], float)
    w, _ = fit_logistic(np.full(10, 0.7), t)
    assert w[1] == 0.0
    assert w[0] == pytest.approx(math.log(0.2 / 0.8), abs=1e-8)


# --- training ---------------------------------------------------------------------

def test_train_is_deterministic_and_sets_threshold():
    table = make_table()
    cfg = TrainConfig(("countsInPaper_whole", "sim_titleCore"), seed=4)
    a, b = train(table, cfg), train(table, cfg)
    assert np.array_equal(a.weights, b.weights) and a.threshold == b.threshold
    probs = a.probabilities(table.matrix(cfg.features))
    assert (probs > a.threshold).mean() == pytest.approx((table.labels == 1).mean(), abs=0.01)
    assert 0 < a.threshold < 1
    assert a.top_k == 2  # mean positives per paper


def test_single_class_is_an_error():
    table = make_table()
    table.labels[:] = 0
    with pytest.raises(ValueError, match="both"):
        train(table, TrainConfig())


def test_downsample_without_replacement():
    labels = np.array([1, 0, 0, 0, 1, 0, 0, 0, 0, 0])
    rows = downsample(labels, np.random.default_rng(0))
    assert len(rows) == 4 == len(set(rows.tolist()))
    assert (labels[rows] == 1).sum() == 2


def test_monotone_in_positive_weight():
    m = LogisticModel(("a", "b"), np.array([-1.0, 2.0, -0.5]))
    x = np.array([[0.1, 0.3], [0.2, 0.3]])
    p = m.probabilities(x)
    assert p[1] > p[0]


def test_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(folds=1)
    with pytest.raises(ValueError):
        TrainConfig(top_k=0)
    with pytest.raises(ValueError):
        LogisticModel(("a",), np.array([1.0]))
    with pytest.raises(ValueError):
        LogisticModel(("a",), np.array([1.0, np.inf]))


def test_model_file_roundtrip(tmp_path):
    m = LogisticModel(("countsInPaper_whole", "aux_selfCite"), np.array([-3.1, 2.7228, -0.0923]), 0.61, 7, 3, False)
    path = tmp_path / "m.txt"
    save_model(m, path)
    back = load_model(path)
    assert back.feature_names == m.feature_names
    assert np.array_equal(back.weights, m.weights)
    assert (back.threshold, back.seed, back.top_k, back.capped) == (0.61, 7, 3, False)


# --- prediction and scoring ---------------------------------------------------------

MODEL = LogisticModel(("x",), np.array([0.0, 1.0]))


def test_predict_top_k():
    assert predict_paper(MODEL, np.array([0.1, 0.5, 0.3, 0.9, 0.2]), [1, 2, 3, 4, 5], 3) == {2, 3, 4}
    assert predict_paper(MODEL, np.array([0.1, 0.5]), [1, 2], 3) == {1, 2}
    assert predict_paper(MODEL, np.zeros(5), [5, 3, 9, 1, 2], 3) == {1, 2, 3}
    with pytest.raises(ValueError):
        predict_paper(MODEL, np.zeros(2), [1, 2], 0)


@given(st.lists(st.floats(-5, 5), min_size=0, max_size=12), st.integers(1, 6))
def test_predict_size(values, k):
    refs = list(range(1, len(values) + 1))
    assert len(predict_paper(MODEL, np.array(values), refs, k)) == min(k, len(refs))


def test_f_measure_examples():
    universe = set(range(1000))
    gold = set(range(103))
    assert f_measure(set(), gold) == (0.0, 0.0, 0.0)
    assert f_measure(universe, gold)[2] == pytest.approx(0.187, abs=1e-3)
    assert f_measure(gold, gold) == (1.0, 1.0, 1.0)
    assert f_measure(set(), set()) == (0.0, 0.0, 0.0)


@given(st.sets(st.integers(0, 20)), st.sets(st.integers(0, 20)))
def test_f_measure_harmonic_bounds(pred, gold):
    p, r, f = f_measure(pred, gold)
    assert all(0 <= v <= 1 for v in (p, r, f))
    if p > 0 and r > 0:
        assert min(p, r) - 1e-12 <= f <= max(p, r) + 1e-12


# --- cross-validation ---------------------------------------------------------------

def test_folds_partition_papers():
    ids = [f"P{i}" for i in range(23)]
    folds = assign_folds(ids, 10, seed=3)
    assert set(folds) == set(ids)
    sizes = np.bincount(list(folds.values()))
    assert sizes.max() - sizes.min() <= 1
    with pytest.raises(ValueError):
        assign_folds(ids[:5], 10, 0)


def test_cross_validate_deterministic_and_macro():
    table = make_table()
    cfg = TrainConfig(("countsInPaper_whole", "sim_titleCore"), folds=5, seed=2)
    a, b = cross_validate(table, cfg), cross_validate(table, cfg)
    assert [(s.paper_id, s.f) for s in a.per_paper] == [(s.paper_id, s.f) for s in b.per_paper]
    assert a.macro_f == pytest.approx(np.mean([s.f for s in a.per_paper]))
    assert len(a.per_paper) == 30
    # every paper is tested exactly once, in the fold it was assigned to
    assert sorted(s.paper_id for s in a.per_paper) == sorted(a.folds)
    assert all(a.folds[s.paper_id] == s.fold for s in a.per_paper)


def test_random_baseline_near_prior():
    table = make_table(n_papers=200, refs=30)
    rep = random_baseline(table, TrainConfig(seed=0))
    prior = 2 / 30
    assert rep.macro_f == pytest.approx(prior, abs=0.03)


def test_exact_feature_selected_first_with_perfect_f():
    table = make_table(signal="exact")
    cands = ["countsInPaper_whole", "sim_titleCore", "aux_citeCount"]
    path = greedy_feature_selection(table, cands, TrainConfig(folds=5, seed=0, top_k=2))
    assert path[0].feature == "countsInPaper_whole"
    assert path[0].macro_f == pytest.approx(1.0)
    assert len(path) == 1


def test_noise_features_stay_near_baseline():
    table = make_table(n_papers=60, seed=9)
    path = greedy_feature_selection(table, ["sim_titleCore", "aux_citeCount", "posInPaper_mean"], TrainConfig(folds=5, seed=0))
    base = random_baseline(table, TrainConfig(folds=5, seed=0)).macro_f
    assert len(path) <= 3
    assert path[0].macro_f < base + 0.15


# --- sweep -------------------------------------------------------------------------

def test_sweep_endpoints_match_trivial_baselines():
    table = make_table()
    sweep = threshold_sweep(table, "sim_titleCore")
    assert sweep[0].threshold == 0.0 and sweep[0].fraction_positive == 1.0
    per_paper_all = f_measure(set(range(20)), {0, 1})[2]
    assert sweep[0].macro_f == pytest.approx(per_paper_all)
    assert sweep[-1].fraction_positive == 0.0 and sweep[-1].macro_f == 0.0
    fr = [s.fraction_positive for s in sweep]
    assert fr == sorted(fr, reverse=True)


def test_random_curve_endpoints():
    table = make_table()
    curve = dict(random_curve(table, [0.0, 1.0]))
    assert curve[0.0] == 0.0
    assert curve[1.0] == pytest.approx(2 * 0.1 / 1.1)


# --- end to end on a synthetic corpus ----------------------------------------------------

def test_additive_models_beat_baselines_on_synthetic():
    table = extract_features(generate_corpus(60, seed=5))
    cfg = lambda f: TrainConfig(f, folds=10, seed=0)
    rand = random_baseline(table, cfg(("countsInPaper_whole",))).macro_f
    cite = cross_validate(table, cfg(("aux_citeCount",))).macro_f
    one = cross_validate(table, cfg(("countsInPaper_whole",))).macro_f
    two = cross_validate(table, cfg(("countsInPaper_whole", "sim_titleCore"))).macro_f
    assert rand < one and cite < one < two
