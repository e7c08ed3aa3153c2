"""Acceptance checks, one test per criterion.

Each test records a PASS/FAIL line that is printed in the terminal summary
(see conftest.py) and when this file is run directly:

    python3 tests/test_acceptance.py

Criterion 9 needs the public gold-standard dataset converted to the JSONL
corpus format; point CITEINFLUENCE_GOLD_CORPUS at it to enable the check.
"""

import math
import os
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from citeinfluence.corpus import corpus_stats, load_corpus, parse_record
from citeinfluence.features import FEATURE_NAMES, contextual_normalize, extract_features, feature_label_correlations, position_features
from citeinfluence.model import TrainConfig, cross_validate, f_measure, log_likelihood, log_likelihood_gradient, threshold_sweep, train
from citeinfluence.network import (
    CitationNetwork,
    DegenerateCorrelation,
    FilterSpec,
    author_leaderboard,
    average_precision,
    cip,
    filter_edges,
    h_index,
    hip_index,
    spearman,
)
from citeinfluence.synthetic import generate_honoree_network

from conftest import record, ref
from oracles import brute_avep, brute_h, brute_in_counts, random_network, rank_pearson

RESULTS: dict[int, str] = {}
GOLD_ENV = "CITEINFLUENCE_GOLD_CORPUS"
GOLD_WEIGHTS = {
    "countsInPaper_whole": 2.7228,
    "sim_titleCore": 1.2683,
    "countsInPaper_secNum": 1.1763,
    "aux_selfCite": -0.0923,
}


def record_result(n: int, ok: bool, detail: str) -> None:
    RESULTS[n] = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    assert ok, RESULTS[n]


def test_criterion_01_baseline_f():
    gold = set(range(103))
    universe = set(range(1000))
    f_all = f_measure(universe, gold)[2]
    f_none = f_measure(set(), gold)[2]
    record_result(1, abs(f_all - 0.187) <= 1e-3 and f_none == 0.0, f"always-positive F={f_all:.4f}, always-negative F={f_none}")


def test_criterion_02_hip_example():
    net = CitationNetwork.build([(f"c{i}", f"p{i}", 2) for i in range(4)], [("author", f"p{i}") for i in range(4)])
    hip, h = hip_index(net, "author"), h_index(net, "author")
    record_result(2, hip == 4 and h == 1, f"hip={hip} h={h}")


def test_criterion_03_cip():
    one = cip(CitationNetwork.build([("a", "x", 2)]), "x")
    four = cip(CitationNetwork.build([(f"c{i}", "x", 1) for i in range(4)]), "x")
    record_result(3, one == 4 and four == 4, f"one citer x2 -> {one}, four citers x1 -> {four}")


def test_criterion_04_normalization():
    v = np.zeros((4, len(FEATURE_NAMES)))
    j = FEATURE_NAMES.index("countsInPaper_whole")
    v[:, j] = [10, 1, 1, 1]
    col = contextual_normalize(v)[:, j].tolist()
    record_result(4, col == [1.0, 0.1, 0.1, 0.1], f"normalized counts {col}")


def test_criterion_05_position():
    p = parse_record(record([("main", ["[1] starts here.", "[1] again.", "Middle [1] case."])], [ref(1)]))
    v = position_features(p, p.reference(1))["posInSent_begin"]
    record_result(5, abs(v - 0.667) <= 1e-3, f"posInSent_begin={v:.4f}")


def test_criterion_06_gradient():
    rng = np.random.default_rng(6)
    X = rng.normal(size=(80, 4))
    t = (rng.random(80) < 0.3).astype(float)
    h = 1e-6
    worst = 0.0
    for _ in range(20):
        w = rng.normal(scale=2, size=5)
        g = log_likelihood_gradient(w, X, t)
        num = np.array([(log_likelihood(w + h * e, X, t) - log_likelihood(w - h * e, X, t)) / (2 * h) for e in np.eye(5)])
        worst = max(worst, np.linalg.norm(g - num) / max(np.linalg.norm(num), 1e-12))
    record_result(6, worst <= 1e-4, f"max relative error {worst:.2e} over 20 points")


def test_criterion_07_oracles():
    bad = []
    for seed in range(100):
        rng = np.random.default_rng(70_000 + seed)
        edges, authorship = random_network(rng, n_papers=int(rng.integers(2, 31)))
        net = CitationNetwork.build(edges, authorship)
        for a, papers in net.authors.items():
            conv = [len(brute_in_counts(net.edges, p)) for p in papers]
            prim = [sum(c * c for c in brute_in_counts(net.edges, p)) for p in papers]
            if h_index(net, a) != brute_h(conv) or hip_index(net, a) != brute_h(prim):
                bad.append(f"h/hip seed {seed}")
        n = int(rng.integers(2, 31))
        ranked = [f"a{i}" for i in rng.permutation(n)]
        honorees = {a for a in ranked if rng.random() < 0.3} or {ranked[0]}
        n_c = int(rng.integers(1, n + 1))
        if not math.isclose(average_precision(ranked, honorees, n_c, len(honorees)), brute_avep(ranked, honorees, n_c, len(honorees)), abs_tol=1e-12):
            bad.append(f"AveP seed {seed}")
        x = rng.integers(0, 8, n).astype(float)
        y = rng.integers(0, 8, n).astype(float)
        try:
            rho = spearman(x, y)
        except DegenerateCorrelation:
            if len(set(x)) > 1 and len(set(y)) > 1:
                bad.append(f"Spearman seed {seed}")
        else:
            if not math.isclose(rho, rank_pearson(x, y), abs_tol=1e-9):
                bad.append(f"Spearman seed {seed}")
    record_result(7, not bad, "100 networks and lists agree with brute force" if not bad else f"mismatches: {bad[:5]}")


def test_criterion_08_filtering():
    bad = []
    for seed in range(100):
        rng = np.random.default_rng(80_000 + seed)
        net = CitationNetwork.build(*random_network(rng))
        if filter_edges(net, FilterSpec(1, math.inf)).edges != net.edges:
            bad.append(f"identity seed {seed}")
        for specs in ([FilterSpec(t) for t in (1, 2, 3, 4, 6)], [FilterSpec(1, t) for t in (math.inf, 8, 4, 2, 1)]):
            kept = [set(filter_edges(net, s).edges) for s in specs]
            if any(not b <= a for a, b in zip(kept, kept[1:])):
                bad.append(f"monotone seed {seed}")
    record_result(8, not bad, "identity and monotonicity on 100 networks" if not bad else f"violations: {bad[:5]}")


@pytest.mark.skipif(not os.environ.get(GOLD_ENV), reason=f"{GOLD_ENV} not set; gold dataset unavailable")
def test_criterion_09_gold_dataset():
    papers = load_corpus(os.environ[GOLD_ENV])
    stats = corpus_stats(papers)
    table = extract_features(papers)
    checks = {}
    checks["stats"] = (stats.papers, stats.pairs, stats.positives) == (100, 3143, 322)
    cors = [c for c in feature_label_correlations(table, splits=False) if c.feature in FEATURE_NAMES and not c.degenerate]
    top = max(cors, key=lambda c: c.r).feature
    checks["top correlation"] = top == "countsInPaper_whole"
    peak = max(threshold_sweep(table, "countsInPaper_whole"), key=lambda s: s.macro_f)
    checks["sweep peak"] = abs(peak.macro_f - 0.37) <= 0.03 and 0.08 <= peak.fraction_positive <= 0.18
    cfg = TrainConfig(tuple(GOLD_WEIGHTS), folds=10, seed=0)
    w = train(table, cfg).coefficients()
    ordered = w["countsInPaper_whole"] > w["sim_titleCore"] > w["countsInPaper_secNum"] > 0 > w["aux_selfCite"]
    close = all(abs(w[k] - v) <= 0.25 * abs(v) for k, v in GOLD_WEIGHTS.items())
    checks["weights"] = ordered and close
    macro_f = cross_validate(table, cfg).macro_f
    checks["cv macro-F"] = 0.33 <= macro_f <= 0.45
    detail = (
        f"stats {stats.papers}/{stats.pairs}/{stats.positives}; top={top}; "
        f"peak F={peak.macro_f:.3f} at {peak.fraction_positive:.1%}; "
        f"weights {', '.join(f'{k}={v:.4f}' for k, v in w.items())}; CV macro-F={macro_f:.3f}; "
        f"failed: {[k for k, ok in checks.items() if not ok] or 'none'}"
    )
    record_result(9, all(checks.values()), detail)


def test_criterion_10_honoree_direction():
    wins = 0
    for seed in range(100):
        net, honorees = generate_honoree_network(seed)
        ap = {}
        for counting in ("conventional", "primed"):
            ranked, _ = author_leaderboard(net, counting)
            ap[counting] = average_precision(ranked, honorees, len(honorees), len(honorees))
        wins += ap["primed"] >= ap["conventional"]
    record_result(10, wins >= 90, f"AveP(hip) >= AveP(h) in {wins}/100 seeded trials")


def summary_lines() -> list[str]:
    lines = [RESULTS[n] for n in sorted(RESULTS)]
    if 9 not in RESULTS:
        lines.insert(8 if len(lines) >= 8 else len(lines), f"criterion  9: SKIP  {GOLD_ENV} not set; gold dataset unavailable")
    return lines


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
