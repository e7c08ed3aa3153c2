import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from citeinfluence.features import (
    BINARY_FEATURES,
    FEATURE_NAMES,
    FeatureTable,
    PairKey,
    context_lexical_features,
    context_meta_features,
    context_similarity_features,
    contextual_normalize,
    count_features,
    extract_features,
    feature_label_correlations,
    misc_features,
    pearson,
    position_features,
    raw_paper_features,
    read_feature_table,
    title_similarity_features,
    write_feature_table,
)
from citeinfluence.synthetic import generate_corpus
from citeinfluence.textproc import LexiconSet, parse_lexicon

from conftest import paper, ref


def test_feature_order_and_count():
    assert len(FEATURE_NAMES) == 38 == len(set(FEATURE_NAMES))
    assert FEATURE_NAMES[0] == "countsInPaper_whole" and FEATURE_NAMES[-1] == "aux_yearDiff"
    assert BINARY_FEATURES == {"aux_selfCite"}


# --- counts --------------------------------------------------------------------

def test_counts_main_and_intro():
    p = paper(
        [("introduction", ["Intro [1]."]), ("main", ["A [1].", "B [1].", "C [1] and [2]."])],
        [ref(1), ref(2), ref(3)],
    )
    f = count_features(p, p.reference(1))
    assert f == {
        "countsInPaper_whole": 4, "countsInPaper_secNum": 2, "countsInPaper_related": 0,
        "countsInPaper_intro": 1, "countsInPaper_core": 3,
    }
    assert set(count_features(p, p.reference(3)).values()) == {0.0}


def test_acknowledgment_only_mention_is_not_core():
    p = paper([("main", ["Nothing here."]), ("acknowledgment", ["Thanks to [1]."])], [ref(1)])
    f = count_features(p, p.reference(1))
    assert f["countsInPaper_core"] == 0 and f["countsInPaper_whole"] == 1


# --- similarity ---------------------------------------------------------------------

def test_title_similarity():
    p = paper(
        [("title", ["Deep learning"]), ("abstract", ["Graphs and trees."]), ("main", ["Deep deep deep model model."])],
        [ref(1, title="Deep learning"), ref(2, title="Deep learn")],
    )
    f = title_similarity_features(p, p.reference(1))
    assert f["sim_titleTitle"] == pytest.approx(1.0)
    assert f["sim_titleAbstr"] == 0.0
    assert f["sim_titleIntro"] == 0.0  # no introduction section
    q = paper([("main", ["Deep deep deep model model."])], [ref(1, title="deep learning")])
    g = title_similarity_features(q, q.reference(1))
    assert g["sim_titleCore"] == pytest.approx(3 / (math.sqrt(2) * math.sqrt(13)))


def test_context_similarity_uses_sentence_and_averages():
    p = paper(
        [("abstract", ["Neural parsing of trees."]), ("main", ["Neural parsing of trees [1].", "Unrelated words here [1]."])],
        [ref(1)],
    )
    f = context_similarity_features(p, p.reference(1))
    # first context equals the abstract once the marker is removed; second shares nothing
    assert f["sim_contextAbstr"] == pytest.approx(0.5)
    q = paper([("abstract", ["Neural parsing of trees."]), ("main", ["Neural parsing of trees [1]."])], [ref(1)])
    assert context_similarity_features(q, q.reference(1))["sim_contextAbstr"] == pytest.approx(1.0)
    r = paper([("main", ["Nothing cited."])], [ref(1)])
    assert set(context_similarity_features(r, r.reference(1)).values()) == {0.0}


# --- context meta -------------------------------------------------------------------

def test_context_meta_averages():
    p = paper([("main", ["The work of Smith et al. [1] is good.", "Also [1].", "And [1,2]."])], [ref(1), ref(2)])
    f = context_meta_features(p.mentions_of(1))
    assert f["contextMeta_appearAlone"] == pytest.approx(2 / 3)
    assert f["contextMeta_appearFirst"] == pytest.approx(1 / 3)
    assert f["contextMeta_authorMentioned"] == pytest.approx(1 / 3)
    g = context_meta_features(p.mentions_of(2))
    assert g["contextMeta_appearFirst"] == 0.0
    assert context_meta_features([]) == dict.fromkeys(g, 0.0)


# --- lexical -------------------------------------------------------------------------

EMO = parse_lexicon(["great\tpositive,joy", "awful\tnegative,disgust", "novel\tpositive"], "emotion")


def _lexicons(**kw):
    base = LexiconSet.builtin()
    return LexiconSet(base.relevant, base.recent, base.extreme, base.comparative, **kw)


def test_lexical_relevant_hit_and_zero_case():
    p = paper([("main", ["We were inspired by [1] a lot.", "Plain words [2] here."])], [ref(1), ref(2)])
    lex = _lexicons()
    assert context_lexical_features(p, p.reference(1), lex)["contextLex_relevant"] >= 1
    assert set(context_lexical_features(p, p.reference(2), lex).values()) == {0.0}


def test_lexical_polarity_averages_over_mentions():
    p = paper([("main", ["A great novel idea [1].", "Nothing else [1] here."])], [ref(1)])
    extras = {}
    f = context_lexical_features(p, p.reference(1), _lexicons(emotion=EMO), extras=extras)
    assert f["contextLexEmo_polarity"] == pytest.approx(1.0)  # (2 + 0) / 2
    assert f["contextLexEmo_emo"] == pytest.approx(0.5)
    assert extras["contextLexEmo_positive"] == pytest.approx(1.0)
    assert extras["contextLexEmo_joy"] == pytest.approx(0.5)
    assert extras["contextLexEmo_negative"] == 0.0


def test_window_is_five_tokens_and_clipped_at_sentence():
    # "inspired" sits six tokens before the marker: outside the window
    p = paper([("main", ["Inspired one two three four five [1] x.", "Inspired [2]."])], [ref(1), ref(2)])
    lex = _lexicons()
    assert context_lexical_features(p, p.reference(1), lex)["contextLex_relevant"] == 0
    p2 = paper([("main", "Inspired. Words [1] here.")], [ref(1)])
    assert p2.n_sentences == 2
    assert context_lexical_features(p2, p2.reference(1), lex)["contextLex_relevant"] == 0
    assert context_lexical_features(p, p.reference(2), lex)["contextLex_relevant"] == 1


def test_osg_features_need_their_lexicons():
    gi = parse_lexicon(["strong\tStrong\ta", "good\tPositiv\ta", "run\tActive\tv"], "gi", pos_filter=True)
    p = paper([("main", ["A strong good run [1]."])], [ref(1)])
    f = context_lexical_features(p, p.reference(1), _lexicons(gi=gi))
    assert f["contextLexOsg_giPotency"] == 1 and f["contextLexOsg_giEvaluative"] == 1
    assert f["contextLexOsg_giActivity"] == 0  # verb-only sense filtered out
    assert f["contextLexOsg_wnPotency"] == 0


# --- position ------------------------------------------------------------------------

def test_posinsent_begin_two_of_three():
    p = paper([("main", ["[1] starts here.", "[1] again.", "Middle [1] case."])], [ref(1)])
    f = position_features(p, p.reference(1))
    assert f["posInSent_begin"] == pytest.approx(0.667, abs=1e-3)
    assert f["posInSent_end"] == 0.0


def test_posinpaper_stats():
    sents = [f"Sentence {i}." for i in range(10)]
    sents[2] = "Cite [1] here."
    sents[8] = "Cite [1] here."
    sents[0] = "Start [2]."
    p = paper([("main", sents)], [ref(1), ref(2)])
    f = position_features(p, p.reference(1))
    assert f["posInPaper_mean"] == pytest.approx(0.5)
    assert f["posInPaper_first"] == pytest.approx(0.2)
    assert f["posInPaper_last"] == pytest.approx(0.8)
    assert f["posInPaper_stdVar"] == pytest.approx(0.09)  # population variance of {0.2, 0.8}
    g = position_features(p, p.reference(2))
    assert g["posInPaper_first"] == g["posInPaper_mean"] == g["posInPaper_stdVar"] == 0.0
    assert g["posInSent_end"] == 1.0


# --- misc ------------------------------------------------------------------------------

def test_misc_features(caplog):
    p = paper([("main", ["x"])], [ref(1, year=2005, count=300, self_cite=True), ref(2, year=2015), ref(3, year=None)], year=2012)
    assert misc_features(p, p.reference(1)) == {"aux_citeCount": 300, "aux_selfCite": 1, "aux_yearDiff": 7}
    assert misc_features(p, p.reference(2))["aux_yearDiff"] == 0
    assert misc_features(p, p.reference(3))["aux_yearDiff"] == 0
    assert "no publication year" in caplog.text


# --- normalization ---------------------------------------------------------------------

def test_normalization_examples():
    v = np.zeros((4, 38))
    j = FEATURE_NAMES.index("countsInPaper_whole")
    v[:, j] = [10, 1, 1, 1]
    v[:, FEATURE_NAMES.index("aux_citeCount")] = [300, 600, 0, 150]
    v[:, FEATURE_NAMES.index("sim_titleTitle")] = 0.4
    v[:, FEATURE_NAMES.index("aux_selfCite")] = [1, 0, 1, 0]
    n = contextual_normalize(v)
    assert n[:, j].tolist() == [1.0, 0.1, 0.1, 0.1]
    assert n[0, FEATURE_NAMES.index("aux_citeCount")] == 0.5
    assert set(n[:, FEATURE_NAMES.index("sim_titleTitle")]) == {1.0}
    assert set(n[:, FEATURE_NAMES.index("posInPaper_mean")]) == {0.0}
    assert n[:, FEATURE_NAMES.index("aux_selfCite")].tolist() == [1, 0, 1, 0]


@given(
    st.lists(st.lists(st.one_of(st.just(0.0), st.floats(1e-6, 100)), min_size=38, max_size=38), min_size=1, max_size=8),
    st.floats(0.01, 1000),
)
def test_normalization_scale_invariant(rows, scale):
    v = np.array(rows)
    v[:, FEATURE_NAMES.index("aux_selfCite")] = (v[:, 0] > 50).astype(float)
    w = v * scale
    w[:, FEATURE_NAMES.index("aux_selfCite")] = v[:, FEATURE_NAMES.index("aux_selfCite")]
    a, b = contextual_normalize(v), contextual_normalize(w)
    assert np.allclose(a, b, atol=1e-9)
    assert ((a >= 0) & (a <= 1)).all()
    for j in range(38):
        if FEATURE_NAMES[j] not in BINARY_FEATURES and v[:, j].max() > 0:
            assert a[:, j].max() == 1.0


# --- whole-corpus invariants ---------------------------------------------------------------

@pytest.fixture(scope="module")
def synthetic_papers():
    return generate_corpus(15, seed=3)


@pytest.fixture(scope="module")
def synthetic_table(synthetic_papers):
    return extract_features(synthetic_papers)


def test_table_invariants(synthetic_papers, synthetic_table):
    t = synthetic_table
    assert t.values.shape == (sum(len(p.references) for p in synthetic_papers), 38)
    assert ((t.values >= 0) & (t.values <= 1)).all()
    assert set(np.unique(t.column("aux_selfCite"))) <= {0.0, 1.0}
    for p in synthetic_papers:
        raw, _ = raw_paper_features(p, LexiconSet.builtin())
        c = {n: raw[:, FEATURE_NAMES.index(n)] for n in FEATURE_NAMES}
        assert (c["countsInPaper_whole"] >= c["countsInPaper_intro"] + c["countsInPaper_related"] + c["countsInPaper_core"]).all()
        assert (c["countsInPaper_secNum"] <= np.minimum(12, c["countsInPaper_whole"])).all()
        for name in FEATURE_NAMES:
            if name.startswith("contextLex"):
                assert ((c[name] >= 0) & (c[name] <= 10)).all()


def test_disabled_features_reported(synthetic_table):
    assert "contextLexOsg_giPotency" in synthetic_table.disabled
    assert "contextLex_relevant" not in synthetic_table.disabled


def test_jobs_do_not_change_results(synthetic_papers, synthetic_table):
    t2 = extract_features(synthetic_papers, jobs=3)
    assert t2.keys == synthetic_table.keys
    assert np.array_equal(t2.values, synthetic_table.values)
    assert np.array_equal(t2.extras, synthetic_table.extras)


def test_feature_dump_roundtrip(tmp_path, synthetic_table):
    path = tmp_path / "f.tsv"
    write_feature_table(synthetic_table, path)
    header = path.read_text().splitlines()[0].split("\t")
    assert header == ["paper_id", "ref_index", *FEATURE_NAMES, "gold_label"]
    back = read_feature_table(path)
    assert back.keys == synthetic_table.keys
    assert np.array_equal(back.values, synthetic_table.values)
    assert np.array_equal(back.labels, synthetic_table.labels)


# --- correlations ------------------------------------------------------------------------

def _table(values, labels):
    keys = [PairKey("P", i) for i in range(len(labels))]
    return FeatureTable(keys, np.asarray(values, float), np.asarray(labels))


def test_correlation_with_label_itself():
    labels = np.array([0, 1, 0, 0, 1, 1, 0, 0])
    v = np.zeros((8, 38))
    v[:, 0] = labels
    cors = {c.feature: c for c in feature_label_correlations(_table(v, labels), splits=False)}
    assert cors["countsInPaper_whole"].r == pytest.approx(1.0)
    assert cors["sim_titleTitle"].degenerate and cors["sim_titleTitle"].r == 0.0


def test_independent_feature_near_zero():
    rng = np.random.default_rng(11)
    n = 4000
    labels = (rng.random(n) < 0.1).astype(int)
    v = rng.random((n, 38))
    cors = feature_label_correlations(_table(v, labels), splits=False)
    assert all(abs(c.r) < 3 / math.sqrt(n) * 1.5 for c in cors)
    # permutation oracle: the observed r sits inside the null spread
    null = [pearson(v[:, 0], rng.permutation(labels))[0] for _ in range(200)]
    assert abs(cors[0].r) <= np.quantile(np.abs(null), 0.999) + 1e-12


def test_pearson_matches_numpy():
    rng = np.random.default_rng(5)
    x, y = rng.random(50), rng.random(50)
    assert pearson(x, y)[0] == pytest.approx(np.corrcoef(x, y)[0, 1])


def test_split_correlations_present(synthetic_table):
    names = [c.feature for c in feature_label_correlations(synthetic_table)]
    assert "contextLexEmo_positive" in names and "contextLexEmo_trust" in names
    assert "aux_yearDiff_0" in names and "aux_yearDiff_11-20" in names and "aux_yearDiff_31+" in names
    assert len(names) == 38 + 10 + 14
