import math

import numpy as np
import pytest

from labelforge.corpus import segment_sections
from labelforge.lf_dsl import EvalWarnings, parse_lf_file, apply_all
from labelforge.synth import (
    ABNORMAL_TERMS,
    PlantedEdge,
    SynthSpec,
    gen_features,
    gen_text_corpus,
    optimal_auc,
    sample_dataset,
)

from naive_refs import naive_auc


# ---------------------------------------------------------------------------
# sample_dataset


def test_shapes_ids_and_determinism():
    spec = SynthSpec(m=4, n=200, seed=1)
    mat, y, truth = sample_dataset(spec)
    assert (mat.n, mat.m) == (200, 4)
    assert mat.row_ids[0] == "s00000"
    assert mat.col_names == ("lf00", "lf01", "lf02", "lf03")
    assert y.shape == (200,)
    assert set(np.unique(y)) <= {-1, 1}
    mat2, y2, truth2 = sample_dataset(spec)
    np.testing.assert_array_equal(mat.to_dense(), mat2.to_dense())
    np.testing.assert_array_equal(y, y2)
    assert truth.beta == truth2.beta


def test_parameters_respect_ranges():
    spec = SynthSpec(m=8, n=50, seed=2, acc_range=(0.7, 0.8), prop_range=(0.4, 0.5))
    _, _, truth = sample_dataset(spec)
    assert np.all((truth.acc >= 0.7) & (truth.acc <= 0.8))
    assert np.all((truth.prop >= 0.4) & (truth.prop <= 0.5))


def test_explicit_parameters_used_verbatim():
    spec = SynthSpec(
        m=3, n=50, seed=3, accuracies=[0.95, 0.55, 1.0], propensities=[1.0, 0.5, 0.25]
    )
    _, _, truth = sample_dataset(spec)
    np.testing.assert_array_equal(truth.acc, [0.95, 0.55, 1.0])
    np.testing.assert_array_equal(truth.prop, [1.0, 0.5, 0.25])


def test_empirical_moments_match_parameters():
    spec = SynthSpec(
        m=3, n=60_000, seed=4, beta=0.35,
        accuracies=[0.9, 0.7, 0.6], propensities=[0.8, 0.5, 0.3],
    )
    mat, y, truth = sample_dataset(spec)
    dense = mat.to_dense()
    assert (y == 1).mean() == pytest.approx(0.35, abs=0.01)
    for j in range(3):
        col = dense[:, j]
        fired = col != 0
        assert fired.mean() == pytest.approx(truth.prop[j], abs=0.01)
        assert (col[fired] == y[fired]).mean() == pytest.approx(truth.acc[j], abs=0.01)


def test_copy_prob_one_duplicates_column():
    spec = SynthSpec(m=4, n=500, seed=5, edges=[PlantedEdge(1, 2, 1.0)])
    mat, _, truth = sample_dataset(spec)
    dense = mat.to_dense()
    np.testing.assert_array_equal(dense[:, 1], dense[:, 2])
    assert len(truth.edges) == 1
    assert (truth.edges[0].j, truth.edges[0].k) == (1, 2)


def test_copy_prob_zero_gives_independent_table():
    spec = SynthSpec(
        m=2, n=10, seed=6, accuracies=[0.8, 0.7], propensities=[0.6, 0.5],
        edges=[(0, 1, 0.0)],
    )
    _, _, truth = sample_dataset(spec)
    table = truth.edges[0].table
    # with copy_prob 0 the joint factorizes exactly
    for c, (q0, a0, q1, a1) in enumerate([(0.6, 0.8, 0.5, 0.7)] * 2):
        marg0 = table[c].sum(axis=1)
        marg1 = table[c].sum(axis=0)
        np.testing.assert_allclose(table[c], np.outer(marg0, marg1), atol=1e-12)


def test_planted_table_matches_empirical_joint():
    spec = SynthSpec(
        m=2, n=80_000, seed=7, beta=0.5,
        accuracies=[0.85, 0.7], propensities=[0.9, 0.6], edges=[(0, 1, 0.6)],
    )
    mat, y, truth = sample_dataset(spec)
    dense = mat.to_dense()
    table = truth.edges[0].table
    for c, cls in enumerate((-1, 1)):
        rows = dense[y == cls]
        idx = (rows[:, 0] + 1) * 3 + (rows[:, 1] + 1)
        empirical = np.bincount(idx, minlength=9).reshape(3, 3) / len(rows)
        np.testing.assert_allclose(empirical, table[c], atol=0.01)


def test_spec_validation():
    with pytest.raises(ValueError):
        SynthSpec(m=0, n=10, seed=0)
    with pytest.raises(ValueError):
        SynthSpec(m=2, n=10, seed=0, acc_range=(0.4, 0.9))
    with pytest.raises(ValueError):
        SynthSpec(m=2, n=10, seed=0, accuracies=[0.3, 0.9])
    with pytest.raises(ValueError):
        SynthSpec(m=2, n=10, seed=0, propensities=[0.0, 0.5])
    with pytest.raises(ValueError):
        SynthSpec(m=4, n=10, seed=0, edges=[(0, 1, 1.0), (1, 2, 1.0)])
    with pytest.raises(ValueError):
        SynthSpec(m=2, n=10, seed=0, edges=[(0, 5, 1.0)])


# ---------------------------------------------------------------------------
# gen_text_corpus


def test_text_corpus_shape_and_determinism():
    corpus, dev, truth = gen_text_corpus(100, seed=0)
    assert len(corpus) == 100
    assert corpus.ids[0] == "r00000"
    assert set(truth.values()) <= {-1, 1}
    assert len(truth) == 100
    assert len(dev) == 20  # n // 5
    corpus2, dev2, truth2 = gen_text_corpus(100, seed=0)
    assert [d.text for d in corpus] == [d.text for d in corpus2]
    assert truth == truth2
    assert [(d.doc_id, d.y) for d in dev] == [(d.doc_id, d.y) for d in dev2]


def test_text_corpus_dev_defaults_and_bounds():
    _, dev, _ = gen_text_corpus(10_000, seed=1)
    assert len(dev) == 200  # capped
    _, dev_small, _ = gen_text_corpus(12, seed=1)
    assert len(dev_small) == 10  # floored
    with pytest.raises(ValueError):
        gen_text_corpus(5, seed=0)
    with pytest.raises(ValueError):
        gen_text_corpus(100, seed=0, dev_size=101)


def test_dev_labels_agree_with_truth():
    corpus, dev, truth = gen_text_corpus(300, seed=2)
    ids = set(corpus.ids)
    for d in dev:
        assert d.doc_id in ids
        assert d.y == truth[d.doc_id]


def test_positive_rate_tracks_request():
    _, _, truth = gen_text_corpus(4000, seed=3, pos_rate=0.3)
    rate = sum(1 for v in truth.values() if v == 1) / len(truth)
    assert rate == pytest.approx(0.3, abs=0.03)


def test_reports_have_sections_and_positives_mention_terms():
    corpus, _, truth = gen_text_corpus(500, seed=4)
    term_tokens = {t.split()[0] for t in ABNORMAL_TERMS}
    for doc in corpus:
        seg = segment_sections(doc, ["FINDINGS:", "IMPRESSION:"])
        names = [s.name for s in seg.sections]
        assert "FINDINGS" in names and "IMPRESSION" in names
        if truth[doc.id] == 1:
            assert term_tokens & set(doc.tokens), doc.text


def test_negatives_shorter_on_average():
    corpus, _, truth = gen_text_corpus(3000, seed=5)
    pos_len = np.mean([d.token_count for d in corpus if truth[d.id] == 1])
    neg_len = np.mean([d.token_count for d in corpus if truth[d.id] == -1])
    assert neg_len < pos_len


def test_some_negatives_carry_negated_mentions():
    corpus, _, truth = gen_text_corpus(2000, seed=6)
    phrases = [
        tpl.format(t=t)
        for tpl in ("no {t}", "no evidence of {t}", "without {t}", "negative for {t}")
        for t in ABNORMAL_TERMS
    ]
    negated = sum(
        1
        for d in corpus
        if truth[d.id] == -1 and any(p in d.text.lower() for p in phrases)
    )
    n_neg = sum(1 for v in truth.values() if v == -1)
    assert 0.25 < negated / n_neg < 0.45  # controlled fraction, not all or none


def test_demo_lf_set_is_informative_on_generated_text():
    """The bundled rule styles all achieve usable coverage and accuracy."""
    corpus, _, truth = gen_text_corpus(2000, seed=7)
    corpus = corpus.map_documents(
        lambda d: segment_sections(d, ["FINDINGS:", "IMPRESSION:"])
    )
    lfset = parse_lf_file(
        """
        {"lfs": [
          {"name": "pneumo", "emit": 1, "rule": {"prefix_word": "pneumo"}},
          {"name": "normal", "emit": -1, "rule": {"contains": "normal"}},
          {"name": "short", "emit": -1, "rule": {"length_below": 22}}
        ]}
        """
    )
    mat = apply_all(lfset, corpus, EvalWarnings())
    dense = mat.to_dense()
    y = np.array([truth[i] for i in corpus.ids])
    for j, lf in enumerate(lfset.lfs):
        fired = dense[:, j] != 0
        assert fired.mean() > 0.1, lf.name
        acc = (dense[fired, j] == y[fired]).mean()
        assert acc > 0.6, (lf.name, acc)


# ---------------------------------------------------------------------------
# gen_features / optimal_auc


def test_features_shape_ids_determinism():
    y = np.array([1, -1, 1, -1])
    f = gen_features(y, d=3, noise_sigma=1.0, seed=0, doc_ids=["a", "b", "c", "d"])
    assert f.X.shape == (4, 3)
    assert f.doc_ids == ("a", "b", "c", "d")
    f2 = gen_features(y, d=3, noise_sigma=1.0, seed=0, doc_ids=["a", "b", "c", "d"])
    np.testing.assert_array_equal(f.X, f2.X)


def test_features_class_separation():
    rng = np.random.default_rng(8)
    y = rng.choice([-1, 1], size=20_000)
    f = gen_features(y, d=4, noise_sigma=1.0, seed=9, mu=0.3)
    centroids_gap = f.X[y == 1].mean(axis=0) - f.X[y == -1].mean(axis=0)
    np.testing.assert_allclose(centroids_gap, 0.6, atol=0.05)


def test_features_validation():
    with pytest.raises(ValueError):
        gen_features(np.array([0, 1]), d=2, noise_sigma=1.0, seed=0)
    with pytest.raises(ValueError):
        gen_features(np.array([1, -1]), d=0, noise_sigma=1.0, seed=0)
    with pytest.raises(ValueError):
        gen_features(np.array([1, -1]), d=2, noise_sigma=0.0, seed=0)


def test_optimal_auc_closed_form():
    # independent formula: Phi(x) = (1 + erf(x / sqrt(2))) / 2
    for d, sigma, mu in [(20, 1.0, 0.3), (5, 2.0, 0.3), (1, 1.0, 0.5)]:
        x = mu * math.sqrt(2 * d) / sigma
        expected = 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))
        assert optimal_auc(d, sigma, mu) == pytest.approx(expected, abs=1e-12)


def test_bayes_score_reaches_optimal_auc():
    rng = np.random.default_rng(10)
    y = rng.choice([-1, 1], size=30_000)
    d, sigma = 8, 1.0
    f = gen_features(y, d=d, noise_sigma=sigma, seed=11)
    scores = f.X.sum(axis=1)  # optimal direction is uniform across dims
    auc = naive_auc(scores[:3000].tolist(), y[:3000].tolist())
    assert auc == pytest.approx(optimal_auc(d, sigma), abs=0.02)
