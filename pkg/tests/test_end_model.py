import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from labelforge.end_model import (
    DeLongResult,
    FeatureMatrix,
    LinearEndModel,
    TrainConfig,
    delong_components,
    delong_test,
    load_end_model,
    load_features,
    load_scores,
    noise_aware_loss,
    roc_auc,
    roc_points,
    save_end_model,
    save_features,
    save_scores,
    train_noise_aware,
    train_supervised,
)
from labelforge.prob_labels import ProbLabels

from naive_refs import naive_auc, naive_delong


# ---------------------------------------------------------------------------
# FeatureMatrix


def test_feature_matrix_validation():
    with pytest.raises(ValueError):
        FeatureMatrix(("a", "b"), np.array([[1.0], [np.nan]]))
    with pytest.raises(ValueError):
        FeatureMatrix(("a", "a"), np.ones((2, 1)))
    with pytest.raises(ValueError):
        FeatureMatrix(("a",), np.ones((2, 1)))


def test_feature_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    f = FeatureMatrix(("a", "b", "c"), rng.normal(size=(3, 4)))
    path = tmp_path / "f.csv"
    save_features(f, path)
    back = load_features(path)
    assert back.doc_ids == f.doc_ids
    np.testing.assert_array_equal(back.X, f.X)  # repr round-trips exactly


# ---------------------------------------------------------------------------
# noise_aware_loss


def test_loss_degenerate_targets_match_logistic():
    s = np.array([-2.0, 0.0, 3.0])
    np.testing.assert_allclose(
        noise_aware_loss(s, np.ones(3)), np.log1p(np.exp(-s)), atol=1e-12
    )
    np.testing.assert_allclose(
        noise_aware_loss(s, np.zeros(3)), np.log1p(np.exp(s)), atol=1e-12
    )


def test_loss_symmetric_point_is_log_two():
    got = noise_aware_loss(np.array([0.0]), np.array([0.5]))
    assert got[0] == pytest.approx(math.log(2.0), abs=1e-12)


def test_loss_is_linear_in_target():
    s = np.array([1.7])
    for p in (0.0, 0.25, 0.5, 0.9):
        blended = noise_aware_loss(s, np.array([p]))
        endpoints = p * noise_aware_loss(s, np.array([1.0])) + (1 - p) * noise_aware_loss(
            s, np.array([0.0])
        )
        assert blended[0] == pytest.approx(endpoints[0], abs=1e-12)


def test_loss_minimizer_is_logit_of_target():
    # 1-D numeric minimization over a fine grid
    grid = np.linspace(-6, 6, 24001)
    values = noise_aware_loss(grid, np.full_like(grid, 0.8))
    s_star = grid[int(np.argmin(values))]
    assert s_star == pytest.approx(math.log(4.0), abs=1e-3)  # logit(0.8) ~ 1.3863


def test_loss_gradient_matches_finite_differences():
    rng = np.random.default_rng(1)
    s = rng.normal(size=50)
    p = rng.random(50)
    h = 1e-6
    fd = (noise_aware_loss(s + h, p) - noise_aware_loss(s - h, p)) / (2 * h)
    analytic = 1.0 / (1.0 + np.exp(-s)) - p
    np.testing.assert_allclose(analytic, fd, atol=1e-7)


def test_loss_convex_in_score():
    p = np.full(3, 0.3)
    for a, b in [(-3.0, 1.0), (0.0, 4.0), (-2.0, -1.0)]:
        mid = noise_aware_loss(np.array([(a + b) / 2]), p[:1])[0]
        avg = 0.5 * (
            noise_aware_loss(np.array([a]), p[:1])[0]
            + noise_aware_loss(np.array([b]), p[:1])[0]
        )
        assert mid <= avg + 1e-12


def test_loss_numerically_stable_at_extremes():
    out = noise_aware_loss(np.array([500.0, -500.0]), np.array([0.0, 1.0]))
    assert np.isfinite(out).all()
    assert out[0] == pytest.approx(500.0)


def test_loss_rejects_bad_targets():
    with pytest.raises(ValueError):
        noise_aware_loss(np.zeros(1), np.array([1.5]))


# ---------------------------------------------------------------------------
# training


def gaussian_problem(n=600, d=5, seed=2):
    rng = np.random.default_rng(seed)
    y = rng.choice([-1, 1], size=n)
    X = 0.7 * y[:, None] + rng.normal(size=(n, d))
    ids = tuple(f"r{i}" for i in range(n))
    return FeatureMatrix(ids, X), y


def test_hard_labels_reproduce_supervised_weights():
    features, y = gaussian_problem()
    hard = ProbLabels(doc_ids=features.doc_ids, p=(y > 0).astype(float))
    cfg = TrainConfig(max_iter=300)
    a = train_noise_aware(features, hard, cfg)
    b = train_supervised(features, y, cfg)
    np.testing.assert_allclose(a.weights, b.weights, atol=1e-8)
    assert a.bias == pytest.approx(b.bias, abs=1e-8)


def test_uninformative_labels_give_zero_weights():
    features, _ = gaussian_problem()
    flat = ProbLabels(doc_ids=features.doc_ids, p=np.full(len(features.doc_ids), 0.5))
    model = train_noise_aware(features, flat)
    np.testing.assert_array_equal(model.weights, np.zeros(features.d))
    assert model.bias == 0.0
    assert model.meta["converged"] is True


def test_excluded_rows_are_dropped():
    features, y = gaussian_problem(n=200)
    excluded = frozenset(features.doc_ids[:50])
    labels = ProbLabels(
        doc_ids=features.doc_ids, p=(y > 0).astype(float), excluded_ids=excluded
    )
    kept = [i for i, d in enumerate(features.doc_ids) if d not in excluded]
    direct = FeatureMatrix(
        tuple(features.doc_ids[i] for i in kept), features.X[kept]
    )
    direct_labels = ProbLabels(doc_ids=direct.doc_ids, p=(y[kept] > 0).astype(float))
    a = train_noise_aware(features, labels)
    b = train_noise_aware(direct, direct_labels)
    np.testing.assert_allclose(a.weights, b.weights, atol=1e-12)
    assert a.meta["n"] == 150


def test_alignment_errors_name_the_offender():
    features, y = gaussian_problem(n=4)
    labels = ProbLabels(doc_ids=("r0", "r1", "r2"), p=np.full(3, 0.7))
    with pytest.raises(ValueError) as exc:
        train_noise_aware(features, labels)
    assert "r3" in str(exc.value)
    extra = ProbLabels(doc_ids=features.doc_ids + ("zz",), p=np.full(5, 0.7))
    with pytest.raises(ValueError) as exc:
        train_noise_aware(extra and features, extra)
    assert "zz" in str(exc.value)


def test_training_separates_gaussian_classes():
    features, y = gaussian_problem(n=2000, seed=5)
    model = train_supervised(features, y)
    auc = roc_auc(model.predict_scores(features), y)
    assert auc > 0.9
    assert np.isfinite(model.weights).all()


def test_l2_shrinks_weights():
    features, y = gaussian_problem(n=500, seed=6)
    loose = train_supervised(features, y, TrainConfig(l2=1e-6))
    tight = train_supervised(features, y, TrainConfig(l2=10.0))
    assert np.linalg.norm(tight.weights) < np.linalg.norm(loose.weights)


def test_end_model_round_trip(tmp_path):
    model = LinearEndModel(weights=np.array([0.5, -1.25]), bias=0.75, meta={"n": 3})
    path = tmp_path / "m.json"
    save_end_model(model, path)
    back = load_end_model(path)
    np.testing.assert_array_equal(back.weights, model.weights)
    assert back.bias == model.bias
    assert back.meta["n"] == 3


# ---------------------------------------------------------------------------
# roc_auc / roc_points


def test_roc_auc_concordance_example():
    scores = np.array([0.1, 0.4, 0.35, 0.8])
    y = np.array([-1, -1, 1, 1])
    assert roc_auc(scores, y) == pytest.approx(0.75, abs=1e-12)


def test_roc_auc_edge_values():
    assert roc_auc(np.array([1.0, 2.0, 3.0, 4.0]), np.array([-1, -1, 1, 1])) == 1.0
    assert roc_auc(np.array([5.0, 5.0, 5.0, 5.0]), np.array([-1, 1, -1, 1])) == 0.5


def test_roc_auc_single_class_rejected():
    with pytest.raises(ValueError):
        roc_auc(np.array([1.0, 2.0]), np.array([1, 1]))


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.integers(min_value=-50, max_value=50), min_size=4, max_size=40),
    st.data(),
)
def test_roc_auc_matches_naive_and_transform_invariant(scores, data):
    n = len(scores)
    y = data.draw(
        st.lists(st.sampled_from([-1, 1]), min_size=n, max_size=n).filter(
            lambda ls: len(set(ls)) == 2
        )
    )
    # integer-valued scores so the monotone transform below cannot collapse
    # distinct values through rounding
    scores = np.asarray(scores, dtype=float)
    y = np.asarray(y)
    auc = roc_auc(scores, y)
    assert auc == pytest.approx(naive_auc(scores.tolist(), y.tolist()), abs=1e-12)
    # strictly increasing transform preserves ordering, hence AUC
    transformed = 3.0 * scores + np.tanh(scores) + 1.0
    assert roc_auc(transformed, y) == pytest.approx(auc, abs=1e-12)


def test_roc_auc_negation_flips():
    rng = np.random.default_rng(7)
    scores = rng.normal(size=30)  # continuous, ties have measure zero
    y = np.array([1] * 15 + [-1] * 15)
    assert roc_auc(-scores, y) == pytest.approx(1.0 - roc_auc(scores, y), abs=1e-12)


def test_roc_points_shape_and_monotonicity():
    rng = np.random.default_rng(8)
    scores = rng.normal(size=50)
    y = rng.permutation(np.array([1] * 20 + [-1] * 30))
    pts = roc_points(scores, y)
    assert pts[0]["fpr"] == 0.0 and pts[0]["tpr"] == 0.0
    assert pts[0]["threshold"] is None
    assert pts[-1]["fpr"] == 1.0 and pts[-1]["tpr"] == 1.0
    fprs = [p["fpr"] for p in pts]
    tprs = [p["tpr"] for p in pts]
    assert fprs == sorted(fprs)
    assert tprs == sorted(tprs)


# ---------------------------------------------------------------------------
# DeLong


def test_delong_six_point_hand_instance():
    # hand-enumerated placements:
    #   model a: V10 = (1, 1, 2/3), V01 = (2/3, 1, 1), AUC = 8/9
    #   model b: perfect separation, V10 = V01 = (1, 1, 1), AUC = 1
    # sample variances: var(V10_a) = var(V01_a) = 1/27, every b term = 0
    # var(AUC_a - AUC_b) = (1/27)/3 + (1/27)/3 = 2/81, z = -(1/9)/sqrt(2/81)
    a = np.array([0.9, 0.8, 0.3, 0.6, 0.2, 0.1])
    b = np.array([0.7, 0.5, 0.6, 0.4, 0.3, 0.2])
    y = np.array([1, 1, 1, -1, -1, -1])
    parts = delong_components(a, b, y)
    np.testing.assert_allclose(parts["v10_a"], [1.0, 1.0, 2 / 3], atol=1e-12)
    np.testing.assert_allclose(parts["v01_a"], [2 / 3, 1.0, 1.0], atol=1e-12)
    np.testing.assert_allclose(parts["v10_b"], [1.0, 1.0, 1.0], atol=1e-12)
    assert parts["auc_a"] == pytest.approx(8 / 9, abs=1e-12)
    assert parts["auc_b"] == pytest.approx(1.0, abs=1e-12)
    assert parts["s10"][0, 0] == pytest.approx(1 / 27, abs=1e-12)
    assert parts["s01"][0, 0] == pytest.approx(1 / 27, abs=1e-12)
    assert parts["s10"][0, 1] == pytest.approx(0.0, abs=1e-12)
    assert parts["var_diff"] == pytest.approx(2 / 81, abs=1e-12)
    res = delong_test(a, b, y)
    assert res.z == pytest.approx(-1 / math.sqrt(2), abs=1e-12)
    assert res.p == pytest.approx(0.47950012218695337, abs=1e-9)


def test_delong_identical_scores_convention():
    scores = np.array([0.2, 0.9, 0.4, 0.6])
    y = np.array([-1, 1, -1, 1])
    res = delong_test(scores, scores.copy(), y)
    assert res.z == 0.0
    assert res.p == 1.0


def test_delong_antisymmetric():
    rng = np.random.default_rng(9)
    y = np.array([1] * 20 + [-1] * 20)
    a = rng.normal(size=40) + 0.5 * y
    b = rng.normal(size=40) + 0.3 * y
    ab = delong_test(a, b, y)
    ba = delong_test(b, a, y)
    assert ab.z == pytest.approx(-ba.z, abs=1e-12)
    assert ab.p == pytest.approx(ba.p, abs=1e-12)
    assert ab.auc_a == ba.auc_b


def test_delong_matches_naive_oracle():
    rng = np.random.default_rng(10)
    y = np.array([1] * 15 + [-1] * 25)
    a = rng.normal(size=40) + 0.8 * y
    b = rng.normal(size=40) + 0.2 * y
    res = delong_test(a, b, y)
    auc_a, auc_b, var, z = naive_delong(a.tolist(), b.tolist(), y.tolist())
    assert res.auc_a == pytest.approx(auc_a, abs=1e-12)
    assert res.auc_b == pytest.approx(auc_b, abs=1e-12)
    assert res.z == pytest.approx(z, abs=1e-10)


def test_delong_zero_variance_unequal_auc_rejected():
    y = np.array([1, 1, -1, -1])
    perfect = np.array([4.0, 3.0, 2.0, 1.0])
    constant = np.array([1.0, 1.0, 1.0, 1.0])
    with pytest.raises(ValueError):
        delong_test(perfect, constant, y)


def test_delong_validation():
    y = np.array([1, -1])
    with pytest.raises(ValueError):
        delong_test(np.ones(2), np.ones(3), np.array([1, -1, 1]))
    with pytest.raises(ValueError):
        delong_test(np.ones(2), np.ones(2), np.array([1, 2]))
    with pytest.raises(ValueError):
        delong_test(np.ones(2), np.ones(2), y)  # fewer than 2 per class


def test_delong_result_to_dict():
    res = DeLongResult(auc_a=0.9, auc_b=0.8, z=1.5, p=0.13)
    d = res.to_dict()
    assert d == {"auc_a": 0.9, "auc_b": 0.8, "z": 1.5, "p": 0.13}


# ---------------------------------------------------------------------------
# scores persistence


def test_scores_round_trip_exact(tmp_path):
    rng = np.random.default_rng(11)
    ids = [f"d{i}" for i in range(10)]
    scores = rng.normal(size=10)
    path = tmp_path / "s.csv"
    save_scores(ids, scores, path)
    back_ids, back = load_scores(path)
    assert back_ids == ids
    np.testing.assert_array_equal(back, scores)


def test_load_scores_rejects_bad_header(tmp_path):
    path = tmp_path / "s.csv"
    path.write_text("id,value\nx,1.0\n", encoding="utf-8")
    with pytest.raises(ValueError):
        load_scores(path)
