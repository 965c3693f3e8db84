import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from labelforge.corpus import DevLabel
from labelforge.matrix import (
    LabelMatrix,
    compute_stats,
    load_matrix,
    majority_vote,
    pairwise_independence_test,
    save_matrix,
)

from naive_refs import naive_majority


def mat_from(rows, col_names=None, row_ids=None):
    rows = np.asarray(rows)
    n, m = rows.shape
    return LabelMatrix.from_dense(
        rows,
        row_ids=row_ids or [f"d{i}" for i in range(n)],
        col_names=col_names or [f"lf{j}" for j in range(m)],
    )


dense_votes = st.integers(min_value=1, max_value=8).flatmap(
    lambda m: st.integers(min_value=1, max_value=12).flatmap(
        lambda n: st.lists(
            st.lists(st.sampled_from([-1, 0, 1]), min_size=m, max_size=m),
            min_size=n,
            max_size=n,
        )
    )
)


# ---------------------------------------------------------------------------
# construction


def test_rejects_out_of_range_votes():
    with pytest.raises(ValueError):
        mat_from([[2, 0]])


def test_rejects_duplicate_row_ids():
    with pytest.raises(ValueError):
        mat_from([[1], [0]], row_ids=["a", "a"])


def test_rejects_duplicate_col_names():
    with pytest.raises(ValueError):
        mat_from([[1, 0]], col_names=["x", "x"])


def test_dense_round_trip_and_column():
    dense = [[1, 0, -1], [0, 0, 1]]
    m = mat_from(dense)
    np.testing.assert_array_equal(m.to_dense(), dense)
    np.testing.assert_array_equal(m.column(2), [-1, 1])
    assert (m.n, m.m) == (2, 3)


def test_select_rows_subsets_in_order():
    m = mat_from([[1, 0], [0, -1], [1, 1]])
    sub = m.select_rows([2, 0])
    assert sub.row_ids == ("d2", "d0")
    np.testing.assert_array_equal(sub.to_dense(), [[1, 1], [1, 0]])


# ---------------------------------------------------------------------------
# compute_stats


def test_stats_all_zero_column():
    m = mat_from([[0, 1], [0, -1]])
    stats = compute_stats(m)
    assert stats.coverage[0] == 0.0
    assert stats.dev_accuracy[0] is None
    assert stats.polarity[0] == ()


def test_stats_identical_columns_overlap_equals_coverage():
    m = mat_from([[1, 1], [0, 0], [1, 1], [-1, -1]])
    stats = compute_stats(m)
    assert stats.overlap[0][1] == pytest.approx(0.75)
    assert stats.overlap[0][1] == pytest.approx(stats.coverage[0])
    assert stats.conflict[0][1] == 0.0


def test_stats_dev_accuracy_two_thirds():
    # LF votes +1 on three dev docs, two of which are truly +1
    m = mat_from([[1], [1], [1], [0]])
    dev = [DevLabel("d0", 1), DevLabel("d1", 1), DevLabel("d2", -1), DevLabel("d3", 1)]
    stats = compute_stats(m, dev)
    assert stats.dev_accuracy[0] == pytest.approx(2 / 3)
    assert stats.dev_votes[0] == 3


def test_stats_conflict_counts_disagreements():
    m = mat_from([[1, -1], [1, 1], [0, -1], [0, 0]])
    stats = compute_stats(m)
    assert stats.overlap[0][1] == pytest.approx(0.5)
    assert stats.conflict[0][1] == pytest.approx(0.25)


def test_stats_unknown_dev_id_rejected():
    m = mat_from([[1]])
    with pytest.raises(ValueError):
        compute_stats(m, [DevLabel("zz", 1)])


@settings(max_examples=60, deadline=None)
@given(dense_votes)
def test_stats_invariant_chain_and_dense_equivalence(rows):
    dense = np.asarray(rows)
    m = mat_from(dense)
    stats = compute_stats(m)
    n = dense.shape[0]
    for j in range(m.m):
        cov_j = np.count_nonzero(dense[:, j]) / n
        assert stats.coverage[j] == pytest.approx(cov_j)
        for k in range(m.m):
            if j == k:
                continue
            both = np.count_nonzero((dense[:, j] != 0) & (dense[:, k] != 0)) / n
            disagree = (
                np.count_nonzero(
                    (dense[:, j] != 0) & (dense[:, k] != 0) & (dense[:, j] != dense[:, k])
                )
                / n
            )
            assert stats.overlap[j][k] == pytest.approx(both)
            assert stats.conflict[j][k] == pytest.approx(disagree)
            assert (
                stats.conflict[j][k]
                <= stats.overlap[j][k] + 1e-12
            )
            assert stats.overlap[j][k] <= min(stats.coverage[j], stats.coverage[k]) + 1e-12


# ---------------------------------------------------------------------------
# pairwise independence test


def test_independence_duplicate_column_tiny_p():
    rng = np.random.default_rng(0)
    col = rng.choice([-1, 0, 1], size=1000)
    dense = np.stack([col, col, rng.choice([-1, 0, 1], size=1000)], axis=1)
    res = pairwise_independence_test(mat_from(dense))
    p = np.asarray(res.p_values)
    assert p[0, 1] < 1e-3
    assert p[0, 1] == p[1, 0]
    assert np.all(np.diag(p) == 0.0)


def test_independence_constant_column_is_nan():
    dense = np.array([[1, 1], [1, -1], [1, 1], [1, 0]])
    res = pairwise_independence_test(mat_from(dense))
    assert np.isnan(np.asarray(res.p_values)[0, 1])
    # and the JSON view renders it as null
    as_dict = res.to_dict()
    assert as_dict["p_values"][0][1] is None


def test_independence_single_lf_no_pairs():
    res = pairwise_independence_test(mat_from([[1], [0], [-1]]))
    assert np.asarray(res.p_values).shape == (1, 1)
    assert res.flagged == ()


def test_independence_requires_two_rows():
    with pytest.raises(ValueError):
        pairwise_independence_test(mat_from([[1, 0]]))


def test_independence_null_calibration():
    """Independently sampled columns should be flagged at roughly the nominal rate."""
    hits = 0
    total = 0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        dense = rng.choice([-1, 0, 1], size=(4000, 6))
        res = pairwise_independence_test(mat_from(dense))
        p = np.asarray(res.p_values)
        upper = p[np.triu_indices(6, k=1)]
        hits += int(np.sum(upper < 0.05))
        total += upper.size
    assert abs(hits / total - 0.05) <= 0.02


# ---------------------------------------------------------------------------
# majority vote


def test_majority_vote_spec_examples():
    m = mat_from([[1, 1, -1], [1, -1, 0], [0, 0, 0]])
    labels = majority_vote(m, tie_break=0.5)
    assert labels.p[0] == 1.0
    assert labels.p[1] == 0.5
    assert labels.p[2] == 0.5
    labels8 = majority_vote(m, tie_break=0.8)
    assert labels8.p[2] == 0.8


@settings(max_examples=60, deadline=None)
@given(dense_votes, st.floats(min_value=0, max_value=1))
def test_majority_vote_matches_naive(rows, beta):
    m = mat_from(rows)
    got = majority_vote(m, tie_break=beta)
    expected = naive_majority(rows, tie_break=beta)
    np.testing.assert_allclose(got.p, expected)
    assert list(got.doc_ids) == list(m.row_ids)


def test_majority_vote_column_permutation_invariant():
    rng = np.random.default_rng(3)
    dense = rng.choice([-1, 0, 1], size=(40, 5))
    perm = [4, 2, 0, 1, 3]
    a = majority_vote(mat_from(dense))
    b = majority_vote(mat_from(dense[:, perm], col_names=[f"lf{j}" for j in perm]))
    np.testing.assert_array_equal(a.p, b.p)


# ---------------------------------------------------------------------------
# persistence


def test_save_load_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    dense = rng.choice([-1, 0, 1], size=(30, 4), p=[0.2, 0.6, 0.2])
    m = LabelMatrix.from_dense(
        dense,
        row_ids=[f"r{i:03d}" for i in range(30)],
        col_names=["a", "b", "c", "d"],
        lfset_version="deadbeef",
    )
    csv_path = tmp_path / "m.csv"
    meta_path = tmp_path / "m.meta.json"
    save_matrix(m, csv_path, meta_path, extra_meta={"config_hash": "ff"})
    loaded, meta = load_matrix(csv_path, meta_path)
    np.testing.assert_array_equal(loaded.to_dense(), dense)
    assert loaded.row_ids == m.row_ids
    assert loaded.col_names == m.col_names
    assert loaded.lfset_version == "deadbeef"
    assert meta["config_hash"] == "ff"
    assert meta["n"] == 30 and meta["m"] == 4


def test_save_is_byte_deterministic(tmp_path):
    dense = [[1, 0], [-1, 1]]
    m = mat_from(dense)
    a_csv, a_meta = tmp_path / "a.csv", tmp_path / "a.meta.json"
    b_csv, b_meta = tmp_path / "b.csv", tmp_path / "b.meta.json"
    save_matrix(m, a_csv, a_meta, extra_meta={})
    save_matrix(m, b_csv, b_meta, extra_meta={})
    assert a_csv.read_bytes() == b_csv.read_bytes()
    assert a_meta.read_bytes() == b_meta.read_bytes()
