"""Sparse label matrix, summary statistics, and a pairwise dependence test.

The matrix holds one row per document and one column per labeling function,
with entries in {-1, 0, +1}; abstentions (0) are structural zeros of the
underlying CSR storage. Export is a triplet CSV (non-abstain entries only)
plus a JSON sidecar with shapes, orderings, and provenance hashes.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.stats import chi2

from .corpus import DevLabel
from .prob_labels import ProbLabels


@dataclass(frozen=True)
class LabelMatrix:
    """Immutable n x m matrix of LF votes."""

    row_ids: tuple[str, ...]
    col_names: tuple[str, ...]
    data: sp.csr_matrix = field(repr=False)
    lfset_version: str = ""

    def __post_init__(self) -> None:
        mat = sp.csr_matrix(self.data, dtype=np.int8, copy=False)
        mat.eliminate_zeros()
        if mat.shape != (len(self.row_ids), len(self.col_names)):
            raise ValueError(
                f"matrix shape {mat.shape} does not match "
                f"{len(self.row_ids)} row ids x {len(self.col_names)} LF names"
            )
        if mat.nnz and not np.isin(mat.data, (-1, 1)).all():
            bad = mat.data[~np.isin(mat.data, (-1, 1))][0]
            raise ValueError(f"votes must be -1, 0 or +1; found {bad}")
        if len(set(self.row_ids)) != len(self.row_ids):
            raise ValueError("row ids must be unique")
        if len(set(self.col_names)) != len(self.col_names):
            raise ValueError("LF names must be unique")
        mat.data.setflags(write=False)
        object.__setattr__(self, "data", mat)

    @classmethod
    def from_dense(
        cls,
        votes: np.ndarray,
        row_ids: Sequence[str],
        col_names: Sequence[str],
        lfset_version: str = "",
    ) -> "LabelMatrix":
        return cls(
            row_ids=tuple(row_ids),
            col_names=tuple(col_names),
            data=sp.csr_matrix(np.asarray(votes, dtype=np.int8)),
            lfset_version=lfset_version,
        )

    @property
    def n(self) -> int:
        return len(self.row_ids)

    @property
    def m(self) -> int:
        return len(self.col_names)

    def to_dense(self) -> np.ndarray:
        return self.data.toarray()

    def column(self, j: int) -> np.ndarray:
        return self.data.getcol(j).toarray().ravel()

    def select_rows(self, indices: Sequence[int]) -> "LabelMatrix":
        idx = list(indices)
        return LabelMatrix(
            row_ids=tuple(self.row_ids[i] for i in idx),
            col_names=self.col_names,
            data=self.data[idx],
            lfset_version=self.lfset_version,
        )

    def row_index(self) -> dict[str, int]:
        return {r: i for i, r in enumerate(self.row_ids)}


@dataclass(frozen=True)
class LFStats:
    """Per-LF and pairwise summary statistics for a label matrix."""

    col_names: tuple[str, ...]
    coverage: np.ndarray
    polarity: tuple[tuple[int, ...], ...]
    dev_accuracy: tuple[Optional[float], ...]
    dev_votes: tuple[int, ...]
    overlap: np.ndarray
    conflict: np.ndarray
    n: int

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "lfs": [
                {
                    "name": name,
                    "coverage": float(self.coverage[j]),
                    "polarity": list(self.polarity[j]),
                    "dev_accuracy": self.dev_accuracy[j],
                    "dev_votes": self.dev_votes[j],
                }
                for j, name in enumerate(self.col_names)
            ],
            "overlap": [[float(v) for v in row] for row in self.overlap],
            "conflict": [[float(v) for v in row] for row in self.conflict],
        }


def compute_stats(matrix: LabelMatrix, dev: Sequence[DevLabel] = ()) -> LFStats:
    """Coverage, polarity, pairwise overlap/conflict, and dev-set accuracy.

    ``overlap[j,k]`` is the fraction of rows where both LFs vote;
    ``conflict[j,k]`` the fraction where they vote and disagree. Dev accuracy
    is None for LFs with no non-abstain vote on a dev document.
    """
    if matrix.n == 0:
        raise ValueError("cannot compute statistics for an empty matrix")
    V = matrix.data.astype(np.int64)
    n = matrix.n

    both = (abs(V).T @ abs(V)).toarray()
    signed = (V.T @ V).toarray()
    disagree = (both - signed) // 2
    overlap = both / n
    conflict = disagree / n

    coverage = np.diff(V.tocsc().indptr) / n

    dense = matrix.to_dense()
    polarity = tuple(
        tuple(int(v) for v in sorted(set(dense[:, j]) - {0})) for j in range(matrix.m)
    )

    dev_acc: list[Optional[float]] = [None] * matrix.m
    dev_votes = [0] * matrix.m
    if dev:
        index = matrix.row_index()
        missing = [d.doc_id for d in dev if d.doc_id not in index]
        if missing:
            raise ValueError(f"dev label for unknown document {missing[0]!r}")
        rows = np.array([index[d.doc_id] for d in dev])
        y = np.array([d.y for d in dev])
        sub = dense[rows]
        for j in range(matrix.m):
            votes = sub[:, j]
            mask = votes != 0
            dev_votes[j] = int(mask.sum())
            if dev_votes[j]:
                dev_acc[j] = float((votes[mask] == y[mask]).mean())

    return LFStats(
        col_names=matrix.col_names,
        coverage=coverage,
        polarity=polarity,
        dev_accuracy=tuple(dev_acc),
        dev_votes=tuple(dev_votes),
        overlap=overlap,
        conflict=conflict,
        n=n,
    )


@dataclass(frozen=True)
class IndependenceResult:
    """Chi-square test of pairwise independence over the 3x3 vote tables.

    ``p_values`` is symmetric with zeros on the diagonal and NaN where the
    test is undefined (an LF constant over all rows). ``low_expected`` marks
    pairs whose contingency table had an expected cell count below 5.
    ``flagged`` lists pairs significant at ``alpha`` after Bonferroni
    correction over the m(m-1)/2 pairs.
    """

    col_names: tuple[str, ...]
    p_values: np.ndarray
    low_expected: np.ndarray
    flagged: tuple[tuple[int, int], ...]
    alpha: float

    def to_dict(self) -> dict:
        def cell(v: float):
            return None if np.isnan(v) else float(v)

        return {
            "alpha": self.alpha,
            "p_values": [[cell(v) for v in row] for row in self.p_values],
            "low_expected": [[bool(v) for v in row] for row in self.low_expected],
            "flagged": [
                {"j": j, "k": k, "names": [self.col_names[j], self.col_names[k]]}
                for j, k in self.flagged
            ],
        }


def pairwise_independence_test(
    matrix: LabelMatrix, alpha: float = 0.01
) -> IndependenceResult:
    """Chi-square independence test for every LF pair's 3x3 vote table.

    Rows/columns that are all zero are dropped before computing the statistic
    (degrees of freedom shrink accordingly); a table left with fewer than two
    rows or columns yields NaN.
    """
    if matrix.n < 2:
        raise ValueError("independence testing needs at least two rows")
    m = matrix.m
    dense = matrix.to_dense()
    p_values = np.zeros((m, m))
    low_expected = np.zeros((m, m), dtype=bool)
    for j in range(m):
        for k in range(j + 1, m):
            counts = np.bincount(
                3 * (dense[:, j].astype(np.int64) + 1) + (dense[:, k] + 1), minlength=9
            ).reshape(3, 3)
            counts = counts[counts.sum(axis=1) > 0][:, counts.sum(axis=0) > 0]
            r, c = counts.shape
            if r < 2 or c < 2:
                p_values[j, k] = p_values[k, j] = np.nan
                continue
            expected = np.outer(counts.sum(axis=1), counts.sum(axis=0)) / counts.sum()
            stat = ((counts - expected) ** 2 / expected).sum()
            p = float(chi2.sf(stat, (r - 1) * (c - 1)))
            p_values[j, k] = p_values[k, j] = p
            if (expected < 5).any():
                low_expected[j, k] = low_expected[k, j] = True

    n_pairs = m * (m - 1) // 2
    flagged = tuple(
        (j, k)
        for j in range(m)
        for k in range(j + 1, m)
        if n_pairs and not np.isnan(p_values[j, k]) and p_values[j, k] < alpha / n_pairs
    )
    return IndependenceResult(
        col_names=matrix.col_names,
        p_values=p_values,
        low_expected=low_expected,
        flagged=flagged,
        alpha=alpha,
    )


def majority_vote(matrix: LabelMatrix, tie_break: float = 0.5) -> ProbLabels:
    """Hard majority vote over LF outputs, as degenerate probabilities.

    Rows with a strict positive majority get p=1.0, strict negative p=0.0;
    ties and all-abstain rows get ``tie_break``.
    """
    if not 0.0 <= tie_break <= 1.0:
        raise ValueError(f"tie_break must be within [0, 1], got {tie_break}")
    sums = np.asarray(matrix.data.sum(axis=1)).ravel()
    p = np.full(matrix.n, float(tie_break))
    p[sums > 0] = 1.0
    p[sums < 0] = 0.0
    return ProbLabels(
        doc_ids=matrix.row_ids,
        p=p,
        model_version=f"majority-vote(tie_break={tie_break})",
    )


def save_matrix(
    matrix: LabelMatrix,
    csv_path: str | Path,
    meta_path: str | Path,
    extra_meta: Optional[dict] = None,
) -> None:
    """Write the triplet CSV (``row_id,lf_name,vote``) and its JSON sidecar."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["row_id", "lf_name", "vote"])
    coo = matrix.data.tocoo()
    order = np.lexsort((coo.col, coo.row))
    for idx in order:
        writer.writerow(
            [matrix.row_ids[coo.row[idx]], matrix.col_names[coo.col[idx]], int(coo.data[idx])]
        )
    Path(csv_path).write_text(buf.getvalue(), encoding="utf-8")

    meta = {
        "n": matrix.n,
        "m": matrix.m,
        "row_ids": list(matrix.row_ids),
        "col_names": list(matrix.col_names),
        "lfset_version": matrix.lfset_version,
    }
    if extra_meta:
        meta.update(extra_meta)
    Path(meta_path).write_text(
        json.dumps(meta, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def load_matrix(csv_path: str | Path, meta_path: str | Path) -> tuple[LabelMatrix, dict]:
    """Inverse of :func:`save_matrix`; returns the matrix and the sidecar."""
    meta = json.loads(Path(meta_path).read_text(encoding="utf-8"))
    row_ids = tuple(meta["row_ids"])
    col_names = tuple(meta["col_names"])
    row_index = {r: i for i, r in enumerate(row_ids)}
    col_index = {c: j for j, c in enumerate(col_names)}

    rows, cols, vals = [], [], []
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["row_id", "lf_name", "vote"]:
            raise ValueError(f"unexpected matrix CSV header: {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                rows.append(row_index[row[0]])
                cols.append(col_index[row[1]])
                vals.append(int(row[2]))
            except (KeyError, IndexError, ValueError) as exc:
                raise ValueError(f"matrix CSV line {lineno}: {exc!r}") from exc
    data = sp.csr_matrix(
        (np.asarray(vals, dtype=np.int8), (rows, cols)),
        shape=(len(row_ids), len(col_names)),
    )
    matrix = LabelMatrix(
        row_ids=row_ids,
        col_names=col_names,
        data=data,
        lfset_version=meta.get("lfset_version", ""),
    )
    return matrix, meta
