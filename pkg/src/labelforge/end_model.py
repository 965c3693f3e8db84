"""Noise-aware discriminative training and ranking metrics.

The trainer consumes probabilistic labels: each example contributes
``p * loss(score, +1) + (1 - p) * loss(score, -1)`` with the logistic loss,
so a confident label behaves like a hard one and p = 0.5 contributes a
constant pull toward zero. Hard labels are the special case p in {0, 1};
:func:`train_supervised` implements that case directly from +/-1 targets and
serves as an independent reference path.

Also provides AUC via the Mann-Whitney statistic and DeLong's paired test
for comparing two models' AUCs on the same examples.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy.stats import norm, rankdata

from .prob_labels import ProbLabels


@dataclass(frozen=True)
class FeatureMatrix:
    """Dense feature rows keyed by document id."""

    doc_ids: tuple[str, ...]
    X: np.ndarray

    def __post_init__(self) -> None:
        X = np.asarray(self.X, dtype=np.float64)
        object.__setattr__(self, "X", X)
        if X.ndim != 2 or X.shape[0] != len(self.doc_ids):
            raise ValueError(
                f"feature array of shape {X.shape} does not match {len(self.doc_ids)} ids"
            )
        if len(set(self.doc_ids)) != len(self.doc_ids):
            raise ValueError("feature doc_ids must be unique")
        if not np.all(np.isfinite(X)):
            raise ValueError("features must be finite")
        X.setflags(write=False)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def select(self, indices: Sequence[int]) -> "FeatureMatrix":
        idx = list(indices)
        return FeatureMatrix(tuple(self.doc_ids[i] for i in idx), self.X[idx])


def save_features(features: FeatureMatrix, path: str | Path) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["doc_id"] + [f"f{j:02d}" for j in range(features.d)])
    for doc_id, row in zip(features.doc_ids, features.X):
        writer.writerow([doc_id] + [repr(float(v)) for v in row])
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def load_features(path: str | Path) -> FeatureMatrix:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "doc_id":
            raise ValueError(f"unexpected features header: {header}")
        ids, rows = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ValueError(f"features line {lineno}: wrong column count")
            ids.append(row[0])
            rows.append([float(v) for v in row[1:]])
    return FeatureMatrix(tuple(ids), np.asarray(rows, dtype=np.float64))


@dataclass(frozen=True)
class TrainConfig:
    max_iter: int = 500
    tol: float = 1e-10
    step: float = 1.0
    l2: float = 1e-4

    def __post_init__(self) -> None:
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.tol <= 0 or self.step <= 0 or self.l2 < 0:
            raise ValueError("tol and step must be positive, l2 non-negative")


@dataclass(frozen=True)
class LinearEndModel:
    """Linear scorer: score = X @ weights + bias."""

    weights: np.ndarray
    bias: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=np.float64)
        object.__setattr__(self, "weights", w)
        if w.ndim != 1:
            raise ValueError("weights must be a vector")
        w.setflags(write=False)

    def predict_scores(self, features: FeatureMatrix) -> np.ndarray:
        if features.d != len(self.weights):
            raise ValueError(
                f"model expects {len(self.weights)} features, got {features.d}"
            )
        return features.X @ self.weights + self.bias

    def to_dict(self) -> dict:
        return {
            "weights": [float(w) for w in self.weights],
            "bias": float(self.bias),
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "LinearEndModel":
        return cls(
            weights=np.asarray(obj["weights"], dtype=np.float64),
            bias=float(obj["bias"]),
            meta=dict(obj.get("meta", {})),
        )


def noise_aware_loss(scores: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Expected logistic loss under probabilistic targets in [0, 1].

    ``targets`` is P(y=+1); the loss is
    ``p * log(1 + exp(-s)) + (1 - p) * log(1 + exp(s))`` computed stably.
    """
    s = np.asarray(scores, dtype=np.float64)
    p = np.asarray(targets, dtype=np.float64)
    if np.any(p < 0) or np.any(p > 1):
        raise ValueError("targets must lie in [0, 1]")
    return p * np.logaddexp(0.0, -s) + (1.0 - p) * np.logaddexp(0.0, s)


def _descend(X: np.ndarray, p: np.ndarray, cfg: TrainConfig) -> LinearEndModel:
    """Full-batch gradient descent on the mean noise-aware loss + L2.

    The penalty 0.5 * l2 * ||w||^2 excludes the bias. Deterministic zero
    initialization; backtracking keeps the objective monotone.
    """
    n, d = X.shape
    w = np.zeros(d)
    b = 0.0

    def evaluate(w, b, need_grad):
        z = X @ w + b
        loss = float(np.mean(p * np.logaddexp(0.0, -z) + (1 - p) * np.logaddexp(0.0, z)))
        loss += 0.5 * cfg.l2 * float(w @ w)
        if not need_grad:
            return loss, None, None
        resid = _sigmoid(z) - p
        gw = X.T @ resid / n + cfg.l2 * w
        gb = float(resid.mean())
        return loss, gw, gb

    f, gw, gb = evaluate(w, b, True)
    step = cfg.step
    iterations = 0
    converged = False
    for _ in range(cfg.max_iter):
        gnorm2 = float(gw @ gw) + gb * gb
        if gnorm2 == 0.0:
            converged = True
            break
        trial = step
        accepted = False
        for _ in range(60):
            cw = w - trial * gw
            cb = b - trial * gb
            fc, _, _ = evaluate(cw, cb, False)
            if fc <= f - 1e-4 * trial * gnorm2:
                accepted = True
                break
            trial *= 0.5
        if not accepted:
            converged = True
            break
        iterations += 1
        rel = (f - fc) / max(abs(f), 1e-300)
        w, b = cw, cb
        f, gw, gb = evaluate(w, b, True)
        step = min(cfg.step, trial * 2.0)
        if rel < cfg.tol:
            converged = True
            break

    return LinearEndModel(
        weights=w,
        bias=b,
        meta={
            "iterations": iterations,
            "converged": converged,
            "final_loss": f,
            "n": n,
            "l2": cfg.l2,
        },
    )


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def train_noise_aware(
    features: FeatureMatrix,
    labels: ProbLabels,
    config: Optional[TrainConfig] = None,
) -> LinearEndModel:
    """Train a linear model on probabilistic labels.

    Rows flagged excluded in ``labels`` (dev documents) are dropped. After
    dropping, feature ids and label ids must coincide as sets; training
    order follows the feature matrix.
    """
    cfg = config or TrainConfig()
    label_ids, probs = labels.training_view()
    label_index = {d: i for i, d in enumerate(label_ids)}
    keep_rows = []
    targets = []
    for i, doc_id in enumerate(features.doc_ids):
        if doc_id in labels.excluded_ids:
            continue
        if doc_id not in label_index:
            raise ValueError(f"feature row {doc_id!r} has no probabilistic label")
        keep_rows.append(i)
        targets.append(probs[label_index[doc_id]])
    covered = {features.doc_ids[i] for i in keep_rows}
    orphans = [d for d in label_ids if d not in covered]
    if orphans:
        raise ValueError(f"label for {orphans[0]!r} has no feature row")
    if not keep_rows:
        raise ValueError("no training rows remain after exclusions")
    return _descend(features.X[keep_rows], np.asarray(targets), cfg)


def train_supervised(
    features: FeatureMatrix,
    y: np.ndarray,
    config: Optional[TrainConfig] = None,
) -> LinearEndModel:
    """Train on hard +/-1 labels with the standard logistic loss."""
    cfg = config or TrainConfig()
    y = np.asarray(y)
    if y.shape != (features.n,):
        raise ValueError(f"expected {features.n} labels, got shape {y.shape}")
    if not np.isin(y, (-1, 1)).all():
        raise ValueError("supervised labels must be -1 or +1")
    return _descend(features.X, (y > 0).astype(np.float64), cfg)


def roc_auc(scores: np.ndarray, y: np.ndarray) -> float:
    """Area under the ROC curve via the Mann-Whitney statistic.

    Ties between a positive and a negative score count half. Raises if only
    one class is present.
    """
    scores = np.asarray(scores, dtype=np.float64)
    y = np.asarray(y)
    pos = scores[y == 1]
    neg = scores[y == -1]
    if len(pos) == 0 or len(neg) == 0:
        raise ValueError("AUC needs at least one positive and one negative example")
    ranks = rankdata(scores)
    return float((ranks[y == 1].sum() - len(pos) * (len(pos) + 1) / 2) / (len(pos) * len(neg)))


def roc_points(scores: np.ndarray, y: np.ndarray) -> list[dict]:
    """ROC curve vertices as ``{"fpr", "tpr", "threshold"}`` dicts."""
    scores = np.asarray(scores, dtype=np.float64)
    y = np.asarray(y)
    n_pos = int((y == 1).sum())
    n_neg = int((y == -1).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("ROC needs at least one positive and one negative example")
    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_y = y[order]
    points: list[dict] = [{"fpr": 0.0, "tpr": 0.0, "threshold": None}]
    tp = fp = 0
    i = 0
    while i < len(sorted_y):
        thr = sorted_scores[i]
        while i < len(sorted_y) and sorted_scores[i] == thr:
            if sorted_y[i] == 1:
                tp += 1
            else:
                fp += 1
            i += 1
        points.append(
            {"fpr": fp / n_neg, "tpr": tp / n_pos, "threshold": float(thr)}
        )
    return points


@dataclass(frozen=True)
class DeLongResult:
    auc_a: float
    auc_b: float
    z: float
    p: float

    def to_dict(self) -> dict:
        return {"auc_a": self.auc_a, "auc_b": self.auc_b, "z": self.z, "p": self.p}


def _placement_values(scores: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """DeLong placement vectors via midranks.

    Returns per-positive values V10, per-negative values V01, and the AUC
    (which equals the mean of either vector).
    """
    pos = scores[y == 1]
    neg = scores[y == -1]
    n_pos, n_neg = len(pos), len(neg)
    all_ranks = rankdata(np.concatenate([pos, neg]))
    v10 = (all_ranks[:n_pos] - rankdata(pos)) / n_neg
    v01 = 1.0 - (all_ranks[n_pos:] - rankdata(neg)) / n_pos
    return v10, v01, float(v10.mean())


def delong_components(
    scores_a: np.ndarray, scores_b: np.ndarray, y: np.ndarray
) -> dict:
    """Structural pieces of DeLong's paired test, exposed for verification.

    Returns the per-positive and per-negative placement vectors for both
    models, their sample covariance matrices ``s10``/``s01``, the combined
    AUC covariance matrix, and the variance of the AUC difference.
    """
    a = np.asarray(scores_a, dtype=np.float64)
    b = np.asarray(scores_b, dtype=np.float64)
    y = np.asarray(y)
    if a.shape != b.shape or a.shape != y.shape:
        raise ValueError("scores_a, scores_b and y must have identical shapes")
    if not np.isin(y, (-1, 1)).all():
        raise ValueError("labels must be -1 or +1")
    n_pos = int((y == 1).sum())
    n_neg = int((y == -1).sum())
    if n_pos < 2 or n_neg < 2:
        raise ValueError("DeLong needs at least two examples of each class")

    v10_a, v01_a, auc_a = _placement_values(a, y)
    v10_b, v01_b, auc_b = _placement_values(b, y)
    s10 = np.cov(np.stack([v10_a, v10_b]), ddof=1)
    s01 = np.cov(np.stack([v01_a, v01_b]), ddof=1)
    cov = s10 / n_pos + s01 / n_neg
    return {
        "auc_a": auc_a,
        "auc_b": auc_b,
        "v10_a": v10_a,
        "v01_a": v01_a,
        "v10_b": v10_b,
        "v01_b": v01_b,
        "s10": s10,
        "s01": s01,
        "cov": cov,
        "var_diff": float(cov[0, 0] + cov[1, 1] - 2.0 * cov[0, 1]),
    }


def delong_test(
    scores_a: np.ndarray, scores_b: np.ndarray, y: np.ndarray
) -> DeLongResult:
    """DeLong's paired two-tailed test for equality of two AUCs.

    Both score vectors must be aligned with ``y`` (+/-1). Identical score
    vectors return z = 0, p = 1 by convention; a zero-variance difference
    with unequal AUCs is an error (the asymptotic test is undefined there).
    """
    parts = delong_components(scores_a, scores_b, y)
    auc_a, auc_b = parts["auc_a"], parts["auc_b"]
    if np.array_equal(np.asarray(scores_a), np.asarray(scores_b)):
        return DeLongResult(auc_a=auc_a, auc_b=auc_b, z=0.0, p=1.0)

    var_diff = parts["var_diff"]
    delta = auc_a - auc_b
    if var_diff <= 0.0 or np.isclose(var_diff, 0.0, atol=1e-300):
        if np.isclose(delta, 0.0, atol=1e-12):
            return DeLongResult(auc_a=auc_a, auc_b=auc_b, z=0.0, p=1.0)
        raise ValueError("AUC difference has zero estimated variance; test undefined")
    z = delta / np.sqrt(var_diff)
    p = float(2.0 * norm.sf(abs(z)))
    return DeLongResult(auc_a=auc_a, auc_b=auc_b, z=float(z), p=p)


def save_scores(doc_ids: Sequence[str], scores: np.ndarray, path: str | Path) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["doc_id", "score"])
    for doc_id, s in zip(doc_ids, scores):
        writer.writerow([doc_id, repr(float(s))])
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def load_scores(path: str | Path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["doc_id", "score"]:
            raise ValueError(f"unexpected scores header: {header}")
        ids, vals = [], []
        for row in reader:
            if not row:
                continue
            ids.append(row[0])
            vals.append(float(row[1]))
    return ids, np.asarray(vals, dtype=np.float64)


def save_end_model(model: LinearEndModel, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(model.to_dict(), sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def load_end_model(path: str | Path) -> LinearEndModel:
    return LinearEndModel.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
