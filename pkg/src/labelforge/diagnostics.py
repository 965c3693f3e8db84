"""Diagnostics: per-LF quality reports and two benchmark experiments.

* :func:`lf_report` cross-references empirical statistics, dev-set
  accuracy, and learned model parameters into one table with flags for
  below-chance or suspiciously dependent LFs.
* :func:`scaling_experiment` measures parameter-recovery error against
  sample size on model-generated data and fits a log-log slope.
* :func:`supervision_comparison` trains end models from ground-truth,
  posterior, and majority-vote labels on shared synthetic features and
  compares test AUCs with DeLong's test.

All outputs are plain JSON-serializable dicts (or dataclasses exposing
``to_dict``) and are deterministic given their seeds.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .corpus import DevLabel
from .end_model import (
    FeatureMatrix,
    TrainConfig,
    delong_test,
    roc_auc,
    roc_points,
    train_noise_aware,
)
from .matrix import (
    IndependenceResult,
    LabelMatrix,
    compute_stats,
    majority_vote,
    pairwise_independence_test,
)
from .model import DependencyStructure, FitConfig, GenerativeParams, fit, predict_proba
from .prob_labels import ProbLabels
from .synth import SynthSpec, gen_features, sample_dataset


def label_agreement(p: np.ndarray, y: np.ndarray) -> float:
    """Fraction of documents where thresholded p agrees with y.

    Exact ties at p = 0.5 earn half credit so the measure is symmetric.
    """
    p = np.asarray(p, dtype=np.float64)
    y = np.asarray(y)
    if p.shape != y.shape:
        raise ValueError("p and y must be aligned")
    hard = np.where(p > 0.5, 1, np.where(p < 0.5, -1, 0))
    return float(np.where(hard == 0, 0.5, (hard == y).astype(np.float64)).mean())


def lf_report(
    matrix: LabelMatrix,
    dev: Sequence[DevLabel] = (),
    params: Optional[GenerativeParams] = None,
    independence: Optional[IndependenceResult] = None,
) -> dict:
    """Per-LF diagnostic table as a JSON-serializable dict.

    Combines coverage/polarity/conflict statistics with dev accuracy and,
    when a fitted model is supplied, the learned accuracy and the gap
    between the two estimates. LFs with learned or dev accuracy below 0.5
    are flagged ``below_chance``; pairs failing the independence test are
    flagged ``dependent``.
    """
    stats = compute_stats(matrix, dev)
    if independence is None and matrix.n >= 2:
        independence = pairwise_independence_test(matrix)
    if params is not None and params.m != matrix.m:
        raise ValueError("params do not match the matrix column count")
    if params is not None and params.col_names and params.col_names != matrix.col_names:
        raise ValueError("params were fitted for different LF names")

    dense = matrix.to_dense()
    dependent_of: dict[int, set[int]] = {}
    if independence is not None:
        for j, k in independence.flagged:
            dependent_of.setdefault(j, set()).add(k)
            dependent_of.setdefault(k, set()).add(j)

    lfs = []
    for j, name in enumerate(matrix.col_names):
        votes = dense[:, j]
        voting = votes != 0
        # conflict mass: rows where this LF votes and at least one other
        # non-abstaining LF disagrees
        others = np.delete(dense, j, axis=1)
        disagree = (others == -votes[:, None]) & voting[:, None]
        conflict_mass = float(disagree.any(axis=1).mean())

        learned = float(params.acc[j]) if params is not None else None
        dev_acc = stats.dev_accuracy[j]
        gap = (
            abs(learned - dev_acc)
            if learned is not None and dev_acc is not None
            else None
        )
        flags = []
        if (learned is not None and learned < 0.5) or (
            dev_acc is not None and dev_acc < 0.5
        ):
            flags.append("below_chance")
        if j in dependent_of:
            flags.append("dependent")
        lfs.append(
            {
                "name": name,
                "coverage": float(stats.coverage[j]),
                "polarity": list(stats.polarity[j]),
                "conflict_mass": conflict_mass,
                "dev_accuracy": dev_acc,
                "dev_votes": stats.dev_votes[j],
                "learned_accuracy": learned,
                "accuracy_gap": gap,
                "flags": flags,
                "dependent_with": sorted(
                    matrix.col_names[k] for k in dependent_of.get(j, ())
                ),
            }
        )

    report = {
        "n": matrix.n,
        "m": matrix.m,
        "lfset_version": matrix.lfset_version,
        "lfs": lfs,
        "dependent_pairs": [
            {"names": [matrix.col_names[j], matrix.col_names[k]]}
            for j, k in (independence.flagged if independence is not None else ())
        ],
        "model": {
            "beta": float(params.beta) if params is not None else None,
            "version": params.version() if params is not None else None,
        },
    }
    return report


def render_report_markdown(report: dict) -> str:
    """Human-readable rendering of :func:`lf_report` output."""
    out = io.StringIO()
    out.write(f"# Labeling function report\n\n")
    out.write(f"{report['n']} documents, {report['m']} labeling functions.\n")
    if report["model"]["beta"] is not None:
        out.write(f"Fitted class balance: {report['model']['beta']:.4f}.\n")
    out.write("\n| LF | coverage | polarity | conflict | dev acc | learned acc | flags |\n")
    out.write("|---|---|---|---|---|---|---|\n")

    def show(v, fmt="{:.3f}"):
        return fmt.format(v) if v is not None else "-"

    for lf in report["lfs"]:
        polarity = ",".join(f"{p:+d}" for p in lf["polarity"]) or "none"
        out.write(
            f"| {lf['name']} | {lf['coverage']:.3f} | {polarity} "
            f"| {lf['conflict_mass']:.3f} | {show(lf['dev_accuracy'])} "
            f"| {show(lf['learned_accuracy'])} | {' '.join(lf['flags']) or '-'} |\n"
        )
    if report["dependent_pairs"]:
        out.write("\nDependent pairs:\n")
        for pair in report["dependent_pairs"]:
            out.write(f"- {pair['names'][0]} and {pair['names'][1]}\n")
    return out.getvalue()


# ---------------------------------------------------------------------------
# Scaling experiment


def fit_loglog_slope(ns: Sequence[float], errors: Sequence[float]) -> tuple[float, float]:
    """Least-squares slope and intercept of log(error) against log(n)."""
    x = np.log(np.asarray(ns, dtype=np.float64))
    y = np.log(np.asarray(errors, dtype=np.float64))
    if len(x) != len(y) or len(x) < 2:
        raise ValueError("need at least two (n, error) points")
    xc = x - x.mean()
    slope = float((xc @ (y - y.mean())) / (xc @ xc))
    intercept = float(y.mean() - slope * x.mean())
    return slope, intercept


@dataclass(frozen=True)
class ScalingResult:
    n_grid: tuple[int, ...]
    seeds: tuple[int, ...]
    cells: tuple[dict, ...]
    mean_error: dict
    slope: float
    intercept: float

    def to_dict(self) -> dict:
        return {
            "n_grid": list(self.n_grid),
            "seeds": list(self.seeds),
            "cells": [dict(c) for c in self.cells],
            "mean_error": {str(k): v for k, v in self.mean_error.items()},
            "slope": self.slope,
            "intercept": self.intercept,
        }

    def to_csv(self) -> str:
        lines = ["n,seed,est_error,agreement"]
        for c in self.cells:
            lines.append(
                f"{c['n']},{c['seed']},{repr(c['est_error'])},{repr(c['agreement'])}"
            )
        return "\n".join(lines) + "\n"


def scaling_experiment(
    template: SynthSpec,
    n_grid: Sequence[int],
    seeds: Sequence[int],
    fit_config: Optional[FitConfig] = None,
) -> ScalingResult:
    """Accuracy-recovery error versus sample size.

    For every n in the (strictly increasing, >= 4 point) grid and every seed
    (>= 5 required), draws a dataset from ``template`` resized to n, fits the
    independent model, and records the mean absolute accuracy error and the
    posterior/truth agreement. The log-log slope of mean error against n
    summarizes the convergence rate (about -0.5 for root-n behavior).
    """
    n_grid = [int(v) for v in n_grid]
    if len(n_grid) < 4:
        raise ValueError("n_grid needs at least 4 points")
    if any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise ValueError("n_grid must be strictly increasing")
    seeds = [int(s) for s in seeds]
    if len(seeds) < 5:
        raise ValueError("at least 5 seeds are required")

    cells = []
    for n in n_grid:
        for seed in seeds:
            spec = SynthSpec(
                m=template.m,
                n=n,
                seed=seed,
                beta=template.beta,
                acc_range=template.acc_range,
                prop_range=template.prop_range,
                accuracies=template.accuracies,
                propensities=template.propensities,
                edges=template.edges,
            )
            matrix, y, truth = sample_dataset(spec)
            params = fit(matrix, None, fit_config)
            est_error = float(np.abs(params.acc - truth.acc).mean())
            agreement = label_agreement(predict_proba(params, matrix), y)
            cells.append(
                {"n": n, "seed": seed, "est_error": est_error, "agreement": agreement}
            )

    mean_error = {
        n: float(np.mean([c["est_error"] for c in cells if c["n"] == n])) for n in n_grid
    }
    slope, intercept = fit_loglog_slope(n_grid, [mean_error[n] for n in n_grid])
    return ScalingResult(
        n_grid=tuple(n_grid),
        seeds=tuple(seeds),
        cells=tuple(cells),
        mean_error=mean_error,
        slope=slope,
        intercept=intercept,
    )


# ---------------------------------------------------------------------------
# Supervision comparison


def supervision_comparison(
    matrix: LabelMatrix,
    y_true: np.ndarray,
    seeds: Sequence[int],
    feature_dim: int = 20,
    feature_sigma: float = 1.0,
    feature_mu: float = 0.3,
    base_seed: int = 0,
    test_frac: float = 0.3,
    subsample_frac: float = 0.8,
    structure: Optional[DependencyStructure] = None,
    fit_config: Optional[FitConfig] = None,
    train_config: Optional[TrainConfig] = None,
    features: Optional[FeatureMatrix] = None,
) -> dict:
    """Compare end models trained from three label sources.

    Features and the train/test split are fixed from ``base_seed`` so every
    arm and seed sees the same test set. The label model and majority vote
    are computed once on the training rows. Each seed then subsamples the
    training rows (the same subsample for all three arms) and trains one
    model per arm: ground-truth labels, posterior labels, majority-vote
    labels. Median-AUC models per arm are compared pairwise with DeLong's
    test on the shared test set.
    """
    y_true = np.asarray(y_true)
    if y_true.shape != (matrix.n,):
        raise ValueError("y_true must align with the matrix rows")
    seeds = [int(s) for s in seeds]
    if not seeds:
        raise ValueError("at least one seed is required")
    if not 0.0 < test_frac < 1.0 or not 0.0 < subsample_frac <= 1.0:
        raise ValueError("fractions must lie in (0, 1)")

    if features is None:
        features = gen_features(
            y_true, feature_dim, feature_sigma, seed=base_seed, doc_ids=matrix.row_ids,
            mu=feature_mu,
        )
    elif features.doc_ids != matrix.row_ids:
        raise ValueError("features must be aligned with matrix rows")

    rng = np.random.default_rng(base_seed)
    order = rng.permutation(matrix.n)
    n_test = max(1, int(round(matrix.n * test_frac)))
    test_rows = np.sort(order[:n_test])
    train_rows = np.sort(order[n_test:])

    train_matrix = matrix.select_rows(train_rows)
    params = fit(train_matrix, structure, fit_config)
    p_train = predict_proba(params, train_matrix)
    mv_train = majority_vote(train_matrix).p
    y_train = y_true[train_rows]
    X_test = features.select(test_rows)
    y_test = y_true[test_rows]

    arm_targets = {
        "full_supervision": (y_train > 0).astype(np.float64),
        "prob_labels": p_train,
        "majority_vote": mv_train,
    }

    runs: dict[str, list[dict]] = {arm: [] for arm in arm_targets}
    models: dict[str, dict[int, object]] = {arm: {} for arm in arm_targets}
    n_sub = max(1, int(round(len(train_rows) * subsample_frac)))
    for seed in seeds:
        sub = np.sort(np.random.default_rng(seed).choice(len(train_rows), n_sub, replace=False))
        X_sub = features.select(train_rows[sub])
        for arm, targets in arm_targets.items():
            labels = ProbLabels(doc_ids=X_sub.doc_ids, p=targets[sub])
            model = train_noise_aware(X_sub, labels, train_config)
            auc = roc_auc(model.predict_scores(X_test), y_test)
            runs[arm].append({"seed": seed, "auc": auc})
            models[arm][seed] = model

    def median_seed(arm: str) -> int:
        ordered = sorted(runs[arm], key=lambda r: (r["auc"], r["seed"]))
        return ordered[(len(ordered) - 1) // 2]["seed"]

    arms = {}
    median_scores = {}
    for arm in arm_targets:
        aucs = [r["auc"] for r in runs[arm]]
        med = median_seed(arm)
        scores = models[arm][med].predict_scores(X_test)
        median_scores[arm] = scores
        arms[arm] = {
            "runs": runs[arm],
            "auc_mean": float(np.mean(aucs)),
            "auc_min": float(np.min(aucs)),
            "auc_max": float(np.max(aucs)),
            "median_seed": med,
            "median_auc": roc_auc(scores, y_test),
            "roc": roc_points(scores, y_test),
        }

    comparisons = {}
    pairs = [
        ("full_supervision", "prob_labels"),
        ("full_supervision", "majority_vote"),
        ("prob_labels", "majority_vote"),
    ]
    for a, b in pairs:
        res = delong_test(median_scores[a], median_scores[b], y_test)
        comparisons[f"{a}_vs_{b}"] = res.to_dict()

    return {
        "config": {
            "seeds": seeds,
            "base_seed": base_seed,
            "feature_dim": features.d,
            "test_frac": test_frac,
            "subsample_frac": subsample_frac,
            "n_train": int(len(train_rows)),
            "n_test": int(len(test_rows)),
        },
        "label_quality": {
            "prob_agreement": label_agreement(p_train, y_train),
            "majority_agreement": label_agreement(mv_train, y_train),
        },
        "arms": arms,
        "comparisons": comparisons,
    }
