"""Synthetic data with known ground truth, for verification at desk scale.

Three generators:

* :func:`sample_dataset` draws a vote matrix directly from the generative
  model (optionally with planted copy-dependencies between LF pairs) and
  returns the true parameters alongside, so recovery error is measurable.
* :func:`gen_text_corpus` writes small templated radiology-style reports
  with a FINDINGS/IMPRESSION layout, planted abnormality terms, negated
  mentions in normal studies, and a document-length signal -- enough texture
  for every rule primitive to have something real to match.
* :func:`gen_features` draws class-conditional Gaussian feature vectors
  whose optimal AUC is known in closed form.

All generators take explicit seeds and use a single numpy Generator each, so
outputs are reproducible byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.stats import norm

from .corpus import Corpus, DevLabel, Document
from .end_model import FeatureMatrix
from .matrix import LabelMatrix
from .model import EdgeTable, GenerativeParams, _marginal_cell_probs


@dataclass(frozen=True)
class PlantedEdge:
    """LF ``dst`` copies LF ``src``'s vote with probability ``copy_prob``."""

    src: int
    dst: int
    copy_prob: float

    def __post_init__(self) -> None:
        if self.src == self.dst:
            raise ValueError("a planted edge needs two distinct LFs")
        if not 0.0 <= self.copy_prob <= 1.0:
            raise ValueError(f"copy_prob must lie in [0, 1], got {self.copy_prob}")


@dataclass(frozen=True)
class SynthSpec:
    """Configuration for :func:`sample_dataset`.

    Per-LF accuracies/propensities are drawn uniformly from the given ranges
    unless explicit lists are supplied (which may include boundary values
    like a perfect accuracy of 1.0).
    """

    m: int
    n: int
    seed: int
    beta: float = 0.5
    acc_range: tuple[float, float] = (0.6, 0.9)
    prop_range: tuple[float, float] = (0.3, 0.8)
    accuracies: Optional[tuple[float, ...]] = None
    propensities: Optional[tuple[float, ...]] = None
    edges: tuple[PlantedEdge, ...] = ()

    def __post_init__(self) -> None:
        if self.m < 1 or self.n < 1:
            raise ValueError("m and n must be positive")
        if not 0.0 < self.beta < 1.0:
            raise ValueError(f"beta must lie in (0, 1), got {self.beta}")
        lo, hi = self.acc_range
        if not 0.5 < lo <= hi < 1.0:
            raise ValueError(f"acc_range must satisfy 0.5 < lo <= hi < 1, got {self.acc_range}")
        lo, hi = self.prop_range
        if not 0.0 < lo <= hi <= 1.0:
            raise ValueError(f"prop_range must satisfy 0 < lo <= hi <= 1, got {self.prop_range}")
        if self.accuracies is not None:
            object.__setattr__(self, "accuracies", tuple(float(a) for a in self.accuracies))
            if len(self.accuracies) != self.m:
                raise ValueError("accuracies list must have one entry per LF")
            if any(not 0.5 <= a <= 1.0 for a in self.accuracies):
                raise ValueError("explicit accuracies must lie in [0.5, 1]")
        if self.propensities is not None:
            object.__setattr__(self, "propensities", tuple(float(q) for q in self.propensities))
            if len(self.propensities) != self.m:
                raise ValueError("propensities list must have one entry per LF")
            if any(not 0.0 < q <= 1.0 for q in self.propensities):
                raise ValueError("explicit propensities must lie in (0, 1]")
        edges = tuple(
            e if isinstance(e, PlantedEdge) else PlantedEdge(*e) for e in self.edges
        )
        object.__setattr__(self, "edges", edges)
        used: set[int] = set()
        for e in edges:
            if not 0 <= e.src < self.m or not 0 <= e.dst < self.m:
                raise ValueError(f"edge ({e.src}, {e.dst}) out of range for m={self.m}")
            if e.src in used or e.dst in used:
                raise ValueError("planted edges must not share LFs")
            used.update((e.src, e.dst))


def _edge_table(
    q_src: float, a_src: float, q_dst: float, a_dst: float, copy_prob: float
) -> np.ndarray:
    """Exact joint P(v_src, v_dst | y) for the copy mechanism.

    The destination copies the source's realized vote with probability
    ``copy_prob`` and otherwise draws independently, so
    P(s, t | y) = P_src(s | y) * (cp * [t == s] + (1 - cp) * P_dst(t | y)).
    """
    src = _marginal_cell_probs(q_src, a_src)
    dst = _marginal_cell_probs(q_dst, a_dst)
    table = np.empty((2, 3, 3))
    for c in (0, 1):
        indep = np.outer(src[c], dst[c])
        table[c] = (1 - copy_prob) * indep + copy_prob * np.diag(src[c])
    return table


def sample_dataset(spec: SynthSpec) -> tuple[LabelMatrix, np.ndarray, GenerativeParams]:
    """Draw (vote matrix, true classes, true parameters) from the model."""
    rng = np.random.default_rng(spec.seed)
    if spec.accuracies is not None:
        acc = np.asarray(spec.accuracies, dtype=np.float64)
    else:
        acc = rng.uniform(*spec.acc_range, size=spec.m)
    if spec.propensities is not None:
        prop = np.asarray(spec.propensities, dtype=np.float64)
    else:
        prop = rng.uniform(*spec.prop_range, size=spec.m)

    y = np.where(rng.random(spec.n) < spec.beta, 1, -1).astype(np.int8)
    votes = np.zeros((spec.n, spec.m), dtype=np.int8)
    for j in range(spec.m):
        fires = rng.random(spec.n) < prop[j]
        agrees = rng.random(spec.n) < acc[j]
        votes[:, j] = np.where(fires, np.where(agrees, y, -y), 0)
    for e in spec.edges:
        copies = rng.random(spec.n) < e.copy_prob
        votes[copies, e.dst] = votes[copies, e.src]

    edge_tables = []
    for e in spec.edges:
        j, k = sorted((e.src, e.dst))
        table = _edge_table(prop[e.src], acc[e.src], prop[e.dst], acc[e.dst], e.copy_prob)
        if e.dst < e.src:
            table = table.transpose(0, 2, 1)
        edge_tables.append(EdgeTable(j, k, table))

    names = tuple(f"lf{j:02d}" for j in range(spec.m))
    matrix = LabelMatrix.from_dense(
        votes,
        row_ids=tuple(f"s{i:05d}" for i in range(spec.n)),
        col_names=names,
    )
    params = GenerativeParams(
        beta=spec.beta,
        prop=prop,
        acc=acc,
        edges=tuple(sorted(edge_tables, key=lambda e: (e.j, e.k))),
        col_names=names,
        meta={"source": "sample_dataset", "seed": spec.seed},
    )
    return matrix, y.astype(np.int64), params


# ---------------------------------------------------------------------------
# Templated text reports

_PNEUMO_TERMS = ("pneumothorax", "pneumonia", "pneumomediastinum")
_OTHER_TERMS = (
    "pleural effusion",
    "hemorrhage",
    "fracture",
    "consolidation",
    "cardiomegaly",
    "opacity",
    "edema",
)
ABNORMAL_TERMS = _PNEUMO_TERMS + _OTHER_TERMS

_DESCRIPTORS = ("large", "small", "moderate", "acute", "subtle", "right", "left", "bilateral")
_NORMAL_FINDINGS = (
    "lungs are clear",
    "heart size is normal",
    "no focal consolidation",
    "bony structures are intact",
    "mediastinal contours are unremarkable",
    "visualized soft tissues are normal",
)
_FILLER = (
    "comparison with prior exam",
    "technique is standard",
    "study quality is adequate",
    "clinical correlation is recommended",
    "followup imaging may be considered",
    "patient positioning is satisfactory",
)
_INDICATIONS = ("cough", "fever", "trauma", "chest pain", "shortness of breath", "followup")
_NEGATION_TEMPLATES = (
    "no {t}",
    "no evidence of {t}",
    "without {t}",
    "negative for {t}",
)
_NORMAL_IMPRESSIONS = (
    "no acute abnormality",
    "normal study",
    "unremarkable examination",
)


def gen_text_corpus(
    n: int,
    seed: int,
    pos_rate: float = 0.3,
    dev_size: Optional[int] = None,
) -> tuple[Corpus, list[DevLabel], dict[str, int]]:
    """Templated chest-report corpus with known per-document truth.

    Positive documents mention abnormality terms (weighted toward the
    "pneumo"-prefixed family) in FINDINGS and usually in IMPRESSION, but
    also carry incidental normal findings and pertinent negatives; negative
    documents tend to be shorter, mention only normal findings plus the
    occasional *negated* abnormality, and close with a normal impression.
    Every simple rule one might write over this text errs on both classes,
    which is the regime vote aggregation is for. Returns (corpus, dev
    labels, truth map). Dev labels default to ``min(200, max(10, n // 5))``
    documents.
    """
    if n < 10:
        raise ValueError("corpus generation needs at least 10 documents")
    if not 0.0 < pos_rate < 1.0:
        raise ValueError(f"pos_rate must lie in (0, 1), got {pos_rate}")
    rng = np.random.default_rng(seed)
    if dev_size is None:
        dev_size = min(200, max(10, n // 5))
    if not 0 < dev_size <= n:
        raise ValueError(f"dev_size must lie in (0, {n}], got {dev_size}")

    def pick(seq):
        return seq[rng.integers(0, len(seq))]

    # weight the pneumo family so the classic prefix rule has high coverage
    term_weights = np.array([0.18, 0.18, 0.09] + [0.55 / 7] * 7)
    # negated mentions draw mostly from the non-pneumo terms
    neg_weights = np.array([0.05, 0.05, 0.05] + [0.85 / 7] * 7)

    docs: list[Document] = []
    truth: dict[str, int] = {}
    for i in range(n):
        doc_id = f"r{i:05d}"
        positive = bool(rng.random() < pos_rate)
        indication = pick(_INDICATIONS)
        findings: list[str] = []
        if positive:
            k_terms = int(rng.integers(1, 4))
            terms = list(
                rng.choice(len(ABNORMAL_TERMS), size=k_terms, replace=False, p=term_weights)
            )
            for t in terms:
                findings.append(f"{pick(_DESCRIPTORS)} {ABNORMAL_TERMS[t]} is seen")
            if rng.random() < 0.5:
                findings.append(pick(_NORMAL_FINDINGS))
            if rng.random() < 0.25:
                # pertinent negative alongside real findings
                other = ABNORMAL_TERMS[int(rng.choice(len(ABNORMAL_TERMS), p=neg_weights))]
                findings.append(f"no acute {other}")
            for _ in range(int(rng.integers(1, 4))):
                findings.append(pick(_FILLER))
            if rng.random() < 0.12:
                impression = pick(_NORMAL_IMPRESSIONS)  # subtle case read as clean
            else:
                impression = f"{pick(_DESCRIPTORS)} {ABNORMAL_TERMS[terms[0]]}"
            if rng.random() < 0.15:
                findings = findings[:2]
        else:
            for _ in range(int(rng.integers(1, 3))):
                findings.append(pick(_NORMAL_FINDINGS))
            if rng.random() < 0.35:
                template = pick(_NEGATION_TEMPLATES)
                term = ABNORMAL_TERMS[int(rng.choice(len(ABNORMAL_TERMS), p=neg_weights))]
                findings.append(template.format(t=term))
            if rng.random() < 0.5:
                for _ in range(int(rng.integers(1, 3))):
                    findings.append(pick(_FILLER))
            impression = pick(_NORMAL_IMPRESSIONS)
        rng.shuffle(findings)
        text = (
            f"EXAM: chest radiograph. INDICATION: {indication}. "
            f"FINDINGS: {'. '.join(findings)}. "
            f"IMPRESSION: {impression}."
        )
        docs.append(Document(id=doc_id, text=text))
        truth[doc_id] = 1 if positive else -1

    dev_rows = sorted(rng.choice(n, size=dev_size, replace=False))
    dev = [DevLabel(doc_id=docs[i].id, y=truth[docs[i].id]) for i in dev_rows]
    return Corpus(documents=tuple(docs)), dev, truth


def gen_features(
    y: np.ndarray,
    d: int,
    noise_sigma: float,
    seed: int,
    doc_ids: Optional[Sequence[str]] = None,
    mu: float = 0.3,
) -> FeatureMatrix:
    """Class-conditional Gaussian features: mean +/- mu per dimension.

    The Bayes-optimal linear score has AUC Phi(mu * sqrt(2 d) / sigma),
    which :func:`optimal_auc` reports for test oracles.
    """
    y = np.asarray(y)
    if not np.isin(y, (-1, 1)).all():
        raise ValueError("y must be -1/+1")
    if d < 1 or noise_sigma <= 0:
        raise ValueError("d must be positive and noise_sigma > 0")
    rng = np.random.default_rng(seed)
    n = len(y)
    X = mu * y[:, None] + noise_sigma * rng.standard_normal((n, d))
    if doc_ids is None:
        doc_ids = tuple(f"s{i:05d}" for i in range(n))
    return FeatureMatrix(tuple(doc_ids), X)


def optimal_auc(d: int, noise_sigma: float, mu: float = 0.3) -> float:
    """AUC of the Bayes-optimal scorer for :func:`gen_features` data."""
    return float(norm.cdf(mu * np.sqrt(2.0 * d) / noise_sigma))
