"""Generative model over labeling-function votes.

Each document carries a latent binary class y in {-1, +1} with prior
P(y=+1) = beta. Conditioned on y, labeling functions emit votes
independently -- except for explicitly declared dependent pairs, which share
a full joint table over their 3 x 3 vote combinations. An independent LF j
is described by a propensity q_j = P(vote != 0) and an accuracy
a_j = P(vote = y | vote != 0).

Fitting maximizes the exact marginal likelihood of the observed vote matrix
(latent classes summed out analytically) by full-batch gradient descent on
reparameterized values: logits for beta/q/a and per-class softmax logits for
dependency tables, so every probability stays strictly interior. A
backtracking line search keeps the objective monotone, which makes runs
deterministic and restart-free.

The likelihood has an inherent label-flip symmetry: replacing beta by
1 - beta, every accuracy by 1 - a, and reflecting dependency tables across
the class axis leaves it unchanged. Fits resolve the ambiguity by starting
accuracies above chance and, if the solution still lands on the mirrored
mode, returning the flipped (mean-accuracy >= 0.5) twin.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Union

import numpy as np

from .corpus import DevLabel
from .matrix import LabelMatrix
from .prob_labels import ProbLabels

Votes = Union[LabelMatrix, np.ndarray]


@dataclass(frozen=True)
class EdgeTable:
    """Joint vote distribution P(v_j, v_k | y) for one dependent LF pair.

    ``table[c, s, t]`` is the probability of votes (s-1, t-1) for LFs (j, k)
    given class c (index 0 -> y = -1, index 1 -> y = +1). Each class slice
    sums to one.
    """

    j: int
    k: int
    table: np.ndarray

    def __post_init__(self) -> None:
        t = np.asarray(self.table, dtype=np.float64)
        object.__setattr__(self, "table", t)
        object.__setattr__(self, "j", int(self.j))
        object.__setattr__(self, "k", int(self.k))
        if self.j >= self.k:
            raise ValueError(f"edge indices must satisfy j < k, got ({self.j}, {self.k})")
        if t.shape != (2, 3, 3):
            raise ValueError(f"edge table must be 2x3x3, got shape {t.shape}")
        if np.any(t < 0) or np.any(t > 1):
            raise ValueError("edge table entries must be probabilities")
        sums = t.reshape(2, 9).sum(axis=1)
        if not np.allclose(sums, 1.0, atol=1e-9):
            raise ValueError(f"edge table class slices must sum to 1, got {sums}")
        t.setflags(write=False)


@dataclass(frozen=True)
class DependencyStructure:
    """A matching over LF columns plus the scores that produced it."""

    edges: tuple[tuple[int, int], ...] = ()
    scores: dict = field(default_factory=dict)
    threshold: Optional[float] = None

    def __post_init__(self) -> None:
        seen: set[int] = set()
        for j, k in self.edges:
            if j >= k:
                raise ValueError(f"edges must be ordered pairs j < k, got ({j}, {k})")
            if j in seen or k in seen:
                raise ValueError(f"edge ({j}, {k}) reuses an LF already paired")
            seen.update((j, k))
        object.__setattr__(self, "edges", tuple(sorted(self.edges)))

    @classmethod
    def empty(cls) -> "DependencyStructure":
        return cls()


@dataclass(frozen=True)
class GenerativeParams:
    """Fitted (or hand-specified) model parameters.

    ``prop``/``acc`` hold per-LF marginals for all m LFs; for LFs belonging
    to an edge these are the marginals implied by the joint table and are
    informational -- the likelihood uses the joint table directly.
    """

    beta: float
    prop: np.ndarray
    acc: np.ndarray
    edges: tuple[EdgeTable, ...] = ()
    col_names: tuple[str, ...] = ()
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        prop = np.asarray(self.prop, dtype=np.float64)
        acc = np.asarray(self.acc, dtype=np.float64)
        object.__setattr__(self, "prop", prop)
        object.__setattr__(self, "acc", acc)
        if not 0.0 < self.beta < 1.0:
            raise ValueError(f"class balance must lie in (0, 1), got {self.beta}")
        if prop.ndim != 1 or acc.shape != prop.shape:
            raise ValueError("prop and acc must be equal-length vectors")
        if np.any(prop < 0) or np.any(prop > 1) or np.any(acc < 0) or np.any(acc > 1):
            raise ValueError("propensities and accuracies must lie in [0, 1]")
        if self.col_names and len(self.col_names) != len(prop):
            raise ValueError("col_names length does not match parameter vectors")
        seen: set[int] = set()
        for e in self.edges:
            if e.k >= len(prop):
                raise ValueError(f"edge ({e.j}, {e.k}) out of range for m={len(prop)}")
            if e.j in seen or e.k in seen:
                raise ValueError("edges must form a matching")
            seen.update((e.j, e.k))
        prop.setflags(write=False)
        acc.setflags(write=False)

    @property
    def m(self) -> int:
        return len(self.prop)

    def edge_members(self) -> set[int]:
        out: set[int] = set()
        for e in self.edges:
            out.update((e.j, e.k))
        return out

    def flipped(self) -> "GenerativeParams":
        """The mirror-image parameter set (same likelihood for any matrix)."""
        return replace(
            self,
            beta=1.0 - self.beta,
            acc=1.0 - self.acc,
            edges=tuple(
                EdgeTable(e.j, e.k, e.table[::-1].copy()) for e in self.edges
            ),
        )

    def to_dict(self) -> dict:
        names = self.col_names or tuple(f"lf{j}" for j in range(self.m))
        return {
            "beta": float(self.beta),
            "lfs": [
                {
                    "name": names[j],
                    "propensity": float(self.prop[j]),
                    "accuracy": float(self.acc[j]),
                }
                for j in range(self.m)
            ],
            "edges": [
                {
                    "j": e.j,
                    "k": e.k,
                    "names": [names[e.j], names[e.k]],
                    "table": [[list(map(float, row)) for row in cls] for cls in e.table],
                }
                for e in self.edges
            ],
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "GenerativeParams":
        return cls(
            beta=float(obj["beta"]),
            prop=np.array([lf["propensity"] for lf in obj["lfs"]]),
            acc=np.array([lf["accuracy"] for lf in obj["lfs"]]),
            edges=tuple(
                EdgeTable(int(e["j"]), int(e["k"]), np.array(e["table"]))
                for e in obj.get("edges", ())
            ),
            col_names=tuple(lf["name"] for lf in obj["lfs"]),
            meta=dict(obj.get("meta", {})),
        )

    def version(self) -> str:
        payload = self.to_dict()
        payload.pop("meta", None)
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class FitConfig:
    """Optimizer settings for :func:`fit`.

    ``pin_beta`` freezes the class balance at a known value (e.g. a dev-set
    positive rate) instead of learning it.
    """

    max_iter: int = 500
    tol: float = 1e-7
    step: float = 0.1
    init_accuracy: float = 0.7
    init_beta: float = 0.5
    pin_beta: Optional[float] = None
    seed: int = 0
    record_trace: bool = False

    def __post_init__(self) -> None:
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.tol <= 0 or self.step <= 0:
            raise ValueError("tol and step must be positive")
        if not 0.0 < self.init_accuracy < 1.0 or not 0.0 < self.init_beta < 1.0:
            raise ValueError("init_accuracy and init_beta must lie in (0, 1)")
        if self.pin_beta is not None and not 0.0 < self.pin_beta < 1.0:
            raise ValueError("pin_beta must lie in (0, 1)")


def _as_dense(votes: Votes) -> np.ndarray:
    if isinstance(votes, LabelMatrix):
        dense = votes.to_dense()
    else:
        dense = np.asarray(votes, dtype=np.int8)
        if dense.ndim == 1:
            dense = dense[None, :]
    if not np.isin(dense, (-1, 0, 1)).all():
        raise ValueError("votes must be -1, 0 or +1")
    return dense


def _log_lookup(params: GenerativeParams):
    """Per-class log-probability tables for vectorized row likelihoods.

    Returns (L_neg, L_pos) of shape (m, 3) indexed by vote+1, with columns
    belonging to edges zeroed out, plus per-edge flattened log tables.
    """
    m = params.m
    with np.errstate(divide="ignore"):
        log_q = np.log(params.prop)
        log_nq = np.log1p(-params.prop)
        log_a = np.log(params.acc)
        log_na = np.log1p(-params.acc)
        edge_logs = [np.log(e.table.reshape(2, 9)) for e in params.edges]
    L_pos = np.stack([log_q + log_na, log_nq, log_q + log_a], axis=1)
    L_neg = np.stack([log_q + log_a, log_nq, log_q + log_na], axis=1)
    members = params.edge_members()
    if members:
        idx = sorted(members)
        L_pos[idx] = 0.0
        L_neg[idx] = 0.0
    return L_neg, L_pos, edge_logs


def _row_class_logps(dense: np.ndarray, params: GenerativeParams):
    """log P(row, y=-1) and log P(row, y=+1) for every row."""
    n, m = dense.shape
    if m != params.m:
        raise ValueError(f"matrix has {m} columns but params describe {params.m} LFs")
    L_neg, L_pos, edge_logs = _log_lookup(params)
    idx = dense.astype(np.intp) + 1
    cols = np.arange(m)
    s_pos = L_pos[cols, idx].sum(axis=1)
    s_neg = L_neg[cols, idx].sum(axis=1)
    for e, logs in zip(params.edges, edge_logs):
        cells = idx[:, e.j] * 3 + idx[:, e.k]
        s_neg += logs[0, cells]
        s_pos += logs[1, cells]
    with np.errstate(divide="ignore"):
        lp_pos = np.log(params.beta) + s_pos
        lp_neg = np.log1p(-params.beta) + s_neg
    return lp_neg, lp_pos


def log_marginal_likelihood(votes: Votes, params: GenerativeParams) -> float:
    """Exact log P(matrix) with the latent classes summed out, over all rows."""
    dense = _as_dense(votes)
    lp_neg, lp_pos = _row_class_logps(dense, params)
    return float(np.logaddexp(lp_neg, lp_pos).sum())


def predict_proba(params: GenerativeParams, votes: Votes) -> np.ndarray:
    """Posterior P(y=+1 | row) for each vote row."""
    dense = _as_dense(votes)
    lp_neg, lp_pos = _row_class_logps(dense, params)
    total = np.logaddexp(lp_neg, lp_pos)
    return np.exp(lp_pos - total)


# ---------------------------------------------------------------------------
# Fitting


class _FitSpace:
    """Packing/unpacking between the flat optimizer vector and parameters.

    Layout: [beta logit (unless pinned)] + [q logits, singletons] +
    [a logits, singletons] + [18 softmax logits per edge (class -1 slice
    first)]. Singletons are the LF columns not covered by any edge.
    """

    def __init__(self, m: int, edges: tuple[tuple[int, int], ...], pin_beta):
        self.m = m
        self.edges = edges
        members = {i for jk in edges for i in jk}
        self.singles = np.array(sorted(set(range(m)) - members), dtype=np.intp)
        self.pin_beta = pin_beta
        self.nb = 0 if pin_beta is not None else 1
        self.ns = len(self.singles)
        self.size = self.nb + 2 * self.ns + 18 * len(edges)

    def initial(self, coverage: np.ndarray, cfg: FitConfig) -> np.ndarray:
        theta = np.zeros(self.size)
        beta0 = cfg.pin_beta if cfg.pin_beta is not None else cfg.init_beta
        if self.nb:
            theta[0] = _logit(cfg.init_beta)
        q0 = np.clip(coverage, 1e-6, 1 - 1e-6)
        a0 = cfg.init_accuracy
        theta[self.nb : self.nb + self.ns] = _logit(q0[self.singles])
        theta[self.nb + self.ns : self.nb + 2 * self.ns] = _logit(a0)
        off = self.nb + 2 * self.ns
        for j, k in self.edges:
            # start each joint table at the independent product implied by
            # (q, a0) so an edge-aware fit begins from the independent fit
            pj = _marginal_cell_probs(q0[j], a0)
            pk = _marginal_cell_probs(q0[k], a0)
            for c in (0, 1):
                prod = np.outer(pj[c], pk[c]).ravel()
                theta[off : off + 9] = np.log(prod)
                off += 9
        return theta

    def unpack(self, theta: np.ndarray) -> GenerativeParams:
        beta = self.pin_beta if self.pin_beta is not None else _sigmoid(theta[0])
        prop = np.full(self.m, np.nan)
        acc = np.full(self.m, np.nan)
        prop[self.singles] = _sigmoid(theta[self.nb : self.nb + self.ns])
        acc[self.singles] = _sigmoid(theta[self.nb + self.ns : self.nb + 2 * self.ns])
        off = self.nb + 2 * self.ns
        edge_tables = []
        for j, k in self.edges:
            table = np.empty((2, 3, 3))
            for c in (0, 1):
                z = theta[off : off + 9]
                table[c] = _softmax(z).reshape(3, 3)
                off += 9
            edge_tables.append(EdgeTable(j, k, table))
            q_j, a_j, q_k, a_k = _implied_marginals(table)
            prop[j], acc[j], prop[k], acc[k] = q_j, a_j, q_k, a_k
        return GenerativeParams(beta=float(beta), prop=prop, acc=acc, edges=tuple(edge_tables))


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(x, dtype=np.float64)))


def _logit(p):
    p = np.asarray(p, dtype=np.float64)
    return np.log(p) - np.log1p(-p)


def _softmax(z):
    z = z - z.max()
    e = np.exp(z)
    return e / e.sum()


def _marginal_cell_probs(q: float, a: float) -> np.ndarray:
    """(2, 3) array of P(vote | y) rows: class -1 then class +1."""
    return np.array(
        [[q * a, 1 - q, q * (1 - a)], [q * (1 - a), 1 - q, q * a]]
    )


def _implied_marginals(table: np.ndarray) -> tuple[float, float, float, float]:
    """Class-balanced (q, a) marginals implied by a joint table.

    Uses an even class prior so the summary does not depend on beta; it is
    reported for diagnostics only.
    """
    pj = 0.5 * (table[0].sum(axis=1) + table[1].sum(axis=1)[::-1])
    pk = 0.5 * (table[0].sum(axis=0) + table[1].sum(axis=0)[::-1])

    def qa(p):
        q = p[0] + p[2]
        # index 0 holds the agreeing vote for class -1 in the reflected sum
        a = p[0] / q if q > 0 else 0.5
        return float(q), float(a)

    q_j, a_j = qa(pj)
    q_k, a_k = qa(pk)
    return q_j, a_j, q_k, a_k


class _Objective:
    """Mean negative log-likelihood and its exact gradient.

    Precomputes per-column vote masks so each evaluation is a handful of
    vectorized gathers and reductions.
    """

    def __init__(self, dense: np.ndarray, space: _FitSpace):
        self.space = space
        self.n, self.m = dense.shape
        self.idx = dense.astype(np.intp) + 1
        self.cols = np.arange(self.m)
        s = space.singles
        self.cov_s = (dense[:, s] != 0).mean(axis=0)
        self.pos_s = (dense[:, s] == 1).astype(np.float64)
        self.neg_s = (dense[:, s] == -1).astype(np.float64)
        self.votes_s = self.pos_s.sum(axis=0) + self.neg_s.sum(axis=0)
        self.edge_cells = [
            self.idx[:, j] * 3 + self.idx[:, k] for j, k in space.edges
        ]

    def _tables(self, theta):
        sp_ = self.space
        b = None if sp_.nb == 0 else theta[0]
        u = theta[sp_.nb : sp_.nb + sp_.ns]
        v = theta[sp_.nb + sp_.ns : sp_.nb + 2 * sp_.ns]
        log_q = -np.logaddexp(0.0, -u)
        log_nq = -np.logaddexp(0.0, u)
        log_a = -np.logaddexp(0.0, -v)
        log_na = -np.logaddexp(0.0, v)
        L_pos = np.zeros((self.m, 3))
        L_neg = np.zeros((self.m, 3))
        s = sp_.singles
        L_pos[s, 0] = log_q + log_na
        L_pos[s, 1] = log_nq
        L_pos[s, 2] = log_q + log_a
        L_neg[s, 0] = log_q + log_a
        L_neg[s, 1] = log_nq
        L_neg[s, 2] = log_q + log_na
        off = sp_.nb + 2 * sp_.ns
        edge_logp = []
        for _ in sp_.edges:
            z = theta[off : off + 18].reshape(2, 9)
            logp = z - _logsumexp_rows(z)
            edge_logp.append(logp)
            off += 18
        if sp_.pin_beta is not None:
            log_beta = np.log(sp_.pin_beta)
            log_nbeta = np.log1p(-sp_.pin_beta)
        else:
            log_beta = -np.logaddexp(0.0, -b)
            log_nbeta = -np.logaddexp(0.0, b)
        return L_neg, L_pos, edge_logp, log_beta, log_nbeta

    def value(self, theta) -> float:
        L_neg, L_pos, edge_logp, log_beta, log_nbeta = self._tables(theta)
        s_pos = L_pos[self.cols, self.idx].sum(axis=1) + log_beta
        s_neg = L_neg[self.cols, self.idx].sum(axis=1) + log_nbeta
        for cells, logp in zip(self.edge_cells, edge_logp):
            s_neg += logp[0, cells]
            s_pos += logp[1, cells]
        return float(-np.logaddexp(s_neg, s_pos).mean())

    def value_and_grad(self, theta):
        sp_ = self.space
        L_neg, L_pos, edge_logp, log_beta, log_nbeta = self._tables(theta)
        s_pos = L_pos[self.cols, self.idx].sum(axis=1) + log_beta
        s_neg = L_neg[self.cols, self.idx].sum(axis=1) + log_nbeta
        for cells, logp in zip(self.edge_cells, edge_logp):
            s_neg += logp[0, cells]
            s_pos += logp[1, cells]
        total = np.logaddexp(s_neg, s_pos)
        nll = float(-total.mean())
        r_pos = np.exp(s_pos - total)
        r_neg = 1.0 - r_pos

        grad = np.zeros_like(theta)
        beta = np.exp(log_beta)
        if sp_.nb:
            grad[0] = beta - r_pos.mean()
        # propensity gradient decouples from the posterior: coverage match
        u = theta[sp_.nb : sp_.nb + sp_.ns]
        v = theta[sp_.nb + sp_.ns : sp_.nb + 2 * sp_.ns]
        q = _sigmoid(u)
        a = _sigmoid(v)
        grad[sp_.nb : sp_.nb + sp_.ns] = q - self.cov_s
        agree = self.pos_s.T @ r_pos + self.neg_s.T @ r_neg
        grad[sp_.nb + sp_.ns : sp_.nb + 2 * sp_.ns] = (a * self.votes_s - agree) / self.n
        off = sp_.nb + 2 * sp_.ns
        for cells, logp in zip(self.edge_cells, edge_logp):
            p = np.exp(logp)
            w_neg = np.bincount(cells, weights=r_neg, minlength=9)
            w_pos = np.bincount(cells, weights=r_pos, minlength=9)
            grad[off : off + 9] = -(w_neg - r_neg.sum() * p[0]) / self.n
            grad[off + 9 : off + 18] = -(w_pos - r_pos.sum() * p[1]) / self.n
            off += 18
        return nll, grad


def _logsumexp_rows(z: np.ndarray) -> np.ndarray:
    m = z.max(axis=1, keepdims=True)
    return m + np.log(np.exp(z - m).sum(axis=1, keepdims=True))


def nll_and_grad(
    votes: Votes,
    theta: np.ndarray,
    edges: tuple[tuple[int, int], ...] = (),
    pin_beta: Optional[float] = None,
) -> tuple[float, np.ndarray]:
    """Mean negative log-likelihood and exact gradient at a flat point.

    Exposed for verification: the gradient is analytic and can be checked
    against finite differences of :func:`log_marginal_likelihood`.
    """
    dense = _as_dense(votes)
    space = _FitSpace(dense.shape[1], tuple(edges), pin_beta)
    if len(theta) != space.size:
        raise ValueError(f"theta has length {len(theta)}, expected {space.size}")
    return _Objective(dense, space).value_and_grad(np.asarray(theta, dtype=np.float64))


def unpack_theta(
    theta: np.ndarray,
    m: int,
    edges: tuple[tuple[int, int], ...] = (),
    pin_beta: Optional[float] = None,
) -> GenerativeParams:
    """Structured parameters for a flat optimizer vector (see nll_and_grad)."""
    return _FitSpace(m, tuple(edges), pin_beta).unpack(np.asarray(theta, dtype=np.float64))


def fit(
    matrix: Votes,
    structure: Optional[DependencyStructure] = None,
    config: Optional[FitConfig] = None,
) -> GenerativeParams:
    """Maximum-likelihood parameters for a vote matrix.

    Runs monotone full-batch gradient descent with backtracking line search
    until the relative objective improvement drops below ``config.tol`` or
    ``config.max_iter`` is reached. Deterministic: identical inputs produce
    identical parameters.
    """
    cfg = config or FitConfig()
    edges = structure.edges if structure is not None else ()
    dense = _as_dense(matrix)
    n, m = dense.shape
    if n == 0:
        raise ValueError("cannot fit on an empty matrix")
    for j, k in edges:
        if k >= m:
            raise ValueError(f"structure edge ({j}, {k}) out of range for m={m}")

    space = _FitSpace(m, tuple(edges), cfg.pin_beta)
    obj = _Objective(dense, space)
    coverage = (dense != 0).mean(axis=0)
    smoothed = ((dense != 0).sum(axis=0) + 1) / (n + 2)
    theta = space.initial(smoothed, cfg)

    f, g = obj.value_and_grad(theta)
    step = cfg.step
    iterations = 0
    converged = False
    trace = [f]
    for _ in range(cfg.max_iter):
        gnorm2 = float(g @ g)
        if gnorm2 == 0.0:
            converged = True
            break
        trial = step
        accepted = False
        for _ in range(60):
            cand = theta - trial * g
            fc = obj.value(cand)
            if fc <= f - 1e-4 * trial * gnorm2:
                accepted = True
                break
            trial *= 0.5
        if not accepted:
            converged = True  # no descent possible at float precision
            break
        iterations += 1
        rel = (f - fc) / max(abs(f), 1e-300)
        theta = cand
        f, g = obj.value_and_grad(theta)
        trace.append(f)
        step = min(cfg.step, trial * 2.0)
        if rel < cfg.tol:
            converged = True
            break

    params = space.unpack(theta)
    # fill informational marginals for edge members from their joint tables;
    # singleton entries are exact from the fit
    col_names = matrix.col_names if isinstance(matrix, LabelMatrix) else ()
    meta = {
        "iterations": iterations,
        "converged": converged,
        "final_nll": f,
        "n": n,
        "coverage": [float(c) for c in coverage],
    }
    if cfg.record_trace:
        meta["nll_trace"] = trace
    params = replace(params, col_names=col_names, meta=meta)
    if params.acc.mean() < 0.5 and (cfg.pin_beta is None or cfg.pin_beta == 0.5):
        params = replace(params.flipped(), meta={**params.meta, "flipped": True})
    return params


def learn_structure(
    matrix: Votes,
    threshold: float = 0.05,
    config: Optional[FitConfig] = None,
) -> DependencyStructure:
    """Greedy dependency discovery from independent-fit residuals.

    Fits the fully independent model, then scores each LF pair by the total
    absolute difference between the empirical joint vote distribution and
    the one the independent fit implies. Pairs are added greedily (largest
    score first) while scores exceed ``threshold``, never reusing an LF, so
    the result is a matching.
    """
    if threshold <= 0:
        raise ValueError(f"threshold must be positive, got {threshold}")
    dense = _as_dense(matrix)
    n, m = dense.shape
    params = fit(dense, None, config)

    per_lf = np.stack(
        [_marginal_cell_probs(params.prop[j], params.acc[j]) for j in range(m)]
    )  # (m, 2, 3)
    idx = dense.astype(np.intp) + 1
    scores: dict[tuple[int, int], float] = {}
    for j in range(m):
        for k in range(j + 1, m):
            counts = np.bincount(idx[:, j] * 3 + idx[:, k], minlength=9)
            empirical = counts.reshape(3, 3) / n
            implied = (1 - params.beta) * np.outer(per_lf[j, 0], per_lf[k, 0]) + (
                params.beta
            ) * np.outer(per_lf[j, 1], per_lf[k, 1])
            scores[(j, k)] = float(np.abs(empirical - implied).sum())

    used: set[int] = set()
    edges: list[tuple[int, int]] = []
    for (j, k), d in sorted(scores.items(), key=lambda kv: (-kv[1], kv[0])):
        if d <= threshold:
            break
        if j in used or k in used:
            continue
        edges.append((j, k))
        used.update((j, k))
    return DependencyStructure(edges=tuple(edges), scores=scores, threshold=threshold)


def emit_labels(
    matrix: LabelMatrix,
    params: GenerativeParams,
    dev: Sequence[DevLabel] | Sequence[str] = (),
) -> ProbLabels:
    """Posterior labels for every row, with dev documents flagged excluded."""
    p = predict_proba(params, matrix)
    dev_ids = {d.doc_id if isinstance(d, DevLabel) else str(d) for d in dev}
    unknown = dev_ids - set(matrix.row_ids)
    if unknown:
        raise ValueError(f"dev ids not present in matrix: {sorted(unknown)[:3]}")
    return ProbLabels(
        doc_ids=matrix.row_ids,
        p=p,
        model_version=params.version(),
        excluded_ids=frozenset(dev_ids),
    )
