"""Probabilistic labels: per-document posterior P(y=+1) plus export contract.

The JSONL export (one ``{"doc_id":…, "p":…, "excluded":…}`` object per line)
is the hand-off format consumed by downstream trainers. Documents carrying a
dev-set label are flagged ``excluded`` so they are never used as training
data.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np


@dataclass(frozen=True)
class ProbLabels:
    """Posterior probability of the positive class for every document."""

    doc_ids: tuple[str, ...]
    p: np.ndarray
    model_version: str = ""
    excluded_ids: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        p = np.asarray(self.p, dtype=np.float64)
        object.__setattr__(self, "p", p)
        if p.ndim != 1 or len(p) != len(self.doc_ids):
            raise ValueError("p must be a vector aligned with doc_ids")
        if len(set(self.doc_ids)) != len(self.doc_ids):
            raise ValueError("doc_ids must be unique")
        if not np.all(np.isfinite(p)) or np.any(p < 0.0) or np.any(p > 1.0):
            raise ValueError("probabilities must lie in [0, 1]")
        unknown = self.excluded_ids - set(self.doc_ids)
        if unknown:
            raise ValueError(f"excluded ids not present: {sorted(unknown)[:3]}")
        self.p.setflags(write=False)

    def __len__(self) -> int:
        return len(self.doc_ids)

    def prob_for(self, doc_id: str) -> float:
        return float(self.p[self.doc_ids.index(doc_id)])

    def training_view(self) -> tuple[list[str], np.ndarray]:
        """Ids and probabilities with excluded (dev) documents dropped."""
        keep = [i for i, d in enumerate(self.doc_ids) if d not in self.excluded_ids]
        return [self.doc_ids[i] for i in keep], self.p[keep]

    def to_jsonl(self) -> str:
        lines = []
        for doc_id, prob in zip(self.doc_ids, self.p):
            lines.append(
                json.dumps(
                    {
                        "doc_id": doc_id,
                        "p": float(prob),
                        "excluded": doc_id in self.excluded_ids,
                    },
                    sort_keys=True,
                )
            )
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str, model_version: str = "") -> "ProbLabels":
        doc_ids: list[str] = []
        probs: list[float] = []
        excluded: set[str] = set()
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            obj = json.loads(line)
            try:
                doc_id = str(obj["doc_id"])
                prob = float(obj["p"])
                is_excluded = bool(obj.get("excluded", False))
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"labels line {lineno}: {exc}") from exc
            doc_ids.append(doc_id)
            probs.append(prob)
            if is_excluded:
                excluded.add(doc_id)
        return cls(
            doc_ids=tuple(doc_ids),
            p=np.asarray(probs, dtype=np.float64),
            model_version=model_version,
            excluded_ids=frozenset(excluded),
        )


def labels_for(prob_labels: ProbLabels, doc_ids: Iterable[str]) -> np.ndarray:
    """Probabilities re-ordered to ``doc_ids``; raises on unknown ids."""
    index = {d: i for i, d in enumerate(prob_labels.doc_ids)}
    try:
        rows = [index[d] for d in doc_ids]
    except KeyError as exc:
        raise KeyError(f"doc id {exc.args[0]!r} has no probabilistic label") from exc
    return prob_labels.p[rows]
