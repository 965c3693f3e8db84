"""Text-report corpora: loading, section segmentation, and dev-set labels.

A corpus is an ordered, immutable collection of report documents. Documents
are tokenized on load with a deterministic tokenizer (lowercased maximal
alphanumeric runs) so that rule evaluation downstream is reproducible across
platforms. Section segmentation is configuration-driven: callers supply the
literal header strings used by their report format.
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path
from typing import Iterator, Sequence

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

PREAMBLE = "PREAMBLE"


class CorpusError(ValueError):
    """Raised for malformed corpus or dev-label inputs."""


def tokenize(text: str) -> list[str]:
    """Lowercased maximal alphanumeric runs, in order of appearance."""
    return [m.group(0).lower() for m in _TOKEN_RE.finditer(text)]


def tokenize_with_spans(text: str) -> tuple[list[str], list[tuple[int, int]]]:
    """Tokens plus their (start, end) character offsets in ``text``."""
    tokens: list[str] = []
    spans: list[tuple[int, int]] = []
    for m in _TOKEN_RE.finditer(text):
        tokens.append(m.group(0).lower())
        spans.append((m.start(), m.end()))
    return tokens, spans


@dataclass(frozen=True)
class Section:
    """A named span of the report body, [start, end) in character offsets."""

    name: str
    start: int
    end: int


@dataclass(frozen=True)
class Document:
    """One report. Immutable; segmentation returns a new value."""

    id: str
    text: str
    sections: tuple[Section, ...] = ()

    def __post_init__(self) -> None:
        prev_end = 0
        for sec in self.sections:
            if not (0 <= sec.start <= sec.end <= len(self.text)):
                raise CorpusError(
                    f"document {self.id!r}: section {sec.name!r} span "
                    f"({sec.start}, {sec.end}) out of bounds"
                )
            if sec.start < prev_end:
                raise CorpusError(
                    f"document {self.id!r}: section {sec.name!r} overlaps the "
                    "preceding section"
                )
            prev_end = sec.end

    @cached_property
    def tokens(self) -> tuple[str, ...]:
        return tuple(tokenize(self.text))

    @cached_property
    def token_spans(self) -> tuple[tuple[int, int], ...]:
        _, spans = tokenize_with_spans(self.text)
        return tuple(spans)

    @property
    def token_count(self) -> int:
        return len(self.tokens)

    def sections_named(self, name: str) -> tuple[Section, ...]:
        return tuple(s for s in self.sections if s.name == name)


@dataclass(frozen=True)
class Corpus:
    """Ordered set of documents with unique ids."""

    documents: tuple[Document, ...]
    source_path: str = ""
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        index: dict[str, int] = {}
        for i, doc in enumerate(self.documents):
            if doc.id in index:
                raise CorpusError(f"duplicate document id {doc.id!r}")
            index[doc.id] = i
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self) -> Iterator[Document]:
        return iter(self.documents)

    def __getitem__(self, doc_id: str) -> Document:
        return self.documents[self._index[doc_id]]

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._index

    @property
    def ids(self) -> list[str]:
        return [d.id for d in self.documents]

    def map_documents(self, fn) -> "Corpus":
        """New corpus with ``fn`` applied to every document, order kept."""
        return Corpus(
            documents=tuple(fn(d) for d in self.documents),
            source_path=self.source_path,
        )


@dataclass(frozen=True)
class DevLabel:
    """Hand label for one document: y is -1 or +1."""

    doc_id: str
    y: int


def load_corpus(path: str | Path, id_field: str = "id", text_field: str = "text") -> Corpus:
    """Load a JSONL corpus, one object per line, preserving file order.

    Raises CorpusError with the offending line number for malformed lines,
    missing fields, or duplicate ids.
    """
    path = Path(path)
    documents: list[Document] = []
    seen: dict[str, int] = {}
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}: malformed JSON on line {lineno}: {exc}") from exc
            if not isinstance(obj, dict):
                raise CorpusError(f"{path}: line {lineno} is not a JSON object")
            for name in (id_field, text_field):
                if name not in obj:
                    raise CorpusError(f"{path}: line {lineno} missing field {name!r}")
            doc_id = obj[id_field]
            if not isinstance(doc_id, (str, int)):
                raise CorpusError(f"{path}: line {lineno}: id must be a string")
            doc_id = str(doc_id)
            text = obj[text_field]
            if not isinstance(text, str):
                raise CorpusError(f"{path}: line {lineno}: text must be a string")
            if doc_id in seen:
                raise CorpusError(
                    f"{path}: duplicate id {doc_id!r} on line {lineno} "
                    f"(first seen on line {seen[doc_id]})"
                )
            seen[doc_id] = lineno
            documents.append(Document(id=doc_id, text=text))
    return Corpus(documents=tuple(documents), source_path=str(path))


def normalize_section_name(header: str) -> str:
    """Canonical section name for a header literal: trimmed, de-coloned, upper."""
    return header.strip().rstrip(":").strip().upper()


def segment_sections(doc: Document, headers: Sequence[str]) -> Document:
    """Split a document into sections at case-insensitive header literals.

    The span of a section runs from the end of its header match to the start
    of the next header (or end of text). Text before the first header is the
    PREAMBLE section, which is always present (possibly empty). A header
    occurring twice yields two sections with the same name. Idempotent.
    """
    matches: list[tuple[int, int, str]] = []
    for header in headers:
        if not header:
            continue
        pattern = re.compile(re.escape(header), re.IGNORECASE)
        name = normalize_section_name(header)
        for m in pattern.finditer(doc.text):
            matches.append((m.start(), m.end(), name))
    # Longest match wins at equal start; later overlapping matches are dropped.
    matches.sort(key=lambda t: (t[0], -(t[1] - t[0])))
    accepted: list[tuple[int, int, str]] = []
    last_end = -1
    for start, end, name in matches:
        if start < last_end:
            continue
        accepted.append((start, end, name))
        last_end = end

    first_start = accepted[0][0] if accepted else len(doc.text)
    sections = [Section(PREAMBLE, 0, first_start)]
    for i, (_, hdr_end, name) in enumerate(accepted):
        span_end = accepted[i + 1][0] if i + 1 < len(accepted) else len(doc.text)
        sections.append(Section(name, hdr_end, span_end))
    return replace(doc, sections=tuple(sections))


def load_dev_labels(path: str | Path, corpus: Corpus) -> list[DevLabel]:
    """Load dev labels from a CSV with header row ``doc_id,y``; y in {-1, 1}.

    Every id must exist in the corpus. Dev-labeled documents are meant for
    rule tuning and evaluation only; exporters downstream flag them as
    excluded from training.
    """
    path = Path(path)
    labels: list[DevLabel] = []
    seen: set[str] = set()
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        rows = list(reader)
    if not rows:
        return []
    header = [c.strip() for c in rows[0]]
    if header[:2] != ["doc_id", "y"]:
        raise CorpusError(f"{path}: expected header 'doc_id,y', got {','.join(header)!r}")
    for rowno, row in enumerate(rows[1:], start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) < 2:
            raise CorpusError(f"{path}: row {rowno} has fewer than 2 columns")
        doc_id = row[0].strip()
        try:
            y = int(row[1])
        except ValueError as exc:
            raise CorpusError(f"{path}: row {rowno}: y must be -1 or 1, got {row[1]!r}") from exc
        if y not in (-1, 1):
            raise CorpusError(f"{path}: row {rowno}: y must be -1 or 1, got {y}")
        if doc_id not in corpus:
            raise CorpusError(f"{path}: row {rowno}: unknown doc_id {doc_id!r}")
        if doc_id in seen:
            raise CorpusError(f"{path}: row {rowno}: duplicate doc_id {doc_id!r}")
        seen.add(doc_id)
        labels.append(DevLabel(doc_id=doc_id, y=y))
    return labels
