"""Rule language for labeling functions.

A labeling function (LF) is a named rule plus an emitted label (+1 or -1).
Applied to a document it returns the emitted label when the rule matches and
0 (abstain) otherwise. Rules are composed from a small set of primitives:

* text matchers  -- ``contains``, ``prefix_word``, ``regex``, ``term_list``
* length guards  -- ``length_below``, ``length_above``
* combinators    -- ``all``, ``any``, ``not``
* scoping        -- ``in_section`` restricts evaluation to a named section
* negation guard -- ``negation_guard`` drops matches preceded by a cue word
  ("no", "not", "without", "negative" by default) within a token window

Matching is case-insensitive at the token level except for ``regex``, which
runs verbatim against the raw text of the current view. LF sets are loaded
from JSON and carry a content hash (``version``) so downstream artifacts can
detect that they were produced by a different rule set.
"""

from __future__ import annotations

import hashlib
import json
import re
from bisect import bisect_right
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .corpus import Corpus, Document, normalize_section_name, tokenize
from .matrix import LabelMatrix

DEFAULT_NEGATION_CUES = frozenset({"no", "not", "without", "negative"})
MAX_RULE_DEPTH = 16


class LFParseError(ValueError):
    """Raised for malformed LF files: bad JSON shape, unknown rule variants,
    invalid regexes, missing term files, duplicate names, or excessive
    nesting."""


@dataclass(frozen=True)
class TokenView:
    """A document restricted to a token range (whole document or a section).

    ``lo``/``hi`` are indices into ``doc.tokens``; ``char_lo``/``char_hi``
    bound the corresponding raw-text slice used for regex evaluation.
    Match positions are reported as *global* token indices so that negation
    cues just before a section boundary are still visible to guards.
    """

    doc: Document
    lo: int
    hi: int
    char_lo: int
    char_hi: int

    @classmethod
    def whole(cls, doc: Document) -> "TokenView":
        return cls(doc, 0, len(doc.tokens), 0, len(doc.text))

    @property
    def tokens(self) -> list[str]:
        return self.doc.tokens[self.lo : self.hi]

    @property
    def token_count(self) -> int:
        return self.hi - self.lo

    def text(self) -> str:
        return self.doc.text[self.char_lo : self.char_hi]

    def token_at_offset(self, offset: int) -> Optional[int]:
        """Global index of the token containing or next after char ``offset``."""
        spans = self.doc.token_spans
        idx = bisect_right(spans, (offset, len(self.doc.text) + 1)) - 1
        if idx >= 0 and spans[idx][1] > offset:
            pos = idx
        else:
            pos = idx + 1
        if self.lo <= pos < self.hi:
            return pos
        return None


class EvalWarnings:
    """Mutable counters for soft evaluation issues (e.g. a rule scoped to a
    section the document does not have)."""

    def __init__(self) -> None:
        self.missing_sections: dict[str, int] = {}

    def note_missing_section(self, name: str) -> None:
        self.missing_sections[name] = self.missing_sections.get(name, 0) + 1

    def to_dict(self) -> dict:
        return {"missing_sections": dict(sorted(self.missing_sections.items()))}


class Rule:
    """Base class for rule AST nodes."""

    #: whether the node can report token positions (required inside guards)
    positional = False

    def match(self, view: TokenView, warnings: Optional[EvalWarnings] = None) -> bool:
        raise NotImplementedError

    def positions(
        self, view: TokenView, warnings: Optional[EvalWarnings] = None
    ) -> list[int]:
        raise NotImplementedError(f"{type(self).__name__} is not positional")

    def canonical(self) -> dict:
        raise NotImplementedError


def _find_token_seq(haystack: Sequence[str], needle: Sequence[str], base: int) -> list[int]:
    """Start indices (offset by ``base``) of ``needle`` within ``haystack``."""
    n = len(needle)
    if n == 0 or n > len(haystack):
        return []
    first = needle[0]
    out = []
    for i in range(len(haystack) - n + 1):
        if haystack[i] == first and list(haystack[i : i + n]) == list(needle):
            out.append(base + i)
    return out


@dataclass(frozen=True)
class Contains(Rule):
    """Token-sequence containment, case-insensitive ("pleural effusion"
    matches across whitespace/punctuation variants)."""

    term: str
    _tokens: tuple[str, ...] = field(init=False, repr=False, compare=False)

    positional = True

    def __post_init__(self) -> None:
        toks = tuple(tokenize(self.term))
        if not toks:
            raise LFParseError(f"contains term {self.term!r} has no tokens")
        object.__setattr__(self, "_tokens", toks)

    def match(self, view, warnings=None):
        return bool(self.positions(view, warnings))

    def positions(self, view, warnings=None):
        return _find_token_seq(view.tokens, self._tokens, view.lo)

    def canonical(self) -> dict:
        return {"contains": " ".join(self._tokens)}


@dataclass(frozen=True)
class PrefixWord(Rule):
    """Any token starting with the given prefix (case-insensitive)."""

    prefix: str
    positional = True

    def __post_init__(self) -> None:
        if not self.prefix or not self.prefix.strip():
            raise LFParseError("prefix_word requires a non-empty prefix")
        object.__setattr__(self, "prefix", self.prefix.lower().strip())

    def match(self, view, warnings=None):
        pfx = self.prefix
        return any(t.startswith(pfx) for t in view.tokens)

    def positions(self, view, warnings=None):
        pfx = self.prefix
        return [view.lo + i for i, t in enumerate(view.tokens) if t.startswith(pfx)]

    def canonical(self) -> dict:
        return {"prefix_word": self.prefix}


@dataclass(frozen=True)
class Regex(Rule):
    """Raw-text regular expression, case-sensitive unless the pattern opts
    into ``(?i)`` itself. Positions map match starts onto tokens."""

    pattern: str
    _compiled: "re.Pattern[str]" = field(init=False, repr=False, compare=False)

    positional = True

    def __post_init__(self) -> None:
        try:
            compiled = re.compile(self.pattern)
        except re.error as exc:
            raise LFParseError(f"invalid regex {self.pattern!r}: {exc}") from exc
        object.__setattr__(self, "_compiled", compiled)

    def match(self, view, warnings=None):
        return self._compiled.search(view.text()) is not None

    def positions(self, view, warnings=None):
        out = []
        for m in self._compiled.finditer(view.text()):
            pos = view.token_at_offset(view.char_lo + m.start())
            if pos is not None:
                out.append(pos)
        return sorted(set(out))

    def canonical(self) -> dict:
        return {"regex": self.pattern}


@dataclass(frozen=True)
class TermList(Rule):
    """Match if any term from an external newline-delimited file occurs.

    Terms follow ``contains`` semantics. The file's content hash (not its
    path) feeds the LF-set version so edits to the list change the version.
    """

    path: str
    terms: tuple[str, ...]
    content_sha256: str
    _token_seqs: tuple[tuple[str, ...], ...] = field(init=False, repr=False, compare=False)

    positional = True

    def __post_init__(self) -> None:
        seqs = []
        for term in self.terms:
            toks = tuple(tokenize(term))
            if toks:
                seqs.append(toks)
        if not seqs:
            raise LFParseError(f"term list {self.path!r} contains no usable terms")
        object.__setattr__(self, "_token_seqs", tuple(seqs))

    @classmethod
    def load(cls, path: str, base_dir: Optional[Path]) -> "TermList":
        resolved = Path(path)
        if not resolved.is_absolute() and base_dir is not None:
            resolved = base_dir / resolved
        try:
            raw = resolved.read_bytes()
        except OSError as exc:
            raise LFParseError(f"term list file not found: {path!r} ({exc})") from exc
        terms = tuple(
            line.strip() for line in raw.decode("utf-8").splitlines() if line.strip()
        )
        return cls(path=path, terms=terms, content_sha256=hashlib.sha256(raw).hexdigest())

    def match(self, view, warnings=None):
        toks = view.tokens
        return any(_find_token_seq(toks, seq, 0) for seq in self._token_seqs)

    def positions(self, view, warnings=None):
        toks = view.tokens
        out: set[int] = set()
        for seq in self._token_seqs:
            out.update(_find_token_seq(toks, seq, view.lo))
        return sorted(out)

    def canonical(self) -> dict:
        return {"term_list": {"path": self.path, "sha256": self.content_sha256}}


@dataclass(frozen=True)
class LengthBelow(Rule):
    """True when the current view has fewer than ``k`` tokens."""

    k: int

    def __post_init__(self) -> None:
        if not isinstance(self.k, int) or isinstance(self.k, bool) or self.k < 1:
            raise LFParseError("length_below requires a positive integer")

    def match(self, view, warnings=None):
        return view.token_count < self.k

    def canonical(self) -> dict:
        return {"length_below": self.k}


@dataclass(frozen=True)
class LengthAbove(Rule):
    """True when the current view has more than ``k`` tokens."""

    k: int

    def __post_init__(self) -> None:
        if not isinstance(self.k, int) or isinstance(self.k, bool) or self.k < 0:
            raise LFParseError("length_above requires a non-negative integer")

    def match(self, view, warnings=None):
        return view.token_count > self.k

    def canonical(self) -> dict:
        return {"length_above": self.k}


@dataclass(frozen=True)
class All(Rule):
    children: tuple[Rule, ...]

    def match(self, view, warnings=None):
        return all(c.match(view, warnings) for c in self.children)

    def canonical(self) -> dict:
        return {"all": [c.canonical() for c in self.children]}


@dataclass(frozen=True)
class Any_(Rule):
    children: tuple[Rule, ...]

    @property
    def positional(self) -> bool:  # type: ignore[override]
        return all(c.positional for c in self.children)

    def match(self, view, warnings=None):
        return any(c.match(view, warnings) for c in self.children)

    def positions(self, view, warnings=None):
        out: set[int] = set()
        for c in self.children:
            out.update(c.positions(view, warnings))
        return sorted(out)

    def canonical(self) -> dict:
        return {"any": [c.canonical() for c in self.children]}


@dataclass(frozen=True)
class Not(Rule):
    child: Rule

    def match(self, view, warnings=None):
        return not self.child.match(view, warnings)

    def canonical(self) -> dict:
        return {"not": self.child.canonical()}


@dataclass(frozen=True)
class InSection(Rule):
    """Evaluate the inner rule within each section of the given name; match
    if any matches. A document lacking the section abstains (and the miss is
    counted in :class:`EvalWarnings`)."""

    name: str
    rule: Rule

    def __post_init__(self) -> None:
        object.__setattr__(self, "name", normalize_section_name(self.name))
        if not self.name:
            raise LFParseError("in_section requires a non-empty section name")

    @property
    def positional(self) -> bool:  # type: ignore[override]
        return self.rule.positional

    def _views(self, view: TokenView, warnings):
        sections = view.doc.sections_named(self.name)
        if not sections:
            if warnings is not None:
                warnings.note_missing_section(self.name)
            return
        spans = view.doc.token_spans
        starts = [s[0] for s in spans]
        for sec in sections:
            lo = bisect_right(starts, sec.start - 1)
            while lo < len(spans) and spans[lo][0] < sec.start:
                lo += 1
            hi = lo
            while hi < len(spans) and spans[hi][1] <= sec.end:
                hi += 1
            yield TokenView(view.doc, lo, hi, sec.start, sec.end)

    def match(self, view, warnings=None):
        return any(self.rule.match(v, warnings) for v in self._views(view, warnings))

    def positions(self, view, warnings=None):
        out: set[int] = set()
        for v in self._views(view, warnings):
            out.update(self.rule.positions(v, warnings))
        return sorted(out)

    def canonical(self) -> dict:
        return {"in_section": {"name": self.name, "rule": self.rule.canonical()}}


@dataclass(frozen=True)
class NegationGuard(Rule):
    """Suppress inner matches preceded by a negation cue within ``window``
    tokens; matches only if at least one occurrence survives.

    The inner rule must be positional (a text matcher or a positional
    composite), since suppression applies to individual match positions.
    Cue lookup runs over the full document token stream so cues just before
    a section boundary still count.
    """

    window: int
    rule: Rule
    cues: frozenset[str] = DEFAULT_NEGATION_CUES

    positional = True

    def __post_init__(self) -> None:
        if not isinstance(self.window, int) or isinstance(self.window, bool) or self.window < 1:
            raise LFParseError("negation_guard window must be a positive integer")
        if not self.rule.positional:
            raise LFParseError(
                "negation_guard requires a positional inner rule "
                "(a text matcher, or any/in_section built from them)"
            )

    def positions(self, view, warnings=None):
        doc_tokens = view.doc.tokens
        out = []
        for pos in self.rule.positions(view, warnings):
            window = doc_tokens[max(0, pos - self.window) : pos]
            if not any(t in self.cues for t in window):
                out.append(pos)
        return out

    def match(self, view, warnings=None):
        return bool(self.positions(view, warnings))

    def canonical(self) -> dict:
        return {
            "negation_guard": {
                "window": self.window,
                "cues": sorted(self.cues),
                "rule": self.rule.canonical(),
            }
        }


@dataclass(frozen=True)
class LFDefinition:
    """A named labeling function: emits ``emit`` when ``rule`` matches."""

    name: str
    emit: int
    rule: Rule

    def __post_init__(self) -> None:
        if self.emit not in (-1, 1):
            raise LFParseError(f"LF {self.name!r}: emit must be -1 or 1, got {self.emit!r}")
        if not self.name or not isinstance(self.name, str):
            raise LFParseError("every LF needs a non-empty string name")

    def canonical(self) -> dict:
        return {"name": self.name, "emit": self.emit, "rule": self.rule.canonical()}


@dataclass(frozen=True)
class LFSet:
    """An ordered collection of LFs plus a content-derived version hash."""

    lfs: tuple[LFDefinition, ...]
    version: str

    def __len__(self) -> int:
        return len(self.lfs)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(lf.name for lf in self.lfs)


_RULE_PARSERS = {}


def _rule_parser(key):
    def register(fn):
        _RULE_PARSERS[key] = fn
        return fn

    return register


def _parse_rule(obj, base_dir: Optional[Path], depth: int) -> Rule:
    if depth > MAX_RULE_DEPTH:
        raise LFParseError(f"rule nesting exceeds the maximum depth of {MAX_RULE_DEPTH}")
    if not isinstance(obj, dict) or len(obj) != 1:
        raise LFParseError(
            f"each rule must be an object with exactly one key, got {obj!r}"
        )
    (key, value), = obj.items()
    parser = _RULE_PARSERS.get(key)
    if parser is None:
        known = ", ".join(sorted(_RULE_PARSERS))
        raise LFParseError(f"unknown rule variant {key!r} (known: {known})")
    return parser(value, base_dir, depth)


def _require_str(value, what: str) -> str:
    if not isinstance(value, str):
        raise LFParseError(f"{what} must be a string, got {value!r}")
    return value


@_rule_parser("contains")
def _(value, base_dir, depth):
    return Contains(_require_str(value, "contains"))


@_rule_parser("prefix_word")
def _(value, base_dir, depth):
    return PrefixWord(_require_str(value, "prefix_word"))


@_rule_parser("regex")
def _(value, base_dir, depth):
    return Regex(_require_str(value, "regex"))


@_rule_parser("term_list")
def _(value, base_dir, depth):
    return TermList.load(_require_str(value, "term_list path"), base_dir)


@_rule_parser("length_below")
def _(value, base_dir, depth):
    if not isinstance(value, int) or isinstance(value, bool):
        raise LFParseError(f"length_below expects an integer, got {value!r}")
    return LengthBelow(value)


@_rule_parser("length_above")
def _(value, base_dir, depth):
    if not isinstance(value, int) or isinstance(value, bool):
        raise LFParseError(f"length_above expects an integer, got {value!r}")
    return LengthAbove(value)


def _parse_children(value, base_dir, depth, what):
    if not isinstance(value, list) or not value:
        raise LFParseError(f"{what} expects a non-empty list of rules")
    return tuple(_parse_rule(v, base_dir, depth + 1) for v in value)


@_rule_parser("all")
def _(value, base_dir, depth):
    return All(_parse_children(value, base_dir, depth, "all"))


@_rule_parser("any")
def _(value, base_dir, depth):
    return Any_(_parse_children(value, base_dir, depth, "any"))


@_rule_parser("not")
def _(value, base_dir, depth):
    return Not(_parse_rule(value, base_dir, depth + 1))


@_rule_parser("in_section")
def _(value, base_dir, depth):
    if not isinstance(value, dict) or set(value) != {"name", "rule"}:
        raise LFParseError('in_section expects {"name": ..., "rule": ...}')
    return InSection(
        _require_str(value["name"], "section name"),
        _parse_rule(value["rule"], base_dir, depth + 1),
    )


@_rule_parser("negation_guard")
def _(value, base_dir, depth):
    if not isinstance(value, dict) or "rule" not in value or "window" not in value:
        raise LFParseError('negation_guard expects {"window": ..., "rule": ..., ["cues"]}')
    extra = set(value) - {"window", "rule", "cues"}
    if extra:
        raise LFParseError(f"negation_guard has unknown fields: {sorted(extra)}")
    window = value["window"]
    if not isinstance(window, int) or isinstance(window, bool):
        raise LFParseError(f"negation_guard window must be an integer, got {window!r}")
    cues = set(DEFAULT_NEGATION_CUES)
    if "cues" in value:
        if not isinstance(value["cues"], list) or not all(
            isinstance(c, str) for c in value["cues"]
        ):
            raise LFParseError("negation_guard cues must be a list of strings")
        cues.update(c.lower() for c in value["cues"])
    return NegationGuard(
        window=window,
        rule=_parse_rule(value["rule"], base_dir, depth + 1),
        cues=frozenset(cues),
    )


def parse_lf_file(text: str, base_dir: Optional[str | Path] = None) -> LFSet:
    """Parse an LF-set JSON document.

    Expected shape: ``{"lfs": [{"name": ..., "emit": 1|-1, "rule": {...}}]}``.
    ``base_dir`` resolves relative ``term_list`` paths. Raises
    :class:`LFParseError` with the offending LF named where possible.
    """
    base = Path(base_dir) if base_dir is not None else None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise LFParseError(f"LF file is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict) or "lfs" not in obj:
        raise LFParseError('LF file must be an object with an "lfs" array')
    raw_lfs = obj["lfs"]
    if not isinstance(raw_lfs, list) or not raw_lfs:
        raise LFParseError("at least one LF is required")

    lfs: list[LFDefinition] = []
    seen: set[str] = set()
    for i, entry in enumerate(raw_lfs):
        if not isinstance(entry, dict):
            raise LFParseError(f"LF #{i} must be an object, got {entry!r}")
        name = entry.get("name")
        label = repr(name) if isinstance(name, str) else f"#{i}"
        missing = {"name", "emit", "rule"} - set(entry)
        if missing:
            raise LFParseError(f"LF {label} is missing fields: {sorted(missing)}")
        extra = set(entry) - {"name", "emit", "rule"}
        if extra:
            raise LFParseError(f"LF {label} has unknown fields: {sorted(extra)}")
        try:
            lf = LFDefinition(
                name=name,
                emit=entry["emit"],
                rule=_parse_rule(entry["rule"], base, depth=1),
            )
        except LFParseError as exc:
            raise LFParseError(f"LF {label}: {exc}") from exc
        if lf.name in seen:
            raise LFParseError(f"duplicate LF name {lf.name!r}")
        seen.add(lf.name)
        lfs.append(lf)

    canonical = json.dumps(
        {"lfs": [lf.canonical() for lf in lfs]},
        sort_keys=True,
        separators=(",", ":"),
    )
    version = hashlib.sha256(canonical.encode("utf-8")).hexdigest()
    return LFSet(lfs=tuple(lfs), version=version)


def load_lf_file(path: str | Path) -> LFSet:
    """Read and parse an LF file; relative term lists resolve beside it."""
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise LFParseError(f"LF file not found: {path} ({exc})") from exc
    return parse_lf_file(text, base_dir=p.parent)


def apply_lf(
    lf: LFDefinition, doc: Document, warnings: Optional[EvalWarnings] = None
) -> int:
    """Evaluate one LF on one document: ``lf.emit`` on match, else 0."""
    return lf.emit if lf.rule.match(TokenView.whole(doc), warnings) else 0


def apply_all(
    lfset: LFSet, corpus: Corpus, warnings: Optional[EvalWarnings] = None
) -> LabelMatrix:
    """Apply every LF to every document, producing the sparse label matrix."""
    votes = np.zeros((len(corpus), len(lfset)), dtype=np.int8)
    for i, doc in enumerate(corpus):
        view = TokenView.whole(doc)
        for j, lf in enumerate(lfset.lfs):
            if lf.rule.match(view, warnings):
                votes[i, j] = lf.emit
    return LabelMatrix.from_dense(
        votes, row_ids=corpus.ids, col_names=lfset.names, lfset_version=lfset.version
    )
