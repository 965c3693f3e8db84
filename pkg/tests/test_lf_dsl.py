import json

import numpy as np
import pytest

from labelforge.corpus import Document, segment_sections
from labelforge.lf_dsl import (
    EvalWarnings,
    LFParseError,
    apply_all,
    apply_lf,
    load_lf_file,
    parse_lf_file,
)


def parse_one(rule: dict, emit: int = 1, name: str = "lf", base_dir=None):
    text = json.dumps({"lfs": [{"name": name, "emit": emit, "rule": rule}]})
    return parse_lf_file(text, base_dir=base_dir).lfs[0]


def vote(rule: dict, text: str, emit: int = 1, headers=("FINDINGS:", "IMPRESSION:")):
    lf = parse_one(rule, emit=emit)
    doc = segment_sections(Document(id="d", text=text), list(headers))
    return apply_lf(lf, doc, EvalWarnings())


# ---------------------------------------------------------------------------
# parsing errors


def test_parse_empty_lfs_rejected():
    with pytest.raises(LFParseError):
        parse_lf_file('{"lfs": []}')


def test_parse_unknown_variant_names_the_lf():
    text = json.dumps({"lfs": [{"name": "lf_odd", "emit": 1, "rule": {"frobnicate": "x"}}]})
    with pytest.raises(LFParseError) as exc:
        parse_lf_file(text)
    assert "lf_odd" in str(exc.value)


def test_parse_duplicate_name_rejected():
    lf = {"name": "lf_a", "emit": 1, "rule": {"contains": "x"}}
    with pytest.raises(LFParseError) as exc:
        parse_lf_file(json.dumps({"lfs": [lf, lf]}))
    assert "lf_a" in str(exc.value)


def test_parse_bad_regex_reports_pattern():
    with pytest.raises(LFParseError) as exc:
        parse_one({"regex": "(unclosed"})
    assert "(unclosed" in str(exc.value)


def test_parse_bad_emit_rejected():
    text = json.dumps({"lfs": [{"name": "lf", "emit": 0, "rule": {"contains": "x"}}]})
    with pytest.raises(LFParseError):
        parse_lf_file(text)


def test_parse_depth_limit():
    rule: dict = {"contains": "x"}
    for _ in range(20):
        rule = {"not": rule}
    with pytest.raises(LFParseError):
        parse_one(rule)


def test_parse_invalid_json_rejected():
    with pytest.raises(LFParseError):
        parse_lf_file("{nope")


def test_negation_guard_requires_positional_inner():
    # length_below has no match position, so there is nothing to guard
    with pytest.raises(LFParseError):
        parse_one({"negation_guard": {"window": 3, "rule": {"length_below": 5}}})


def test_term_list_missing_file_rejected(tmp_path):
    rule = {"term_list": "absent.txt"}
    text = json.dumps({"lfs": [{"name": "lf", "emit": 1, "rule": rule}]})
    with pytest.raises(LFParseError):
        parse_lf_file(text, base_dir=tmp_path)


def test_term_list_empty_file_rejected(tmp_path):
    (tmp_path / "terms.txt").write_text("\n\n", encoding="utf-8")
    with pytest.raises(LFParseError):
        parse_one({"term_list": "terms.txt"}, base_dir=tmp_path)


# ---------------------------------------------------------------------------
# rule semantics


def test_prefix_word_matches_the_classic_example():
    assert vote({"prefix_word": "pneumo"}, "Large right pneumothorax.") == 1


def test_prefix_word_abstains_without_match():
    assert vote({"prefix_word": "pneumo"}, "Heart size normal.") == 0


def test_prefix_is_token_anchored_not_substring():
    # "pneumo" must begin a token, not merely appear inside one
    assert vote({"prefix_word": "thorax"}, "pneumothorax") == 0


def test_contains_matches_token_sequence():
    assert vote({"contains": "no acute"}, "There is NO ACUTE process.") == 1
    assert vote({"contains": "no acute"}, "no chronic or acute process") == 0


def test_contains_ignores_punctuation_between_tokens():
    assert vote({"contains": "acute process"}, "acute, process") == 1


def test_regex_is_case_sensitive_raw_text():
    assert vote({"regex": r"pneumo\w+"}, "large pneumothorax") == 1
    assert vote({"regex": r"PNEUMO\w+"}, "large pneumothorax") == 0


def test_length_rules_count_tokens():
    assert vote({"length_below": 4}, "one two three", emit=-1) == -1
    assert vote({"length_below": 3}, "one two three", emit=-1) == 0
    assert vote({"length_above": 2}, "one two three") == 1
    assert vote({"length_above": 3}, "one two three") == 0


def test_emit_minus_one_spec_example():
    assert vote({"length_below": 10}, "Short normal report today.", emit=-1) == -1


def test_all_any_not_composition():
    both = {"all": [{"contains": "effusion"}, {"contains": "large"}]}
    assert vote(both, "large pleural effusion") == 1
    assert vote(both, "small pleural effusion") == 0
    either = {"any": [{"contains": "effusion"}, {"contains": "edema"}]}
    assert vote(either, "mild edema") == 1
    assert vote(either, "clear lungs") == 0
    assert vote({"not": {"contains": "normal"}}, "clear lungs") == 1
    assert vote({"not": {"contains": "normal"}}, "normal study") == 0


def test_term_list_votes_on_any_term(tmp_path):
    (tmp_path / "terms.txt").write_text("effusion\npleural edema\n", encoding="utf-8")
    lf = parse_one({"term_list": "terms.txt"}, base_dir=tmp_path)
    doc = Document(id="d", text="moderate pleural edema seen")
    assert apply_lf(lf, doc, EvalWarnings()) == 1
    doc2 = Document(id="d", text="clear lungs")
    assert apply_lf(lf, doc2, EvalWarnings()) == 0


def test_in_section_scopes_the_inner_rule():
    rule = {"in_section": {"name": "IMPRESSION", "rule": {"contains": "hemorrhage"}}}
    text = "FINDINGS: hemorrhage noted. IMPRESSION: stable."
    assert vote(rule, text) == 0
    text2 = "FINDINGS: stable. IMPRESSION: hemorrhage noted."
    assert vote(rule, text2) == 1


def test_in_section_missing_section_abstains_and_warns():
    lf = parse_one({"in_section": {"name": "IMPRESSION", "rule": {"contains": "x"}}})
    doc = segment_sections(Document(id="d", text="x y z"), ["FINDINGS:"])
    warnings = EvalWarnings()
    assert apply_lf(lf, doc, warnings) == 0
    assert warnings.to_dict()["missing_sections"]["IMPRESSION"] == 1


# ---------------------------------------------------------------------------
# negation guard


def test_guard_suppresses_within_window():
    rule = {"negation_guard": {"window": 3, "rule": {"contains": "hemorrhage"}}}
    assert vote(rule, "no evidence of hemorrhage") == 0
    assert vote(rule, "large acute hemorrhage") == 1


def test_guard_window_is_token_distance():
    rule = {"negation_guard": {"window": 2, "rule": {"contains": "hemorrhage"}}}
    # "no" is 3 tokens before the match: outside a window of 2
    assert vote(rule, "no evidence of hemorrhage") == 1
    assert vote(rule, "no definite hemorrhage") == 0


def test_guard_default_cues():
    rule = {"negation_guard": {"window": 1, "rule": {"contains": "effusion"}}}
    for cue in ("no", "not", "without", "negative"):
        assert vote(rule, f"{cue} effusion") == 0, cue


def test_guard_extra_cues_extend_defaults():
    rule = {
        "negation_guard": {
            "window": 1,
            "cues": ["denies"],
            "rule": {"contains": "pain"},
        }
    }
    assert vote(rule, "denies pain") == 0
    assert vote(rule, "without pain") == 0  # defaults still active
    assert vote(rule, "reports pain") == 1


def test_guard_survives_if_any_mention_unnegated():
    rule = {"negation_guard": {"window": 2, "rule": {"contains": "effusion"}}}
    assert vote(rule, "no effusion. large effusion persists") == 1


def test_guard_never_converts_abstain_to_vote():
    rule = {"negation_guard": {"window": 3, "rule": {"contains": "effusion"}}}
    assert vote(rule, "completely clear lungs") == 0


def test_spec_composite_example_parses_and_runs():
    rule = {
        "all": [
            {"in_section": {"name": "IMPRESSION", "rule": {"contains": "hemorrhage"}}},
            {"not": {"negation_guard": {"window": 3, "rule": {"contains": "hemorrhage"}}}},
        ]
    }
    # hemorrhage in IMPRESSION but every mention negated -> guard abstains ->
    # not() matches -> all() matches
    assert vote(rule, "IMPRESSION: no evidence of hemorrhage.") == 1
    assert vote(rule, "IMPRESSION: massive hemorrhage.") == 0


# ---------------------------------------------------------------------------
# versioning


def lf_text(rule, name="lf", emit=1):
    return json.dumps({"lfs": [{"name": name, "emit": emit, "rule": rule}]})


def test_version_insensitive_to_formatting():
    a = parse_lf_file('{"lfs": [{"name": "lf", "emit": 1, "rule": {"contains": "x"}}]}')
    b = parse_lf_file(
        '{\n  "lfs": [\n    {"rule": {"contains": "x"}, "emit": 1, "name": "lf"}\n  ]\n}'
    )
    assert a.version == b.version


def test_version_changes_with_rule_and_emit_and_name():
    base = parse_lf_file(lf_text({"contains": "x"}))
    assert parse_lf_file(lf_text({"contains": "y"})).version != base.version
    assert parse_lf_file(lf_text({"contains": "x"}, emit=-1)).version != base.version
    assert parse_lf_file(lf_text({"contains": "x"}, name="z")).version != base.version


def test_version_tracks_term_list_content(tmp_path):
    (tmp_path / "t.txt").write_text("effusion\n", encoding="utf-8")
    text = lf_text({"term_list": "t.txt"})
    v1 = parse_lf_file(text, base_dir=tmp_path).version
    (tmp_path / "t.txt").write_text("effusion\nedema\n", encoding="utf-8")
    v2 = parse_lf_file(text, base_dir=tmp_path).version
    assert v1 != v2


def test_load_lf_file_resolves_relative_to_file(tmp_path):
    (tmp_path / "t.txt").write_text("effusion\n", encoding="utf-8")
    p = tmp_path / "lfs.json"
    p.write_text(lf_text({"term_list": "t.txt"}), encoding="utf-8")
    lfset = load_lf_file(p)
    assert lfset.lfs[0].name == "lf"


# ---------------------------------------------------------------------------
# apply_all


class FakeCorpus:
    def __init__(self, docs):
        self._docs = docs

    @property
    def ids(self):
        return [d.id for d in self._docs]

    def __iter__(self):
        return iter(self._docs)

    def __len__(self):
        return len(self._docs)


def two_lf_set():
    return parse_lf_file(
        json.dumps(
            {
                "lfs": [
                    {"name": "lf_pos", "emit": 1, "rule": {"contains": "effusion"}},
                    {"name": "lf_neg", "emit": -1, "rule": {"contains": "normal"}},
                ]
            }
        )
    )


def corpus_of(texts):
    return FakeCorpus([Document(id=f"d{i}", text=t) for i, t in enumerate(texts)])


def test_apply_all_shape_and_order():
    lfset = two_lf_set()
    corpus = corpus_of(["effusion seen", "normal study", "effusion but otherwise normal"])
    mat = apply_all(lfset, corpus, EvalWarnings())
    assert (mat.n, mat.m) == (3, 2)
    assert mat.row_ids == ("d0", "d1", "d2")
    assert mat.col_names == ("lf_pos", "lf_neg")
    np.testing.assert_array_equal(mat.to_dense(), [[1, 0], [0, -1], [1, -1]])
    assert mat.lfset_version == lfset.version


def test_apply_all_deterministic():
    lfset = two_lf_set()
    corpus = corpus_of(["effusion", "normal", "clear"] * 5)
    a = apply_all(lfset, corpus, EvalWarnings()).to_dense()
    b = apply_all(lfset, corpus, EvalWarnings()).to_dense()
    np.testing.assert_array_equal(a, b)


def test_apply_all_duplicate_rule_gives_identical_columns():
    lfset = parse_lf_file(
        json.dumps(
            {
                "lfs": [
                    {"name": "a", "emit": 1, "rule": {"contains": "effusion"}},
                    {"name": "b", "emit": 1, "rule": {"contains": "effusion"}},
                ]
            }
        )
    )
    corpus = corpus_of(["effusion here", "nothing", "effusion again"])
    mat = apply_all(lfset, corpus, EvalWarnings())
    dense = mat.to_dense()
    np.testing.assert_array_equal(dense[:, 0], dense[:, 1])


def test_apply_all_column_permutation_equivariance():
    texts = ["effusion seen", "normal study", "clear", "effusion and normal"]
    lfset = two_lf_set()
    swapped = parse_lf_file(
        json.dumps(
            {
                "lfs": [
                    {"name": "lf_neg", "emit": -1, "rule": {"contains": "normal"}},
                    {"name": "lf_pos", "emit": 1, "rule": {"contains": "effusion"}},
                ]
            }
        )
    )
    corpus = corpus_of(texts)
    a = apply_all(lfset, corpus, EvalWarnings()).to_dense()
    b = apply_all(swapped, corpus, EvalWarnings()).to_dense()
    np.testing.assert_array_equal(a, b[:, [1, 0]])
