"""Perturbation engine: golden rows, manifest plumbing, variant application."""
import json

import pytest

from perturblab import corpus as cm
from perturblab import engine
from perturblab.corpus import Corpus, PosAnnotation, Sentence
from perturblab.engine import (
    HOP_BASELINE_OFFSET,
    HOP_OFFSET,
    ManifestEntry,
    MarkerManifest,
    Variant,
    VariantSpec,
)
from perturblab.errors import ConfigError, ValidationError

# The worked example sentence, indices 0..4.
GOLDEN = Sentence(("Colorless", "green", "ideas", "sleep", "furiously."), 0)
# Second worked example: one verb at index 2.
HOPPED = Sentence(("They", "were", "sleeping", "next", "to", "the", "colorless",
                   "green", "ideas."), 0)
HOPPED_TAGS = PosAnnotation(("PRON", "AUX", "VERB", "ADP", "ADP", "DET", "ADJ",
                             "ADJ", "NOUN"))


def test_golden_shuffle_local():
    got = engine.shuffle_local(GOLDEN)
    assert got.tokens == ("green", "Colorless", "sleep", "ideas", "furiously.")


def test_golden_switch():
    got = engine.switch(GOLDEN)
    assert got.tokens == ("ideas", "green", "Colorless", "sleep", "furiously.")


def test_golden_reverse_baseline_pos2():
    got = engine.reverse_baseline(GOLDEN, 2, "<rev>")
    assert got.tokens == ("Colorless", "green", "<rev>", "ideas", "sleep", "furiously.")


def test_golden_reverse_partial_pos2():
    got = engine.reverse_partial(GOLDEN, 2, "<rev>")
    assert got.tokens == ("Colorless", "green", "<rev>", "furiously.", "sleep", "ideas")


def test_golden_reverse_full_pos2():
    got = engine.reverse_full(GOLDEN, 2, "<rev>")
    assert got.tokens == ("furiously.", "sleep", "ideas", "<rev>", "green", "Colorless")


def test_golden_hop_positions():
    assert engine.hop_positions(HOPPED, HOPPED_TAGS, HOP_OFFSET) == [6]
    assert engine.hop_positions(HOPPED, HOPPED_TAGS, HOP_BASELINE_OFFSET) == [3]


def test_golden_hop_insertion():
    got = engine.insert_markers(HOPPED, [6], "ˌ")
    assert got.tokens == ("They", "were", "sleeping", "next", "to", "the", "ˌ",
                          "colorless", "green", "ideas.")
    base = engine.insert_markers(HOPPED, [3], "ˌ")
    assert base.tokens == ("They", "were", "sleeping", "ˌ", "next", "to", "the",
                           "colorless", "green", "ideas.")


# --- single ops, edge behaviour ------------------------------------------------

def test_switch_short_sentence_is_identity():
    two = Sentence(("a", "b"), 0)
    assert engine.switch(two).tokens == ("a", "b")


def test_shuffle_local_single_token():
    one = Sentence(("x",), 0)
    assert engine.shuffle_local(one).tokens == ("x",)


def test_shuffle_global_single_token():
    one = Sentence(("x",), 0)
    assert engine.shuffle_global(one, 99).tokens == ("x",)


def test_shuffle_global_same_length_same_permutation():
    a = Sentence(tuple("abcdefg"), 0)
    b = Sentence(tuple("tuvwxyz"), 17)
    pa = engine.shuffle_global(a, 5).tokens
    pb = engine.shuffle_global(b, 5).tokens
    mapping_a = [a.tokens.index(t) for t in pa]
    mapping_b = [b.tokens.index(t) for t in pb]
    assert mapping_a == mapping_b


def test_draw_rev_position_range_and_determinism():
    one = Sentence(("x",), 3)
    p1 = engine.draw_rev_position(one, 7)
    assert p1 in (0, 1)
    assert engine.draw_rev_position(one, 7) == p1


def test_draw_rev_position_covers_all_positions():
    # 10k distinct sentence indices at length 9: every position 0..9 must occur
    seen = set()
    for idx in range(10000):
        s = Sentence(tuple("abcdefghi"), idx)
        seen.add(engine.draw_rev_position(s, 0))
    assert seen == set(range(10))


def test_reverse_ops_reject_bad_positions():
    for bad in (-1, 6):
        with pytest.raises(ValidationError):
            engine.reverse_baseline(GOLDEN, bad, "<rev>")
        with pytest.raises(ValidationError):
            engine.reverse_partial(GOLDEN, bad, "<rev>")
        with pytest.raises(ValidationError):
            engine.reverse_full(GOLDEN, bad, "<rev>")


def test_reverse_partial_endpoint_positions():
    at_end = engine.reverse_partial(GOLDEN, 5, "<rev>")
    assert at_end.tokens == GOLDEN.tokens + ("<rev>",)
    at_start = engine.reverse_partial(GOLDEN, 0, "<rev>")
    assert at_start.tokens == ("<rev>",) + tuple(reversed(GOLDEN.tokens))


def test_hop_clamps_past_sentence_end():
    tags = PosAnnotation(("NOUN", "VERB"))
    s = Sentence(("dogs", "bark"), 0)
    assert engine.hop_positions(s, tags, HOP_OFFSET) == [2]


def test_hop_positions_rejects_tag_mismatch():
    with pytest.raises(ValidationError):
        engine.hop_positions(GOLDEN, PosAnnotation(("VERB",)), 1)


def test_insert_markers_empty_is_identity():
    assert engine.insert_markers(GOLDEN, [], "ˌ").tokens == GOLDEN.tokens


def test_insert_markers_duplicate_positions():
    got = engine.insert_markers(Sentence(("a", "b"), 0), [0, 0], "ˌ")
    assert got.tokens == ("ˌ", "ˌ", "a", "b")


def test_insert_markers_rejects_unsorted():
    with pytest.raises(ValidationError):
        engine.insert_markers(GOLDEN, [3, 1], "ˌ")


def test_insert_markers_strip_inverse():
    got = engine.insert_markers(HOPPED, [0, 4, 9], "ˌ")
    assert tuple(t for t in got.tokens if t != "ˌ") == HOPPED.tokens


# --- VariantSpec ------------------------------------------------------------

def test_variant_spec_defaults_markers():
    assert VariantSpec(Variant.REVERSE_PARTIAL).marker == "<rev>"
    assert VariantSpec(Variant.HOP).marker == "ˌ"
    assert VariantSpec(Variant.SWITCH).marker is None


def test_variant_spec_rejects_marker_on_plain_variant():
    with pytest.raises(ValidationError):
        VariantSpec(Variant.SHUFFLE_LOCAL, marker="<x>")


def test_variant_spec_rejects_whitespace_marker():
    with pytest.raises(ValidationError):
        VariantSpec(Variant.REVERSE_FULL, marker="a b")


def test_variant_names_are_stable():
    assert [str(v) for v in Variant] == [
        "no_perturb", "shuffle_global", "shuffle_local", "switch",
        "reverse_baseline", "reverse_partial", "reverse_full",
        "hop_baseline", "hop",
    ]


# --- manifest ------------------------------------------------------------------

def _toy():
    return cm.parse_corpus(["a b c d\n", "e f\n", "g h i\n"])


def test_manifest_is_pure_function_of_inputs():
    m1 = engine.build_manifest(_toy(), 123)
    m2 = engine.build_manifest(_toy(), 123)
    assert m1 == m2
    m3 = engine.build_manifest(_toy(), 124)
    assert m1 != m3


def test_manifest_positions_match_direct_draws():
    corpus = _toy()
    manifest = engine.build_manifest(corpus, 55)
    for s in corpus:
        assert manifest.entry(s).rev_position == engine.draw_rev_position(s, 55)
        assert 0 <= manifest.entry(s).rev_position <= len(s)


def test_manifest_records_verb_positions():
    corpus = _toy()
    anns = [PosAnnotation(("VERB", "X", "X", "VERB")), PosAnnotation(("X", "X")),
            PosAnnotation(("X", "VERB", "X"))]
    manifest = engine.build_manifest(corpus, 1, anns)
    assert manifest.entries[0].verb_positions == (0, 3)
    assert manifest.entries[1].verb_positions == ()
    assert manifest.entries[2].verb_positions == (1,)


def test_manifest_rejects_tag_length_mismatch():
    anns = [PosAnnotation(("VERB",))] * 3
    with pytest.raises(ValidationError):
        engine.build_manifest(_toy(), 1, anns)


def test_manifest_json_round_trip(tmp_path):
    manifest = engine.build_manifest(_toy(), 9, [
        PosAnnotation(("VERB", "X", "X", "X")),
        PosAnnotation(("X", "X")),
        PosAnnotation(("X", "X", "VERB")),
    ])
    p = tmp_path / "m.json"
    manifest.save(p)
    loaded = MarkerManifest.load(p)
    assert loaded == manifest
    payload = json.loads(p.read_text())
    assert set(payload) == {"global_seed", "entries"}
    assert set(payload["entries"]["0"]) == {"rev_position", "verb_positions"}


def test_manifest_missing_entry_is_an_error():
    manifest = MarkerManifest(0, {0: ManifestEntry(0)})
    with pytest.raises(ValidationError):
        manifest.entry(Sentence(("a",), 5))


# --- apply_variant --------------------------------------------------------------

def test_apply_no_perturb_is_identity():
    corpus = _toy()
    assert engine.apply_variant(corpus, Variant.NO_PERTURB) is corpus


def test_apply_marker_variant_requires_manifest():
    with pytest.raises(ConfigError):
        engine.apply_variant(_toy(), Variant.REVERSE_PARTIAL)


def test_apply_shuffle_global_requires_seed():
    with pytest.raises(ConfigError):
        engine.apply_variant(_toy(), Variant.SHUFFLE_GLOBAL)


def test_apply_shuffle_global_takes_seed_from_manifest():
    corpus = _toy()
    manifest = engine.build_manifest(corpus, 77)
    via_manifest = engine.apply_variant(corpus, Variant.SHUFFLE_GLOBAL, manifest=manifest)
    direct = engine.apply_variant(corpus, Variant.SHUFFLE_GLOBAL, global_seed=77)
    assert cm.serialize_corpus(via_manifest) == cm.serialize_corpus(direct)


def test_apply_rejects_marker_in_vocabulary():
    corpus = cm.parse_corpus(["a <rev> b\n"])
    vocab = cm.build_vocabulary(corpus, 10)
    manifest = engine.build_manifest(corpus, 0)
    with pytest.raises(ValidationError):
        engine.apply_variant(corpus, Variant.REVERSE_BASELINE, manifest=manifest,
                             vocabulary=vocab)


def test_paired_reverse_variants_share_positions_and_lengths():
    corpus = _toy()
    manifest = engine.build_manifest(corpus, 3)
    base = engine.apply_variant(corpus, Variant.REVERSE_BASELINE, manifest=manifest)
    part = engine.apply_variant(corpus, Variant.REVERSE_PARTIAL, manifest=manifest)
    full = engine.apply_variant(corpus, Variant.REVERSE_FULL, manifest=manifest)
    for b, p, f, orig in zip(base, part, full, corpus):
        assert len(b) == len(p) == len(f) == len(orig) + 1
        assert b.tokens.index("<rev>") == p.tokens.index("<rev>")


def test_hop_pair_offsets_read_from_manifest():
    corpus = cm.parse_corpus(["a b c d e f g\n"])
    anns = [PosAnnotation(("X", "VERB", "X", "X", "X", "X", "X"))]
    manifest = engine.build_manifest(corpus, 0, anns)
    hop = engine.apply_variant(corpus, Variant.HOP, manifest=manifest)
    base = engine.apply_variant(corpus, Variant.HOP_BASELINE, manifest=manifest)
    assert hop.sentences[0].tokens.index("ˌ") == 5   # verb 1 + offset 4
    assert base.sentences[0].tokens.index("ˌ") == 2  # verb 1 + offset 1


def test_apply_variant_deterministic():
    corpus = _toy()
    manifest = engine.build_manifest(corpus, 8)
    for kind in Variant:
        a = engine.apply_variant(corpus, kind, manifest=manifest)
        b = engine.apply_variant(corpus, kind, manifest=manifest)
        assert cm.serialize_corpus(a) == cm.serialize_corpus(b)


def test_default_markers_exposed():
    assert engine.REV_MARKER == "<rev>"
    assert len(engine.HOP_MARKER) == 1
