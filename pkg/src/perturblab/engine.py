"""Sentence-level perturbations and their token-count-matched baselines.

Every transform is a pure function of (sentence, seed/manifest), so a whole
run is reproducible bit-for-bit. Marker-inserting variants read their
randomized positions from a :class:`MarkerManifest` that is drawn once and
shared, which is what guarantees a perturbation and its baseline insert
markers at the same spots.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Mapping, Sequence

from perturblab import kernels
from perturblab.corpus import Corpus, PosAnnotation, Sentence, Vocabulary
from perturblab.errors import ConfigError, ValidationError

REV_MARKER = "<rev>"
HOP_MARKER = "ˌ"  # modifier letter low vertical line; single character

#: Marker insertion offsets relative to each verb index.
HOP_OFFSET = 4
HOP_BASELINE_OFFSET = 1

#: Stream ids for kernels.seed_state(seed, a, b): b=0 shuffles keyed by
#: sentence length, b=1 draws reversal positions keyed by sentence index.
SHUFFLE_STREAM = 0
REV_POSITION_STREAM = 1


class Variant(str, Enum):
    NO_PERTURB = "no_perturb"
    SHUFFLE_GLOBAL = "shuffle_global"
    SHUFFLE_LOCAL = "shuffle_local"
    SWITCH = "switch"
    REVERSE_BASELINE = "reverse_baseline"
    REVERSE_PARTIAL = "reverse_partial"
    REVERSE_FULL = "reverse_full"
    HOP_BASELINE = "hop_baseline"
    HOP = "hop"

    def __str__(self) -> str:
        return self.value


REVERSE_FAMILY = frozenset({Variant.REVERSE_BASELINE, Variant.REVERSE_PARTIAL, Variant.REVERSE_FULL})
HOP_FAMILY = frozenset({Variant.HOP_BASELINE, Variant.HOP})
MARKER_VARIANTS = REVERSE_FAMILY | HOP_FAMILY

#: Which baseline each perturbed variant is measured against.
BASELINE_FOR = {
    Variant.SHUFFLE_GLOBAL: Variant.NO_PERTURB,
    Variant.SHUFFLE_LOCAL: Variant.NO_PERTURB,
    Variant.SWITCH: Variant.NO_PERTURB,
    Variant.REVERSE_PARTIAL: Variant.REVERSE_BASELINE,
    Variant.REVERSE_FULL: Variant.REVERSE_BASELINE,
    Variant.HOP: Variant.HOP_BASELINE,
}

PERTURBED_VARIANTS = tuple(BASELINE_FOR)
ALL_VARIANTS = tuple(Variant)


def default_marker(kind: Variant) -> str | None:
    if kind in REVERSE_FAMILY:
        return REV_MARKER
    if kind in HOP_FAMILY:
        return HOP_MARKER
    return None


@dataclass(frozen=True)
class VariantSpec:
    """A variant kind plus, for marker variants, the marker token to insert."""

    kind: Variant
    marker: str | None = None

    def __post_init__(self):
        if self.marker is None and self.kind in MARKER_VARIANTS:
            object.__setattr__(self, "marker", default_marker(self.kind))
        if self.kind in MARKER_VARIANTS:
            if not self.marker or any(c.isspace() for c in self.marker):
                raise ValidationError(f"{self.kind} needs a whitespace-free marker token")
        elif self.marker is not None:
            raise ValidationError(f"{self.kind} takes no marker")


@dataclass(frozen=True)
class Prng:
    """Immutable 64-bit linear-congruential generator state."""

    state: int

    def bounded(self, bound: int) -> tuple["Prng", int]:
        """Next value in [0, bound), together with the advanced generator."""
        if bound < 1:
            raise ValidationError("bound must be >= 1")
        state, value = kernels.draw(self.state, bound)
        return Prng(state), value


def seed_for(global_seed: int, a: int, b: int) -> Prng:
    """Independent stream (a, b) under one run seed; advanced once before use."""
    return Prng(kernels.seed_state(global_seed, a, b))


# --- single-sentence operations -------------------------------------------

def shuffle_global(sentence: Sentence, global_seed: int) -> Sentence:
    """Fisher-Yates shuffle seeded by sentence length only.

    All sentences of one length get the identical position permutation.
    """
    return sentence.with_tokens(kernels.shuffle_by_length(sentence.tokens, global_seed))


def shuffle_local(sentence: Sentence) -> Sentence:
    """Swap each even-indexed token with the token after it."""
    return sentence.with_tokens(kernels.swap_adjacent(sentence.tokens))


def switch(sentence: Sentence) -> Sentence:
    """Swap the tokens at indices 0 and 2 (identity below 3 tokens)."""
    return sentence.with_tokens(kernels.swap_first_third(sentence.tokens))


def draw_rev_position(sentence: Sentence, global_seed: int) -> int:
    """Reversal point in [0, len], drawn from the stream keyed by sentence index."""
    prng = seed_for(global_seed, sentence.index, REV_POSITION_STREAM)
    _, pos = prng.bounded(len(sentence) + 1)
    return pos


def _check_pos(sentence: Sentence, pos: int) -> None:
    if not 0 <= pos <= len(sentence):
        raise ValidationError(
            f"position {pos} outside [0, {len(sentence)}] for sentence {sentence.index}"
        )


def reverse_baseline(sentence: Sentence, pos: int, marker: str) -> Sentence:
    """Insert the marker at ``pos`` without reordering anything."""
    _check_pos(sentence, pos)
    return sentence.with_tokens(kernels.splice_marker(sentence.tokens, pos, marker))


def reverse_partial(sentence: Sentence, pos: int, marker: str) -> Sentence:
    """Insert the marker at ``pos`` and reverse everything after it."""
    _check_pos(sentence, pos)
    return sentence.with_tokens(kernels.reverse_tail(sentence.tokens, pos, marker))


def reverse_full(sentence: Sentence, pos: int, marker: str) -> Sentence:
    """Reverse the whole marker-spliced sentence, marker included."""
    _check_pos(sentence, pos)
    return sentence.with_tokens(kernels.reverse_whole(sentence.tokens, pos, marker))


def hop_positions(sentence: Sentence, annotation: PosAnnotation, offset: int) -> list[int]:
    """Marker insertion points: one per verb, ``offset`` past it in original indices.

    Insertions past the sentence end clamp to len(sentence), so every verb
    contributes exactly one marker regardless of where it sits.
    """
    if len(annotation) != len(sentence):
        raise ValidationError(
            f"sentence {sentence.index}: {len(annotation)} tags for {len(sentence)} tokens"
        )
    n = len(sentence)
    return sorted(min(v + offset, n) for v in annotation.verb_positions())


def insert_markers(sentence: Sentence, positions: Sequence[int], marker: str) -> Sentence:
    """Insert one marker per position in a single left-to-right pass."""
    last = 0
    for pos in positions:
        if pos < last:
            raise ValidationError(f"positions {list(positions)} are not sorted ascending")
        last = pos
    if positions and not 0 <= positions[-1] <= len(sentence):
        raise ValidationError(f"position {positions[-1]} outside [0, {len(sentence)}]")
    return sentence.with_tokens(kernels.scatter_markers(sentence.tokens, positions, marker))


# --- marker manifest --------------------------------------------------------

@dataclass(frozen=True)
class ManifestEntry:
    rev_position: int
    verb_positions: tuple[int, ...] = ()


@dataclass(frozen=True)
class MarkerManifest:
    """Per-sentence randomized positions, drawn once and shared across variants."""

    global_seed: int
    entries: Mapping[int, ManifestEntry]

    def entry(self, sentence: Sentence) -> ManifestEntry:
        try:
            return self.entries[sentence.index]
        except KeyError:
            raise ValidationError(f"manifest has no entry for sentence {sentence.index}") from None

    def to_json(self) -> str:
        payload = {
            "global_seed": self.global_seed,
            "entries": {
                str(i): {"rev_position": e.rev_position, "verb_positions": list(e.verb_positions)}
                for i, e in sorted(self.entries.items())
            },
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def from_json(cls, text: str) -> "MarkerManifest":
        payload = json.loads(text)
        entries = {
            int(i): ManifestEntry(e["rev_position"], tuple(e["verb_positions"]))
            for i, e in payload["entries"].items()
        }
        return cls(payload["global_seed"], entries)

    @classmethod
    def load(cls, path: str | Path) -> "MarkerManifest":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def build_manifest(
    corpus: Corpus,
    global_seed: int,
    annotations: Sequence[PosAnnotation] | None = None,
) -> MarkerManifest:
    """Draw every sentence's reversal position; record verb indices if tags given.

    Annotations are looked up by each sentence's source line, so a corpus that
    went through filtering/subsetting still pairs with the original tag file.
    """
    entries = {}
    for sentence in corpus:
        verbs: tuple[int, ...] = ()
        if annotations is not None:
            annotation = annotations[sentence.source]
            if len(annotation) != len(sentence):
                raise ValidationError(
                    f"sentence {sentence.index} (source line {sentence.source}): "
                    f"{len(annotation)} tags for {len(sentence)} tokens"
                )
            verbs = annotation.verb_positions()
        entries[sentence.index] = ManifestEntry(
            rev_position=draw_rev_position(sentence, global_seed),
            verb_positions=verbs,
        )
    return MarkerManifest(global_seed, entries)


# --- corpus-level application ----------------------------------------------

def validate_marker(marker: str, vocabulary: Vocabulary) -> None:
    if marker in vocabulary:
        raise ValidationError(
            f"marker {marker!r} occurs in the corpus vocabulary; choose an unused token"
        )


def apply_variant(
    corpus: Corpus,
    variant: VariantSpec | Variant,
    *,
    manifest: MarkerManifest | None = None,
    global_seed: int | None = None,
    vocabulary: Vocabulary | None = None,
) -> Corpus:
    """Apply one variant sentence by sentence.

    Marker variants require ``manifest`` (positions are read, never re-drawn);
    SHUFFLE_GLOBAL needs a seed, taken from ``global_seed`` or the manifest.
    When a vocabulary is supplied the marker is checked against it first.
    """
    if isinstance(variant, Variant):
        variant = VariantSpec(variant)
    kind = variant.kind

    if kind in MARKER_VARIANTS and manifest is None:
        raise ConfigError(f"{kind} requires a marker manifest (run with annotations for HOP)")
    if vocabulary is not None and variant.marker is not None:
        validate_marker(variant.marker, vocabulary)
    seed = global_seed if global_seed is not None else (manifest.global_seed if manifest else None)

    if kind is Variant.NO_PERTURB:
        return corpus
    if kind is Variant.SHUFFLE_GLOBAL:
        if seed is None:
            raise ConfigError("shuffle_global requires a global seed (or a manifest carrying one)")
        return Corpus(tuple(shuffle_global(s, seed) for s in corpus))
    if kind is Variant.SHUFFLE_LOCAL:
        return Corpus(tuple(shuffle_local(s) for s in corpus))
    if kind is Variant.SWITCH:
        return Corpus(tuple(switch(s) for s in corpus))

    assert manifest is not None
    marker = variant.marker
    assert marker is not None
    out = []
    for sentence in corpus:
        entry = manifest.entry(sentence)
        if kind is Variant.REVERSE_BASELINE:
            out.append(reverse_baseline(sentence, entry.rev_position, marker))
        elif kind is Variant.REVERSE_PARTIAL:
            out.append(reverse_partial(sentence, entry.rev_position, marker))
        elif kind is Variant.REVERSE_FULL:
            out.append(reverse_full(sentence, entry.rev_position, marker))
        else:
            offset = HOP_OFFSET if kind is Variant.HOP else HOP_BASELINE_OFFSET
            n = len(sentence)
            positions = sorted(min(v + offset, n) for v in entry.verb_positions)
            out.append(insert_markers(sentence, positions, marker))
    return Corpus(tuple(out))
