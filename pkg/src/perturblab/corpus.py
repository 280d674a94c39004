"""Tokenized-corpus data model: sentences, vocabularies, POS annotations, splits.

A corpus file is UTF-8, LF line endings, one sentence per line, tokens joined
by single spaces. A POS annotation file is line-parallel to its corpus file
with the same number of space-separated fields per line.
"""
from __future__ import annotations

import math
import warnings
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Iterator

from perturblab import kernels
from perturblab.errors import ParseError, ValidationError

UNK_SYMBOL = "<unk>"

#: Stream id for the corpus-level sentence shuffle (see kernels.seed_state).
SENTENCE_SHUFFLE_STREAM = 2


def _check_token(text: str) -> str:
    if not text or text != text.strip() or any(c in text for c in " \t\n\r"):
        raise ValidationError(f"invalid token {text!r}: must be non-empty and whitespace-free")
    return text


@dataclass(frozen=True)
class Sentence:
    """One tokenized sentence.

    ``index`` is the 0-based ordinal within the current corpus; ``source``
    is the ordinal in the originally parsed file, preserved through
    filtering/subsetting so line-parallel annotations stay addressable.
    """

    tokens: tuple[str, ...]
    index: int
    source: int = -1

    def __post_init__(self):
        if not self.tokens:
            raise ValidationError(f"sentence {self.index}: empty token sequence")
        if self.source < 0:
            object.__setattr__(self, "source", self.index)

    def __len__(self) -> int:
        return len(self.tokens)

    def with_tokens(self, tokens: Iterable[str]) -> "Sentence":
        return Sentence(tuple(tokens), self.index, self.source)

    def text(self) -> str:
        return " ".join(self.tokens)


@dataclass(frozen=True)
class Corpus:
    sentences: tuple[Sentence, ...]
    token_count: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "token_count", sum(len(s) for s in self.sentences))

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self) -> Iterator[Sentence]:
        return iter(self.sentences)

    def reindexed(self) -> "Corpus":
        """Densely renumber sentence indices from 0, keeping source ordinals."""
        return Corpus(tuple(
            Sentence(s.tokens, i, s.source) for i, s in enumerate(self.sentences)
        ))


@dataclass(frozen=True)
class Vocabulary:
    """The ``size_limit`` most frequent token types of a corpus.

    ``counts`` is ordered by descending frequency, ties broken by ascending
    token text. The unknown symbol is reserved and never a member.
    """

    counts: dict[str, int]
    size_limit: int
    unk_symbol: str = UNK_SYMBOL

    def __post_init__(self):
        if len(self.counts) > self.size_limit:
            raise ValidationError("vocabulary exceeds its size limit")
        if self.unk_symbol in self.counts:
            raise ValidationError(f"unknown symbol {self.unk_symbol!r} must not be an entry")

    def __contains__(self, token: str) -> bool:
        return token in self.counts

    def __len__(self) -> int:
        return len(self.counts)


@dataclass(frozen=True)
class PosAnnotation:
    """POS tags parallel to one sentence."""

    tags: tuple[str, ...]
    verb_tag_set: frozenset[str] = frozenset({"VERB"})

    def __len__(self) -> int:
        return len(self.tags)

    def verb_positions(self) -> tuple[int, ...]:
        return tuple(i for i, tag in enumerate(self.tags) if tag in self.verb_tag_set)


@dataclass(frozen=True)
class SplitSpec:
    """Train/valid/test fractions (exact rationals) plus the run seed."""

    train_fraction: Fraction
    valid_fraction: Fraction
    test_fraction: Fraction
    seed: int = 0

    def __post_init__(self):
        fracs = []
        for name in ("train_fraction", "valid_fraction", "test_fraction"):
            value = getattr(self, name)
            # str() round-trips the intended decimal, so 0.3 becomes 3/10
            # rather than its binary approximation.
            frac = Fraction(str(value)) if isinstance(value, float) else Fraction(value)
            if not 0 < frac < 1:
                raise ValidationError(f"{name} must lie strictly between 0 and 1")
            object.__setattr__(self, name, frac)
            fracs.append(frac)
        if abs(sum(fracs) - 1) > Fraction(1, 10**9):
            raise ValidationError(f"split fractions sum to {float(sum(fracs))}, expected 1")


def parse_corpus(lines: Iterable[str]) -> Corpus:
    """Build a corpus from text lines; blank lines are skipped.

    Token boundaries are maximal runs of non-whitespace, so repeated spaces
    never produce empty tokens.
    """
    sentences = []
    for raw in lines:
        tokens = raw.split()
        if not tokens:
            continue
        sentences.append(Sentence(tuple(tokens), len(sentences)))
    return Corpus(tuple(sentences))


def read_corpus(path: str | Path) -> Corpus:
    """Read a corpus file, reporting the line number of any bad UTF-8."""
    decoded = []
    with open(path, "rb") as fh:
        for lineno, raw in enumerate(fh, start=1):
            try:
                decoded.append(raw.decode("utf-8"))
            except UnicodeDecodeError as exc:
                raise ParseError(f"invalid UTF-8 in {path}: {exc}", line=lineno) from exc
    return parse_corpus(decoded)


def serialize_corpus(corpus: Corpus) -> str:
    return "".join(s.text() + "\n" for s in corpus)


def write_corpus(corpus: Corpus, path: str | Path) -> None:
    Path(path).write_bytes(serialize_corpus(corpus).encode("utf-8"))


def build_vocabulary(corpus: Corpus, size_limit: int, unk_symbol: str = UNK_SYMBOL) -> Vocabulary:
    """Keep the ``size_limit`` most frequent tokens, ties lexicographic ascending."""
    if size_limit < 1:
        raise ValidationError("vocabulary size limit must be >= 1")
    if not corpus.sentences:
        raise ValidationError("cannot build a vocabulary from an empty corpus")
    freq = Counter()
    for sentence in corpus:
        freq.update(sentence.tokens)
    freq.pop(unk_symbol, None)  # reserved: a literal <unk> in text stays unknown
    ranked = sorted(freq.items(), key=lambda item: (-item[1], item[0]))
    return Vocabulary(dict(ranked[:size_limit]), size_limit, unk_symbol)


def write_vocabulary(vocab: Vocabulary, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for token, count in vocab.counts.items():
            fh.write(f"{token}\t{count}\n")


def read_vocabulary(path: str | Path, size_limit: int | None = None) -> Vocabulary:
    counts = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                token, count = line.rstrip("\n").split("\t")
                counts[token] = int(count)
            except ValueError as exc:
                raise ParseError(f"bad vocabulary row {line!r}", line=lineno) from exc
    return Vocabulary(counts, size_limit if size_limit is not None else len(counts))


def unknown_fraction(sentence: Sentence, vocab: Vocabulary) -> float:
    unknown = sum(1 for token in sentence.tokens if token not in vocab)
    return unknown / len(sentence)


def filter_unknown(corpus: Corpus, vocab: Vocabulary, threshold: float = 0.05) -> Corpus:
    """Drop sentences whose unknown-token fraction strictly exceeds ``threshold``."""
    if not 0 <= threshold <= 1:
        raise ValidationError("threshold must lie in [0, 1]")
    kept = tuple(s for s in corpus if unknown_fraction(s, vocab) <= threshold)
    return Corpus(kept).reindexed()


def shuffle_sentences(corpus: Corpus, seed: int) -> Corpus:
    """Deterministically permute sentence order (Fisher-Yates on the run seed)."""
    state = kernels.seed_state(seed, 0, SENTENCE_SHUFFLE_STREAM)
    _, perm = kernels.permutation(state, len(corpus.sentences))
    return Corpus(tuple(corpus.sentences[j] for j in perm)).reindexed()


def subset_tokens(corpus: Corpus, budget: int, seed: int) -> Corpus:
    """Shuffle sentences, then keep the longest prefix not exceeding ``budget`` tokens.

    Sentences are atomic: the prefix stops before the first sentence that
    would push the total past the budget.
    """
    if budget < 1:
        raise ValidationError("token budget must be >= 1")
    shuffled = shuffle_sentences(corpus, seed)
    if corpus.token_count < budget:
        warnings.warn(
            f"corpus has {corpus.token_count} tokens, below the budget of {budget}; "
            "returning the whole shuffled corpus",
            RuntimeWarning,
            stacklevel=2,
        )
        return shuffled
    kept = []
    total = 0
    for sentence in shuffled:
        if total + len(sentence) > budget:
            break
        kept.append(sentence)
        total += len(sentence)
    return Corpus(tuple(kept)).reindexed()


def split(corpus: Corpus, spec: SplitSpec) -> tuple[Corpus, Corpus, Corpus]:
    """Contiguously partition the sentence sequence into train/valid/test."""
    n = len(corpus.sentences)
    n_train = math.floor(spec.train_fraction * n)
    n_valid = math.floor(spec.valid_fraction * n)
    n_test = n - n_train - n_valid
    if min(n_train, n_valid, n_test) < 1:
        raise ValidationError(
            f"split of {n} sentences yields sizes {n_train}/{n_valid}/{n_test}; "
            "every part must be non-empty"
        )
    parts = (
        corpus.sentences[:n_train],
        corpus.sentences[n_train:n_train + n_valid],
        corpus.sentences[n_train + n_valid:],
    )
    return tuple(Corpus(part).reindexed() for part in parts)  # type: ignore[return-value]


def parse_annotations(lines: Iterable[str], verb_tags: frozenset[str] = frozenset({"VERB"})) -> list[PosAnnotation]:
    """Parse a line-parallel tag file; blank lines are skipped like in parse_corpus."""
    annotations = []
    for raw in lines:
        tags = raw.split()
        if not tags:
            continue
        annotations.append(PosAnnotation(tuple(tags), verb_tags))
    return annotations


def read_annotations(
    path: str | Path,
    corpus: Corpus | None = None,
    verb_tags: frozenset[str] = frozenset({"VERB"}),
) -> list[PosAnnotation]:
    """Read a POS annotation file, optionally checking alignment with ``corpus``.

    Alignment is by source line: annotation i must have exactly as many tags
    as corpus line i has tokens.
    """
    with open(path, encoding="utf-8") as fh:
        annotations = parse_annotations(fh, verb_tags)
    if corpus is not None:
        for sentence in corpus:
            if sentence.source >= len(annotations):
                raise ParseError(f"{path}: no annotation for corpus line {sentence.source}", line=sentence.source + 1)
            if len(annotations[sentence.source]) != len(sentence):
                raise ParseError(
                    f"{path}: {len(annotations[sentence.source])} tags for "
                    f"{len(sentence)} tokens",
                    line=sentence.source + 1,
                )
    return annotations
