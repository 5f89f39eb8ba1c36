"""Corpus loading, word occurrences and frequency filtering.

A corpus is plain UTF-8 text, one sentence per line, whitespace-tokenized.
Word identity is the exact surface form (case-sensitive): casing is one of
the concept schemes under study, so it must survive ingestion untouched.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, TextIO

from .errors import DataError


@dataclass(frozen=True)
class WordOccurrence:
    """One contextual instance of a word type."""

    word_id: int
    sentence_id: int
    position: int

    @property
    def key(self) -> tuple[int, int]:
        return (self.sentence_id, self.position)


@dataclass
class Sentence:
    id: int
    tokens: list[int]  # word_ids, position-indexed

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass
class Corpus:
    sentences: list[Sentence] = field(default_factory=list)
    vocab: dict[str, int] = field(default_factory=dict)  # surface form -> word_id
    words: list[str] = field(default_factory=list)  # word_id -> surface form

    def word(self, word_id: int) -> str:
        return self.words[word_id]

    def token_at(self, sentence_id: int, position: int) -> int:
        """word_id at a (sentence, position) slot; raises DataError if out of range."""
        if not 0 <= sentence_id < len(self.sentences):
            raise DataError(f"sentence_id {sentence_id} out of range")
        sent = self.sentences[sentence_id]
        if not 0 <= position < len(sent):
            raise DataError(
                f"position {position} out of range for sentence {sentence_id} "
                f"(length {len(sent)})"
            )
        return sent.tokens[position]

    def frequencies(self) -> Counter:
        freq: Counter = Counter()
        for sent in self.sentences:
            freq.update(sent.tokens)
        return freq

    def occurrences(self) -> Iterable[WordOccurrence]:
        for sent in self.sentences:
            for pos, wid in enumerate(sent.tokens):
                yield WordOccurrence(wid, sent.id, pos)


@dataclass(frozen=True)
class FilterConfig:
    """Occurrence selection: drop rare words, cap frequent ones."""

    min_frequency: int = 10
    max_occurrences: int = 10
    seed: int = 0

    def __post_init__(self) -> None:
        if self.min_frequency < 1:
            raise DataError("min_frequency must be >= 1")
        if self.max_occurrences < 1:
            raise DataError("max_occurrences must be >= 1")


@dataclass
class OccurrenceSet:
    """Filtered occurrences, ordered by (word_id, sentence_id, position)."""

    occurrences: list[WordOccurrence]

    def __len__(self) -> int:
        return len(self.occurrences)

    def __iter__(self):
        return iter(self.occurrences)

    def keys(self) -> list[tuple[int, int]]:
        return [o.key for o in self.occurrences]

    def write_tsv(self, fh: TextIO, corpus: Corpus) -> None:
        fh.write("word_id\tword\tsentence_id\tposition\n")
        for o in self.occurrences:
            fh.write(f"{o.word_id}\t{corpus.word(o.word_id)}\t{o.sentence_id}\t{o.position}\n")


def load_corpus(path: str | Path) -> Corpus:
    """Read a one-sentence-per-line corpus; vocab ids in first-appearance order.

    Blank lines are skipped and sentence ids stay dense.
    """
    path = Path(path)
    corpus = Corpus()
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read corpus file {path}: {exc}") from exc
    for lineno, line in enumerate(raw.split(b"\n"), start=1):
        try:
            text = line.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DataError(f"{path}: invalid UTF-8 on line {lineno}") from exc
        tokens = text.split()
        if not tokens:
            continue
        ids = []
        for tok in tokens:
            wid = corpus.vocab.get(tok)
            if wid is None:
                wid = len(corpus.words)
                corpus.vocab[tok] = wid
                corpus.words.append(tok)
            ids.append(wid)
        corpus.sentences.append(Sentence(id=len(corpus.sentences), tokens=ids))
    return corpus


def filter_occurrences(corpus: Corpus, cfg: FilterConfig) -> OccurrenceSet:
    """Select occurrences: words below min_frequency are dropped entirely;
    words above max_occurrences are down-sampled without replacement.

    Sampling is seeded per word so the result is deterministic for equal
    (corpus, cfg) inputs.
    """
    freq = corpus.frequencies()
    by_word: dict[int, list[WordOccurrence]] = {}
    for occ in corpus.occurrences():
        by_word.setdefault(occ.word_id, []).append(occ)

    selected: list[WordOccurrence] = []
    for wid in sorted(by_word):
        if freq[wid] < cfg.min_frequency:
            continue
        occs = by_word[wid]
        if len(occs) > cfg.max_occurrences:
            rng = random.Random(cfg.seed * 1_000_003 + wid)
            occs = rng.sample(occs, cfg.max_occurrences)
        selected.extend(occs)
    selected.sort(key=lambda o: (o.word_id, o.sentence_id, o.position))
    return OccurrenceSet(selected)
