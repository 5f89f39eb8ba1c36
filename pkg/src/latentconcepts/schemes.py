"""Human-defined concept schemes.

Two kinds of scheme exist:

* contextual — a label per occurrence (POS, SEM, chunking, CCG, sentence
  position); class members are (sentence_id, position) keys, and labels are
  functional: one label per occurrence.
* type_level — a label set per word type (WordNet, LIWC, suffix, ngram,
  casing); class members are word_ids and a word may carry several labels.

Lexical schemes (casing, suffix, ngram, position) are computed from the
corpus itself; tagged schemes and ontologies are loaded from TSV files
produced elsewhere.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import Corpus, OccurrenceSet
from .errors import DataError

CONTEXTUAL = "contextual"
TYPE_LEVEL = "type_level"


@dataclass
class ConceptClass:
    scheme: str
    label: str
    # (sentence_id, position) keys for contextual schemes, word_ids for
    # type-level ones.
    members: set = field(default_factory=set)

    @property
    def qualified(self) -> str:
        return f"{self.scheme}:{self.label}"


@dataclass
class ConceptScheme:
    name: str
    kind: str  # CONTEXTUAL or TYPE_LEVEL
    classes: dict[str, ConceptClass] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in (CONTEXTUAL, TYPE_LEVEL):
            raise DataError(f"unknown scheme kind {self.kind!r}")

    def add(self, label: str, member) -> None:
        cls = self.classes.get(label)
        if cls is None:
            cls = self.classes[label] = ConceptClass(self.name, label)
        cls.members.add(member)

    def labels_of(self, member) -> set[str]:
        return {lbl for lbl, cls in self.classes.items() if member in cls.members}

    def member_index(self) -> dict:
        """member -> set of labels, across all classes."""
        index: dict = {}
        for lbl, cls in self.classes.items():
            for m in cls.members:
                index.setdefault(m, set()).add(lbl)
        return index


@dataclass
class CoarseMapping:
    scheme: str
    table: dict[str, str]  # fine label -> coarse label; missing = pass-through

    def apply(self, label: str) -> str:
        return self.table.get(label, label)


def casing_class(word: str) -> str:
    letters = [ch for ch in word if ch.isalpha()]
    if not letters:
        return "other"
    rest = word[1:]
    if word[0].isupper() and all(not ch.isalpha() or ch.islower() for ch in rest):
        return "title"
    if len(word) >= 2 and all(ch.isupper() for ch in letters):
        return "upper"
    if all(ch.islower() for ch in letters):
        return "lower"
    return "mixed"


def annotate_casing(occurrences: OccurrenceSet, corpus: Corpus) -> ConceptScheme:
    """Type-level casing scheme: title / upper / lower / mixed / other."""
    scheme = ConceptScheme("casing", TYPE_LEVEL)
    for wid in sorted({o.word_id for o in occurrences}):
        scheme.add(casing_class(corpus.word(wid)), wid)
    return scheme


def annotate_suffix(
    occurrences: OccurrenceSet, corpus: Corpus, suffixes: list[str]
) -> ConceptScheme:
    """Type-level suffix scheme; a word may match several suffixes.

    Matching is on the lowercased form and requires the word to be strictly
    longer than the suffix.
    """
    if not suffixes:
        raise DataError("suffix lexicon is empty")
    scheme = ConceptScheme("suffix", TYPE_LEVEL)
    for wid in sorted({o.word_id for o in occurrences}):
        lower = corpus.word(wid).lower()
        for suf in suffixes:
            if len(lower) > len(suf) and lower.endswith(suf):
                scheme.add(suf, wid)
    return scheme


def annotate_ngram(
    occurrences: OccurrenceSet,
    corpus: Corpus,
    n_range: tuple[int, int] = (2, 4),
    min_members: int = 2,
) -> ConceptScheme:
    """Type-level character-ngram scheme over lowercased surface forms.

    Candidate classes are every character n-gram (n in n_range) occurring in
    the selected vocabulary; classes with fewer than min_members word types
    are dropped.
    """
    if min_members < 2:
        raise DataError("min_members must be >= 2")
    lo, hi = n_range
    scheme = ConceptScheme("ngram", TYPE_LEVEL)
    for wid in sorted({o.word_id for o in occurrences}):
        lower = corpus.word(wid).lower()
        grams = set()
        for n in range(lo, hi + 1):
            for i in range(len(lower) - n + 1):
                grams.add(lower[i : i + n])
        for g in sorted(grams):
            scheme.add(g, wid)
    scheme.classes = {
        lbl: cls for lbl, cls in scheme.classes.items() if len(cls.members) >= min_members
    }
    return scheme


def annotate_position(
    occurrences: OccurrenceSet, corpus: Corpus
) -> tuple[ConceptScheme, ConceptScheme]:
    """Contextual first-word and last-word schemes, one class each."""
    first = ConceptScheme("first_word", CONTEXTUAL)
    last = ConceptScheme("last_word", CONTEXTUAL)
    for occ in occurrences:
        if occ.position == 0:
            first.add("first", occ.key)
        if occ.position == len(corpus.sentences[occ.sentence_id]) - 1:
            last.add("last", occ.key)
    return first, last


def load_token_annotations(path: str | Path, scheme_name: str, corpus: Corpus) -> ConceptScheme:
    """Load a contextual scheme from a TSV of per-occurrence labels.

    Expected columns: sentence_id, position, word, label. The word column is
    cross-checked against the corpus; a mismatch means the annotation file
    was produced from different text and is rejected.
    """
    scheme = ConceptScheme(scheme_name, CONTEXTUAL)
    seen: dict[tuple[int, int], str] = {}
    for lineno, parts in _read_tsv(path, ("sentence_id", "position", "word", "label")):
        sid_s, pos_s, word, label = parts
        try:
            sid, pos = int(sid_s), int(pos_s)
        except ValueError:
            raise DataError(f"{path}:{lineno}: non-integer sentence_id/position")
        wid = corpus.token_at(sid, pos)
        if corpus.word(wid) != word:
            raise DataError(
                f"{path}:{lineno}: word {word!r} does not match corpus token "
                f"{corpus.word(wid)!r} at ({sid}, {pos})"
            )
        key = (sid, pos)
        prev = seen.get(key)
        if prev is not None and prev != label:
            raise DataError(
                f"{path}:{lineno}: conflicting labels {prev!r} and {label!r} for {key}"
            )
        seen[key] = label
        scheme.add(label, key)
    return scheme


def load_type_lexicon(
    path: str | Path, scheme_name: str, corpus: Corpus
) -> tuple[ConceptScheme, int]:
    """Load a type-level scheme from a TSV of (label, word) rows.

    Words absent from the corpus vocab are skipped; the skip count is
    returned alongside the scheme.
    """
    scheme = ConceptScheme(scheme_name, TYPE_LEVEL)
    skipped = 0
    for _lineno, parts in _read_tsv(path, ("label", "word")):
        label, word = parts
        wid = corpus.vocab.get(word)
        if wid is None:
            skipped += 1
            continue
        scheme.add(label, wid)
    return scheme, skipped


def coarsen(scheme: ConceptScheme, mapping: CoarseMapping) -> ConceptScheme:
    """Collapse fine classes into coarse ones; unmapped labels pass through."""
    if mapping.scheme != scheme.name:
        raise DataError(
            f"mapping targets scheme {mapping.scheme!r}, got {scheme.name!r}"
        )
    out = ConceptScheme(scheme.name, scheme.kind)
    for lbl, cls in scheme.classes.items():
        coarse = mapping.apply(lbl)
        for m in cls.members:
            out.add(coarse, m)
    return out


def load_coarse_mapping(path: str | Path, scheme_name: str) -> CoarseMapping:
    table = {}
    for _lineno, (fine, coarse) in _read_tsv(path, ("fine", "coarse")):
        table[fine] = coarse
    return CoarseMapping(scheme_name, table)


def builtin_coarse_mapping(name: str, scheme_name: str | None = None) -> CoarseMapping:
    """Shipped fine-to-coarse tables: 'pos' and 'sem'."""
    fname = {"pos": "pos_coarse.tsv", "sem": "sem_coarse.tsv"}.get(name.lower())
    if fname is None:
        raise DataError(f"no builtin coarse mapping named {name!r}")
    with importlib.resources.as_file(
        importlib.resources.files("latentconcepts.data") / fname
    ) as p:
        return load_coarse_mapping(p, scheme_name or name.upper())


def default_suffixes() -> list[str]:
    text = (importlib.resources.files("latentconcepts.data") / "suffixes.txt").read_text()
    return [line.strip() for line in text.splitlines() if line.strip()]


def _read_tsv(path: str | Path, header: tuple[str, ...]):
    """Yield (lineno, columns) for every data row, enforcing the header."""
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not lines:
        raise DataError(f"{path}: empty file, expected header {list(header)}")
    got = tuple(lines[0].rstrip("\n").split("\t"))
    if got != header:
        raise DataError(f"{path}: bad header {list(got)}, expected {list(header)}")
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != len(header):
            raise DataError(
                f"{path}:{lineno}: expected {len(header)} columns, got {len(parts)}"
            )
        yield lineno, parts
