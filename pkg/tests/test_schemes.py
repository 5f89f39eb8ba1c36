import pytest

from latentconcepts.corpus import FilterConfig, filter_occurrences, load_corpus
from latentconcepts.errors import DataError
from latentconcepts.schemes import (
    CONTEXTUAL,
    TYPE_LEVEL,
    annotate_casing,
    annotate_ngram,
    annotate_position,
    annotate_suffix,
    builtin_coarse_mapping,
    casing_class,
    coarsen,
    default_suffixes,
    load_token_annotations,
    load_type_lexicon,
)


def build(tmp_path, text):
    p = tmp_path / "c.txt"
    p.write_text(text)
    corpus = load_corpus(p)
    occs = filter_occurrences(corpus, FilterConfig(min_frequency=1, max_occurrences=100))
    return corpus, occs


@pytest.mark.parametrize(
    "word,expected",
    [
        ("Paris", "title"),
        ("NATO", "upper"),
        ("iOS", "mixed"),
        ("cat", "lower"),
        ("1234", "other"),
        ("A", "title"),
        ("McDonald", "mixed"),
        ("U.S.", "upper"),
    ],
)
def test_casing_classes(word, expected):
    assert casing_class(word) == expected


def test_annotate_casing_covers_every_type(tmp_path):
    corpus, occs = build(tmp_path, "Paris NATO iOS cat 1234\n")
    scheme = annotate_casing(occs, corpus)
    assert scheme.kind == TYPE_LEVEL
    covered = set().union(*(c.members for c in scheme.classes.values()))
    assert covered == {o.word_id for o in occs}


class TestSuffix:
    def test_paper_example(self, tmp_path):
        corpus, occs = build(tmp_path, "bigger\n")
        scheme = annotate_suffix(occs, corpus, ["er", "est"])
        assert scheme.labels_of(corpus.vocab["bigger"]) == {"er"}

    def test_word_equal_to_suffix_excluded(self, tmp_path):
        corpus, occs = build(tmp_path, "er\n")
        scheme = annotate_suffix(occs, corpus, ["er"])
        assert scheme.classes == {}

    def test_multi_membership(self, tmp_path):
        corpus, occs = build(tmp_path, "cities\n")
        scheme = annotate_suffix(occs, corpus, ["es", "ies"])
        assert scheme.labels_of(corpus.vocab["cities"]) == {"es", "ies"}

    def test_empty_lexicon_rejected(self, tmp_path):
        corpus, occs = build(tmp_path, "cat\n")
        with pytest.raises(DataError):
            annotate_suffix(occs, corpus, [])

    def test_default_list_nonempty(self):
        suffixes = default_suffixes()
        assert len(suffixes) > 40
        assert "er" in suffixes and "ing" in suffixes


class TestNgram:
    def test_shared_trigram(self, tmp_path):
        corpus, occs = build(tmp_path, "ace face place\n")
        scheme = annotate_ngram(occs, corpus, n_range=(3, 3), min_members=2)
        members = scheme.classes["ace"].members
        assert members == {corpus.vocab[w] for w in ("ace", "face", "place")}

    def test_single_char_word_in_no_class(self, tmp_path):
        corpus, occs = build(tmp_path, "a bb bb\n")
        scheme = annotate_ngram(occs, corpus, min_members=2)
        for cls in scheme.classes.values():
            assert corpus.vocab["a"] not in cls.members

    def test_min_members_threshold(self, tmp_path):
        corpus, occs = build(tmp_path, "abc abd xyz\n")
        scheme = annotate_ngram(occs, corpus, min_members=3, n_range=(2, 2))
        assert scheme.classes == {}

    def test_suffix_refines_ngram(self, tmp_path):
        corpus, occs = build(tmp_path, "walking talking jumping colder warmer\n")
        suffixes = [s for s in ("ing", "er") ]
        suf = annotate_suffix(occs, corpus, suffixes)
        ng = annotate_ngram(occs, corpus, n_range=(2, 4), min_members=2)
        for lbl, cls in suf.classes.items():
            assert lbl in ng.classes
            assert cls.members <= ng.classes[lbl].members


class TestPosition:
    def test_first_and_last(self, tmp_path):
        corpus, occs = build(tmp_path, "a b c\n")
        first, last = annotate_position(occs, corpus)
        assert first.kind == CONTEXTUAL
        assert first.classes["first"].members == {(0, 0)}
        assert last.classes["last"].members == {(0, 2)}

    def test_single_token_sentence_in_both(self, tmp_path):
        corpus, occs = build(tmp_path, "solo\n")
        first, last = annotate_position(occs, corpus)
        assert (0, 0) in first.classes["first"].members
        assert (0, 0) in last.classes["last"].members


class TestTokenAnnotations:
    def test_load(self, tmp_path):
        corpus, _ = build(tmp_path, "the sea is blue\n")
        ann = tmp_path / "pos.tsv"
        ann.write_text(
            "sentence_id\tposition\tword\tlabel\n"
            "0\t1\tsea\tNN\n0\t3\tblue\tJJ\n"
        )
        scheme = load_token_annotations(ann, "POS", corpus)
        assert scheme.kind == CONTEXTUAL
        assert (0, 1) in scheme.classes["NN"].members

    def test_word_mismatch_rejected(self, tmp_path):
        corpus, _ = build(tmp_path, "the sea\n")
        ann = tmp_path / "pos.tsv"
        ann.write_text("sentence_id\tposition\tword\tlabel\n0\t1\tocean\tNN\n")
        with pytest.raises(DataError, match="ocean"):
            load_token_annotations(ann, "POS", corpus)

    def test_conflicting_duplicate_rejected(self, tmp_path):
        corpus, _ = build(tmp_path, "run\n")
        ann = tmp_path / "pos.tsv"
        ann.write_text(
            "sentence_id\tposition\tword\tlabel\n0\t0\trun\tVB\n0\t0\trun\tNN\n"
        )
        with pytest.raises(DataError, match="conflicting"):
            load_token_annotations(ann, "POS", corpus)

    def test_malformed_row(self, tmp_path):
        corpus, _ = build(tmp_path, "x\n")
        ann = tmp_path / "pos.tsv"
        ann.write_text("sentence_id\tposition\tword\tlabel\n0\t0\tx\n")
        with pytest.raises(DataError, match="columns"):
            load_token_annotations(ann, "POS", corpus)


class TestTypeLexicon:
    def test_load_and_skip(self, tmp_path):
        corpus, _ = build(tmp_path, "bishop parish\n")
        lex = tmp_path / "liwc.tsv"
        lex.write_text(
            "label\tword\nreligion\tbishop\nreligion\tparish\nreligion\tmosque\n"
        )
        scheme, skipped = load_type_lexicon(lex, "LIWC", corpus)
        assert scheme.kind == TYPE_LEVEL
        assert scheme.classes["religion"].members == {
            corpus.vocab["bishop"],
            corpus.vocab["parish"],
        }
        assert skipped == 1

    def test_word_under_two_labels(self, tmp_path):
        corpus, _ = build(tmp_path, "light\n")
        lex = tmp_path / "wn.tsv"
        lex.write_text("label\tword\nnoun.object\tlight\nadj.all\tlight\n")
        scheme, _ = load_type_lexicon(lex, "WordNet", corpus)
        assert scheme.labels_of(corpus.vocab["light"]) == {"noun.object", "adj.all"}


class TestCoarsen:
    def test_builtin_pos_rows(self):
        mapping = builtin_coarse_mapping("pos", "POS")
        assert mapping.apply("JJR") == "Adjective"
        assert mapping.apply("NNS") == "Noun"
        assert mapping.apply("MD") == "MD"  # pass-through

    def test_builtin_sem_rows(self):
        mapping = builtin_coarse_mapping("sem", "SEM")
        assert mapping.apply("GPE") == "NAM"
        assert mapping.apply("EPS") == "TNS"

    def test_membership_preserved(self, tmp_path):
        corpus, _ = build(tmp_path, "big bigger biggest ran runs\n")
        ann = tmp_path / "pos.tsv"
        ann.write_text(
            "sentence_id\tposition\tword\tlabel\n"
            "0\t0\tbig\tJJ\n0\t1\tbigger\tJJR\n0\t2\tbiggest\tJJS\n"
            "0\t3\tran\tVBD\n0\t4\truns\tVBZ\n"
        )
        fine = load_token_annotations(ann, "POS", corpus)
        coarse = coarsen(fine, builtin_coarse_mapping("pos", "POS"))
        fine_total = sum(len(c.members) for c in fine.classes.values())
        coarse_total = sum(len(c.members) for c in coarse.classes.values())
        assert fine_total == coarse_total
        assert coarse.classes["Adjective"].members == {(0, 0), (0, 1), (0, 2)}
        assert coarse.classes["Verb"].members == {(0, 3), (0, 4)}

    def test_scheme_name_mismatch(self, tmp_path):
        corpus, _ = build(tmp_path, "x\n")
        ann = tmp_path / "pos.tsv"
        ann.write_text("sentence_id\tposition\tword\tlabel\n0\t0\tx\tNN\n")
        scheme = load_token_annotations(ann, "POS", corpus)
        with pytest.raises(DataError):
            coarsen(scheme, builtin_coarse_mapping("sem", "SEM"))


def test_reverse_membership_consistency(tmp_path):
    corpus, occs = build(tmp_path, "Paris NATO cat cats\n")
    scheme = annotate_casing(occs, corpus)
    for lbl, cls in scheme.classes.items():
        for wid in cls.members:
            assert lbl in scheme.labels_of(wid)
