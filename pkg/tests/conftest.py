import pytest

from latentconcepts.corpus import Corpus, FilterConfig, filter_occurrences, load_corpus


@pytest.fixture
def tiny_corpus(tmp_path):
    path = tmp_path / "corpus.txt"
    path.write_text("the cat sat\nthe dog ran fast\nthe cat ran\n")
    return load_corpus(path)


@pytest.fixture
def tiny_occurrences(tiny_corpus):
    return filter_occurrences(tiny_corpus, FilterConfig(min_frequency=1, max_occurrences=10))
