"""Tests for lexicon loading and taxonomy similarity measures."""

import numpy as np
import pytest

from figplag.models.lexicon import SynsetRef, WordNetMeasure
from figplag.models.report import ScoreWarning
from figplag.resources import TOY_LEXICON_FILE
from figplag.selftest import random_taxonomy
from figplag.services.wordnet_service import (
    WORD_CACHE_SIZE,
    CyclicTaxonomyError,
    DanglingParentError,
    LexiconParseError,
    WordNetService,
    load_lexicon,
)

DOG, CAT = SynsetRef("dog.n.01"), SynsetRef("cat.n.01")


def _write(tmp_path, *lines):
    path = tmp_path / "lexicon.wn"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def wordnet(toy_lexicon):
    return WordNetService(toy_lexicon)


class TestLoadLexicon:
    def test_toy_file(self, toy_lexicon):
        assert len(toy_lexicon.synsets) == 4
        assert toy_lexicon.roots == ("entity.n.01",)
        assert toy_lexicon.hypernyms["dog.n.01"] == frozenset({"animal.n.01"})

    def test_bundled_lexicons_load(self):
        assert load_lexicon().roots
        assert "oak.n.01" in load_lexicon(TOY_LEXICON_FILE)

    def test_cycle(self, tmp_path):
        path = _write(tmp_path, "x|n|x|y", "y|n|y|x")
        with pytest.raises(CyclicTaxonomyError):
            load_lexicon(path)

    def test_dangling_parent(self, tmp_path):
        path = _write(tmp_path, "x|n|x|missing")
        with pytest.raises(DanglingParentError, match="missing"):
            load_lexicon(path)

    def test_wrong_field_count_reports_line(self, tmp_path):
        path = _write(tmp_path, "x|n|x|", "broken|n|y")
        with pytest.raises(LexiconParseError) as exc_info:
            load_lexicon(path)
        assert exc_info.value.lineno == 2

    def test_unknown_pos(self, tmp_path):
        with pytest.raises(LexiconParseError, match="part of speech"):
            load_lexicon(_write(tmp_path, "x|q|x|"))

    def test_duplicate_id(self, tmp_path):
        with pytest.raises(LexiconParseError, match="duplicate"):
            load_lexicon(_write(tmp_path, "x|n|x|", "x|n|y|"))

    def test_comments_and_blank_lines(self, tmp_path):
        lexicon = load_lexicon(_write(tmp_path, "# header", "", "x|n|x|"))
        assert list(lexicon.synsets) == ["x"]

    def test_noun_synsets_skip_verbs(self, tmp_path):
        lexicon = load_lexicon(_write(tmp_path, "run.v|v|run|", "run.n|n|run|"))
        assert lexicon.noun_synsets("run") == ["run.n"]


class TestSynsetMeasures:
    def test_depth(self, wordnet):
        assert wordnet.depth(SynsetRef("entity.n.01")) == 1
        assert wordnet.depth(DOG) == 3

    def test_path_similarity(self, wordnet):
        assert wordnet.shortest_path_length(DOG, CAT) == 2
        assert wordnet.path_similarity(DOG, CAT) == pytest.approx(1 / 3)

    def test_wu_palmer(self, wordnet):
        assert wordnet.lowest_common_subsumer(DOG, CAT) == "animal.n.01"
        assert wordnet.wu_palmer(DOG, CAT) == pytest.approx(2 / 3)

    def test_identity(self, wordnet):
        assert wordnet.wu_palmer(DOG, DOG) == 1.0
        assert wordnet.path_similarity(DOG, DOG) == 1.0

    def test_symmetric(self, wordnet):
        assert wordnet.wu_palmer(DOG, CAT) == wordnet.wu_palmer(CAT, DOG)

    def test_unknown_synset(self, wordnet):
        with pytest.raises(ValueError):
            wordnet.depth(SynsetRef("nope"))

    def test_multiple_roots_share_a_virtual_root(self, tmp_path):
        lexicon = load_lexicon(
            _write(tmp_path, "a|n|a|", "b|n|b|", "a1|n|apple|a", "b1|n|brick|b")
        )
        service = WordNetService(lexicon)
        assert service.depth(SynsetRef("a")) == 2
        assert service.wu_palmer(SynsetRef("a1"), SynsetRef("b1")) == pytest.approx(1 / 3)
        assert service.path_similarity(SynsetRef("a1"), SynsetRef("b1")) == pytest.approx(1 / 5)


class TestWordSimilarity:
    def test_default_measure(self, wordnet):
        assert wordnet.word_similarity("dog", "cat") == pytest.approx(2 / 3)

    def test_path_measure(self, toy_lexicon):
        service = WordNetService(toy_lexicon, WordNetMeasure.PATH)
        assert service.word_similarity("dog", "cat") == pytest.approx(1 / 3)

    def test_out_of_lexicon_words(self, wordnet):
        assert wordnet.word_similarity("banana", "banana") == 1.0
        assert wordnet.word_similarity("banana", "dog") == 0.0
        assert wordnet.word_similarity("banana", "apple") == 0.0

    def test_order_independent_and_cached(self, wordnet):
        assert wordnet.word_similarity("cat", "dog") == wordnet.word_similarity("dog", "cat")
        info = wordnet._cached_word_similarity.cache_info()
        assert info.maxsize == WORD_CACHE_SIZE
        assert info.hits == 1
        assert info.currsize == 1


class TestRandomTaxonomies:
    @pytest.mark.parametrize("seed", range(5))
    def test_wu_palmer_symmetric_and_bounded(self, seed):
        rng = np.random.default_rng(seed)
        service = WordNetService(random_taxonomy(rng, 25))
        ids = sorted(service.lexicon.synsets)
        for a in ids:
            assert service.wu_palmer(SynsetRef(a), SynsetRef(a)) == 1.0
            for b in ids:
                value = service.wu_palmer(SynsetRef(a), SynsetRef(b))
                assert 0.0 < value <= 1.0
                assert value == service.wu_palmer(SynsetRef(b), SynsetRef(a))


class TestDocSimilarity:
    def test_single_words(self, wordnet):
        score = wordnet.doc_similarity(["dog"], ["cat"])
        assert score.value == pytest.approx(2 / 3)
        assert score.warning is None

    def test_symmetric_average(self, wordnet):
        # dog/banana -> dog: (1 + 0) / 2; dog -> dog/banana: 1
        assert wordnet.doc_similarity(["dog", "banana"], ["dog"]).value == pytest.approx(0.75)

    def test_duplicates_collapse(self, wordnet):
        assert wordnet.doc_similarity(["dog", "dog"], ["cat"]).value == pytest.approx(2 / 3)

    def test_empty_side(self, wordnet):
        score = wordnet.doc_similarity([], ["dog"])
        assert score.value == 0.0
        assert score.warning == ScoreWarning.EMPTY_COMPARISON
