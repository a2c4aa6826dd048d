"""Tests for the preprocessing pipeline."""

from collections import Counter

import numpy as np
import pytest

from figplag.models.text import NerMode, Token
from figplag.services.preprocess_service import (
    lemma_for,
    lemmatize,
    preprocess,
    remove_stopwords,
    strip_references,
    tokenize,
)
from tests.conftest import extracted


def _tokens(*words):
    return [
        Token(surface=w, lower=w.lower(), lemma=w.lower(), position=i)
        for i, w in enumerate(words)
    ]


class TestStripReferences:
    @pytest.mark.parametrize(
        ("text", "expected"),
        [
            ("as shown in [12] and [3,4]", "as shown in  and "),
            ("method (Kulkarni et al., 2021) works", "method  works"),
            ("no citations here", "no citations here"),
            ("ranges [5-7] and [1, 2–4]", "ranges  and "),
        ],
    )
    def test_patterns(self, text, expected):
        assert strip_references(text) == expected

    def test_keeps_parentheses_without_year(self):
        assert strip_references("value (approx.) holds") == "value (approx.) holds"

    def test_idempotent_on_nested_citations(self):
        once = strip_references("see ((Smith, 2020) [4]) here")
        assert strip_references(once) == once


class TestTokenize:
    def test_hyphen_splits(self):
        assert [t.surface for t in tokenize("TF-IDF scores")] == ["TF", "IDF", "scores"]

    def test_empty(self):
        assert tokenize("") == []

    def test_positions_and_case(self):
        tokens = tokenize("Start Process End")
        assert [t.surface for t in tokens] == ["Start", "Process", "End"]
        assert [t.lower for t in tokens] == ["start", "process", "end"]
        assert [t.position for t in tokens] == [0, 1, 2]

    def test_underscore_is_separator(self):
        assert [t.surface for t in tokenize("flow_chart")] == ["flow", "chart"]

    def test_surfaces_reconstruct_letter_digit_content(self):
        rng = np.random.default_rng(4)
        alphabet = list("abcXYZ019 _-.,;()[]\n\té\u00dfДж٣")
        for _ in range(300):
            text = "".join(rng.choice(alphabet, size=int(rng.integers(0, 40))))
            tokens = tokenize(text)
            assert all(t.surface for t in tokens)
            assert [t.position for t in tokens] == list(range(len(tokens)))
            assert "".join(t.surface for t in tokens) == "".join(c for c in text if c.isalnum())


class TestRemoveStopwords:
    def test_drops_listed_words(self):
        tokens = _tokens("the", "cat", "sat", "on", "the", "mat")
        kept = remove_stopwords(tokens, frozenset({"the", "on"}))
        assert [t.surface for t in kept] == ["cat", "sat", "mat"]

    def test_empty(self):
        assert remove_stopwords([], frozenset({"the"})) == []

    def test_identity_when_nothing_listed(self):
        tokens = _tokens("graph", "table")
        assert [t.surface for t in remove_stopwords(tokens, frozenset())] == ["graph", "table"]


class TestLemmatize:
    @pytest.mark.parametrize(
        ("word", "lemma"),
        [
            ("studies", "study"),
            ("tables", "table"),
            ("running", "run"),
            ("classes", "class"),
            ("watches", "watch"),
            ("process", "process"),
            ("jumped", "jump"),
            ("falling", "fall"),
            ("passed", "pass"),
            ("buzzing", "buzz"),
            ("stopped", "stop"),
            ("bus", "bus"),
            ("sing", "sing"),
            ("is", "be"),
            ("children", "child"),
        ],
    )
    def test_rule_table(self, word, lemma):
        from figplag.resources import load_lemma_exceptions

        assert lemma_for(word, load_lemma_exceptions()) == lemma

    def test_lemmatize_sets_lemma_only(self):
        tokens = lemmatize(_tokens("Tables"))
        assert tokens[0].surface == "Tables"
        assert tokens[0].lemma == "table"


class TestPreprocess:
    def test_reference_and_entity_exclusion(self, gazetteer, options):
        text = extracted("q", "The results [3] of Pillai College")
        doc = preprocess(text, options.with_ner_mode(NerMode.EXCLUDE), gazetteer)
        assert doc.lemmas == ["result"]
        assert doc.options.ner_mode == NerMode.EXCLUDE

    def test_include_keeps_entity_tokens(self, gazetteer, options):
        text = extracted("q", "The results [3] of Pillai College")
        doc = preprocess(text, options, gazetteer)
        assert doc.lemmas == ["result", "pillai", "college"]
        assert doc.tokens[1].entity_label == "ORG"

    def test_empty_text(self, gazetteer, options):
        doc = preprocess(extracted("e", ""), options, gazetteer)
        assert doc.is_empty
        assert doc.options == options

    def test_deterministic(self, gazetteer, options):
        text = extracted("d", "Graph of accuracy for Microsoft in 2019 [2].")
        assert preprocess(text, options, gazetteer) == preprocess(text, options, gazetteer)

    def test_options_disable_steps(self, gazetteer, options):
        from dataclasses import replace

        raw = replace(options, strip_refs=False, stopwords=False, lemmatize=False)
        doc = preprocess(extracted("r", "the tables [3]"), raw, gazetteer)
        assert doc.lemmas == ["the", "tables", "3"]

    def test_drop_numbers(self, gazetteer, options):
        from dataclasses import replace

        doc = preprocess(
            extracted("n", "accuracy 95 percent"), replace(options, keep_numbers=False), gazetteer
        )
        assert doc.lemmas == ["accuracy", "percent"]

    def test_excluded_stream_is_subsequence(self, gazetteer, options):
        text = extracted("s", "Ada Lovelace wrote notes in 1843 about the Analytical Engine design")
        include = preprocess(text, options, gazetteer)
        exclude = preprocess(text, options.with_ner_mode(NerMode.EXCLUDE), gazetteer)
        assert include.entities
        it = iter(include.lemmas)
        assert all(lemma in it for lemma in exclude.lemmas)
        assert len(exclude.lemmas) < len(include.lemmas)

    def test_bag_of_words_commutes_with_concatenation(self, gazetteer, options):
        words = ["the", "graphs", "running", "sales", "of", "region", "studies", "and", "42"]
        rng = np.random.default_rng(6)
        for _ in range(50):
            a = " ".join(rng.choice(words, size=int(rng.integers(0, 12))))
            b = " ".join(rng.choice(words, size=int(rng.integers(0, 12))))
            joined = preprocess(extracted("ab", f"{a}\n{b}"), options, gazetteer)
            left = preprocess(extracted("a", a), options, gazetteer)
            right = preprocess(extracted("b", b), options, gazetteer)
            assert not joined.entities
            assert Counter(joined.lemmas) == Counter(left.lemmas) + Counter(right.lemmas)
