"""Text preprocessing: reference stripping, tokenization, stopwords and rule-based lemmas."""

import re
from collections.abc import Iterable, Sequence
from dataclasses import replace

from figplag.models.document import ExtractedText
from figplag.models.text import EntitySpan, NerMode, PipelineOptions, PreprocessedDoc, Token
from figplag.resources import load_lemma_exceptions, load_stopwords
from figplag.services.ner_service import Gazetteer, exclude_entities, tag_entities
from figplag.services.tokenizer import tokenize

__all__ = [
    "lemma_for",
    "lemmatize",
    "preprocess",
    "remove_stopwords",
    "strip_references",
    "tokenize",
]

# [12], [3,4], [5-7], [1, 2–4]
_NUMERIC_CITATION_RE = re.compile(r"\[\s*\d+(?:\s*[,\-–]\s*\d+)*\s*\]")
# Parenthetical that mentions a year in 1500–2099, e.g. (Smith et al., 2021)
_AUTHOR_YEAR_RE = re.compile(r"\([^()]*?\b(?:1[5-9]\d\d|20\d\d)\b[^()]*\)")

# Doubled finals that stay doubled: vowels plus the classic l/s/z exemptions.
_KEEP_DOUBLE = frozenset("aeioulsz")


def strip_references(text: str) -> str:
    """Remove bracketed numeric and parenthesized author-year citations. Idempotent."""
    while True:
        stripped = _AUTHOR_YEAR_RE.sub("", _NUMERIC_CITATION_RE.sub("", text))
        if stripped == text:
            return text
        text = stripped


def remove_stopwords(
    tokens: Iterable[Token], stopwords: frozenset[str] | None = None
) -> list[Token]:
    stopwords = load_stopwords() if stopwords is None else stopwords
    return [replace(t, is_stopword=False) for t in tokens if t.lower not in stopwords]


def _undouble(stem: str) -> str:
    if len(stem) >= 2 and stem[-1] == stem[-2] and stem[-1] not in _KEEP_DOUBLE:
        return stem[:-1]
    return stem


def lemma_for(word: str, exceptions: dict[str, str]) -> str:
    """Apply the exception table, then the ordered suffix rules, to a lowercase word."""
    if word in exceptions:
        return exceptions[word]
    if word.endswith("sses"):
        return word[:-2]
    if word.endswith("ies") and len(word) > 3:
        return word[:-3] + "y"
    if word.endswith(("ches", "shes")):
        return word[:-2]
    if word.endswith("s") and len(word) > 3 and not word.endswith("ss"):
        return word[:-1]
    if word.endswith("ing") and len(word) - 3 >= 3:
        return _undouble(word[:-3])
    if word.endswith("ed") and len(word) - 2 >= 3:
        return _undouble(word[:-2])
    return word


def lemmatize(tokens: Iterable[Token], exceptions: dict[str, str] | None = None) -> list[Token]:
    exceptions = load_lemma_exceptions() if exceptions is None else exceptions
    return [replace(t, lemma=lemma_for(t.lower, exceptions) or t.lower) for t in tokens]


def _label_tokens(tokens: Sequence[Token], spans: Sequence[EntitySpan]) -> list[Token]:
    labelled = []
    for token in tokens:
        label = next((s.label for s in spans if s.covers(token.position)), None)
        labelled.append(replace(token, entity_label=label) if label else token)
    return labelled


def preprocess(
    text: ExtractedText,
    options: PipelineOptions,
    gazetteer: Gazetteer,
    stopwords: frozenset[str] | None = None,
    exceptions: dict[str, str] | None = None,
) -> PreprocessedDoc:
    """Run strip_references -> tokenize -> NER -> stopwords -> lemmatize, in that order.

    Entity exclusion happens on token positions, so it is applied after the steps that
    only drop or rewrite tokens; the surviving stream is identical to excluding first.
    """
    stopwords = load_stopwords() if stopwords is None else stopwords
    raw = strip_references(text.raw_text) if options.strip_refs else text.raw_text
    tokens = tokenize(raw)
    spans = tag_entities(tokens, gazetteer, stopwords)
    tokens = _label_tokens(tokens, spans)
    if not options.keep_numbers:
        tokens = [t for t in tokens if not t.lower.isdigit()]
    if options.stopwords:
        tokens = remove_stopwords(tokens, stopwords)
    if options.lemmatize:
        tokens = lemmatize(tokens, exceptions)

    doc = PreprocessedDoc(
        doc_id=text.doc_id,
        tokens=tuple(tokens),
        options=options.with_ner_mode(NerMode.INCLUDE),
        entities=tuple(spans),
    )
    if options.ner_mode == NerMode.EXCLUDE:
        doc = exclude_entities(doc, spans)
    return doc
