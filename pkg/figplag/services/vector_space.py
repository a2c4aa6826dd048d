"""Vocabulary construction and term-frequency / TF-IDF vectorization."""

from collections import Counter
from collections.abc import Iterable, Sequence

import numpy as np

from figplag.errors import EmptyCorpusError
from figplag.models.text import PreprocessedDoc
from figplag.models.vectors import TermVector, Vocabulary

Lemmas = PreprocessedDoc | Iterable[str]


def _lemmas(doc: Lemmas) -> list[str]:
    return doc.lemmas if isinstance(doc, PreprocessedDoc) else list(doc)


def build_vocabulary(docs: Sequence[Lemmas]) -> Vocabulary:
    """Index every distinct lemma by first appearance (document order, then position)."""
    if not docs:
        raise EmptyCorpusError("Cannot build a vocabulary from zero documents")
    order: dict[str, int] = {}
    df: Counter[str] = Counter()
    for doc in docs:
        lemmas = _lemmas(doc)
        for lemma in lemmas:
            order.setdefault(lemma, len(order))
        df.update(set(lemmas))
    if not order:
        raise EmptyCorpusError("Every document is empty after preprocessing")
    terms = tuple(order)
    return Vocabulary(terms=terms, df=tuple(df[t] for t in terms), n_docs=len(docs))


def tf_vector(doc: Lemmas, vocab: Vocabulary) -> TermVector:
    """Raw counts of in-vocabulary lemmas; out-of-vocabulary lemmas are ignored."""
    index = vocab.term_to_index
    counts = Counter(index[lemma] for lemma in _lemmas(doc) if lemma in index)
    return TermVector(dict(counts))


def pair_tf_vectors(a: Lemmas, b: Lemmas) -> tuple[TermVector, TermVector]:
    """Raw counts of two documents over their joint vocabulary; no lemma is dropped."""
    left, right = _lemmas(a), _lemmas(b)
    if not left and not right:
        return TermVector({}), TermVector({})
    vocab = build_vocabulary([left, right])
    return tf_vector(left, vocab), tf_vector(right, vocab)


def tfidf_vector(doc: Lemmas, vocab: Vocabulary) -> TermVector:
    """tf(t) * ln(n_docs / df(t)); terms unknown to the corpus (df = 0) are ignored."""
    tf = tf_vector(doc, vocab)
    return TermVector({i: count * vocab.idf(i) for i, count in tf})


def tfidf_vectors(docs: Sequence[Lemmas], vocab: Vocabulary) -> list[TermVector]:
    return [tfidf_vector(doc, vocab) for doc in docs]


def weight_matrix(vectors: Sequence[TermVector], n_terms: int) -> np.ndarray:
    """Dense docs x terms matrix; documents are rows."""
    matrix = np.zeros((len(vectors), n_terms))
    for row, vector in enumerate(vectors):
        for i, w in vector:
            matrix[row, i] = w
    return matrix
