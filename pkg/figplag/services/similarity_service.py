"""Statistical similarity primitives and the dispatcher over all six algorithms."""

import logging
from collections.abc import Collection, Iterable
from dataclasses import dataclass

import numpy as np

from figplag.errors import FigplagError
from figplag.models.embedding import DocEmbedding
from figplag.models.report import AlgorithmId, SimilarityScore
from figplag.models.text import PipelineOptions, PreprocessedDoc
from figplag.models.vectors import LatentIndex, TermVector, Vocabulary
from figplag.services.embedding_service import EmbeddingService, embed_similarity
from figplag.services.lsa_service import project_query
from figplag.services.vector_space import pair_tf_vectors, tfidf_vector
from figplag.services.wordnet_service import WordNetService

_log = logging.getLogger(__name__)

LATENT_FLOOR = 1e-9


class OptionsMismatchError(FigplagError):
    """Raised when a query was preprocessed with options the index was not built with."""


def jaccard(a: Collection[str], b: Collection[str]) -> SimilarityScore:
    """|A & B| / |A | B| over lemma sets; two empty sets score 0 with a warning."""
    left, right = set(a), set(b)
    union = left | right
    if not union:
        return SimilarityScore.empty(AlgorithmId.JACCARD)
    return SimilarityScore(len(left & right) / len(union), AlgorithmId.JACCARD)


def cosine(
    u: TermVector, v: TermVector, algorithm: AlgorithmId = AlgorithmId.COSINE
) -> SimilarityScore:
    if u.is_zero or v.is_zero:
        return SimilarityScore.empty(algorithm)
    return SimilarityScore.clamped(u.dot(v) / (u.norm * v.norm), algorithm)


def dense_cosine(u: np.ndarray, v: np.ndarray, algorithm: AlgorithmId) -> SimilarityScore:
    norm_u = float(np.linalg.norm(u))
    norm_v = float(np.linalg.norm(v))
    if norm_u == 0.0 or norm_v == 0.0:
        return SimilarityScore.empty(algorithm)
    return SimilarityScore.clamped(float(u @ v) / (norm_u * norm_v), algorithm)


@dataclass(frozen=True, eq=False)
class DocumentFeatures:
    """Everything the six algorithms read from one side of a comparison."""

    doc_id: str
    fingerprint: str
    lemmas: tuple[str, ...]
    lemma_set: frozenset[str]
    tfidf: TermVector
    latent: np.ndarray | None = None
    embedding: DocEmbedding | None = None

    @property
    def is_empty(self) -> bool:
        return not self.lemmas


@dataclass(frozen=True, eq=False)
class ScoringContext:
    """Index artifacts of one NER mode plus the semantic services."""

    options: PipelineOptions
    vocabulary: Vocabulary
    latent: LatentIndex | None
    wordnet: WordNetService
    embedder: EmbeddingService

    def features(
        self,
        doc: PreprocessedDoc,
        algorithms: Iterable[AlgorithmId] = tuple(AlgorithmId),
        latent: np.ndarray | None = None,
        embedding: DocEmbedding | None = None,
    ) -> DocumentFeatures:
        """Vectorize *doc* against this context; embeddings are fetched only when needed."""
        if doc.options != self.options:
            raise OptionsMismatchError(
                f"{doc.doc_id} was preprocessed with options {doc.options.fingerprint()}, "
                f"index expects {self.options.fingerprint()}"
            )
        algorithms = set(algorithms)
        lemmas = tuple(doc.lemmas)
        tfidf = tfidf_vector(lemmas, self.vocabulary)
        if latent is None and self.latent is not None and not tfidf.is_zero:
            latent = project_query(tfidf, self.latent)
            # Weight outside the latent subspace leaves only rounding noise.
            if np.linalg.norm(latent * self.latent.singular_values) <= LATENT_FLOOR * tfidf.norm:
                _log.debug("%s is orthogonal to the LSA subspace", doc.doc_id)
                latent = None
        if embedding is None and AlgorithmId.EMBED in algorithms:
            embedding = self.embedder.embed(doc)
        return DocumentFeatures(
            doc_id=doc.doc_id,
            fingerprint=doc.options.fingerprint(),
            lemmas=lemmas,
            lemma_set=frozenset(lemmas),
            tfidf=tfidf,
            latent=latent,
            embedding=embedding,
        )


def score(
    algo: AlgorithmId,
    query: DocumentFeatures,
    target: DocumentFeatures,
    context: ScoringContext,
) -> SimilarityScore:
    """Score *query* against one corpus document (or the pooled corpus) with *algo*."""
    expected = context.options.fingerprint()
    if query.fingerprint != expected or target.fingerprint != expected:
        raise OptionsMismatchError(
            f"Options fingerprint mismatch: query {query.fingerprint}, index {expected}"
        )
    if query.is_empty or target.is_empty:
        _log.debug("Empty comparison %s vs %s (%s)", query.doc_id, target.doc_id, algo)
        return SimilarityScore.empty(algo)

    match algo:
        case AlgorithmId.JACCARD:
            return jaccard(query.lemma_set, target.lemma_set)
        case AlgorithmId.COSINE:
            return cosine(*pair_tf_vectors(query.lemmas, target.lemmas), AlgorithmId.COSINE)
        case AlgorithmId.TFIDF:
            return cosine(query.tfidf, target.tfidf, AlgorithmId.TFIDF)
        case AlgorithmId.LSA:
            if query.latent is None or target.latent is None:
                return SimilarityScore.empty(AlgorithmId.LSA)
            return dense_cosine(query.latent, target.latent, AlgorithmId.LSA)
        case AlgorithmId.EMBED:
            if query.embedding is None or target.embedding is None:
                raise ValueError("embed scoring requires embeddings on both sides")
            return embed_similarity(query.embedding, target.embedding)
        case AlgorithmId.WORDNET:
            return context.wordnet.doc_similarity(query.lemma_set, target.lemma_set)
    raise ValueError(f"Unknown algorithm {algo!r}")
