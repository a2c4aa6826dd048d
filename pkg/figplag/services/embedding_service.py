"""Document embeddings for the "BERT" column: HTTP provider or deterministic fallback.

Fallback token vectors are generated from a splitmix64 stream. For a lemma ``w`` and seed
``s`` the stream state starts at the first 8 bytes (little-endian) of
``blake2b(f"{s}:{w}", digest_size=8)``; element ``i`` (1-based) is

    z = state + i * 0x9E3779B97F4A7C15                  (mod 2**64)
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9            (mod 2**64)
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB            (mod 2**64)
    z = z ^ (z >> 31)
    x_i = 2 * (z >> 11) / 2**53 - 1

and the token vector is ``x / ||x||``. A document vector is the normalized sum of its
token vectors weighted by term frequency, summed in sorted lemma order.
"""

import hashlib
import logging
import os
import threading
from collections import Counter
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor

import httpx
import numpy as np

from figplag.errors import FigplagError
from figplag.models.embedding import DocEmbedding, EmbeddingProviderConfig, EmbeddingProviderKind
from figplag.models.report import AlgorithmId, SimilarityScore
from figplag.models.text import PreprocessedDoc

_log = logging.getLogger(__name__)

GOLDEN_GAMMA = np.uint64(0x9E3779B97F4A7C15)
MIX_1 = np.uint64(0xBF58476D1CE4E5B9)
MIX_2 = np.uint64(0x94D049BB133111EB)


class EmbedHttpError(FigplagError):
    """Raised when the embedding service fails or answers with a malformed body."""


class DimensionMismatchError(FigplagError):
    """Raised when embedding dimensions disagree."""


def splitmix64_stream(state: int, count: int) -> np.ndarray:
    """``count`` splitmix64 outputs following *state*, as uint64."""
    steps = np.arange(1, count + 1, dtype=np.uint64)
    z = np.uint64(state) + steps * GOLDEN_GAMMA
    z = (z ^ (z >> np.uint64(30))) * MIX_1
    z = (z ^ (z >> np.uint64(27))) * MIX_2
    return z ^ (z >> np.uint64(31))


def token_vector(lemma: str, seed: int, dim: int) -> np.ndarray:
    """Unit pseudo-random vector depending only on (lemma, seed, dim)."""
    digest = hashlib.blake2b(f"{seed}:{lemma}".encode(), digest_size=8).digest()
    stream = splitmix64_stream(int.from_bytes(digest, "little"), dim)
    x = (stream >> np.uint64(11)).astype(np.float64) * (2.0 / 2**53) - 1.0
    return x / np.linalg.norm(x)


def _text_for(doc: PreprocessedDoc) -> str:
    return " ".join(doc.lemmas)


class EmbeddingService:
    """Embeds preprocessed documents with the configured provider."""

    def __init__(self, config: EmbeddingProviderConfig, timeout: float = 30.0):
        self.config = config
        self._timeout = timeout
        self._cache: dict[str, DocEmbedding] = {}
        self._lock = threading.Lock()
        self._api_key = ""
        if config.kind == EmbeddingProviderKind.HTTP:
            self._api_key = os.environ.get(config.credential_env, "")
            if not self._api_key:
                raise EmbedHttpError(
                    f"Embedding credential env var {config.credential_env} is not set"
                )

    @property
    def label(self) -> str:
        return self.config.label

    def embed(self, doc: PreprocessedDoc) -> DocEmbedding:
        if self.config.kind == EmbeddingProviderKind.FALLBACK:
            return self._embed_fallback(doc)
        return self._embed_http(doc)

    def embed_many(self, docs: Sequence[PreprocessedDoc]) -> list[DocEmbedding]:
        if self.config.kind == EmbeddingProviderKind.FALLBACK or len(docs) < 2:
            return [self.embed(doc) for doc in docs]
        with ThreadPoolExecutor(max_workers=self.config.max_in_flight) as pool:
            return list(pool.map(self.embed, docs))

    def _embed_fallback(self, doc: PreprocessedDoc) -> DocEmbedding:
        dim = self.config.dim
        total = np.zeros(dim)
        for lemma, count in sorted(Counter(doc.lemmas).items()):
            total += count * token_vector(lemma, self.config.seed, dim)
        norm = np.linalg.norm(total)
        vector = total / norm if norm > 0 else total
        return DocEmbedding(vector=vector, source=EmbeddingProviderKind.FALLBACK)

    def _embed_http(self, doc: PreprocessedDoc) -> DocEmbedding:
        text = _text_for(doc)
        key = hashlib.sha256(text.encode("utf-8")).hexdigest()
        with self._lock:
            cached = self._cache.get(key)
        if cached is not None:
            return cached

        try:
            with httpx.Client(timeout=self._timeout) as client:
                resp = client.post(
                    self.config.endpoint,
                    json={"text": text},
                    headers={"Authorization": f"Bearer {self._api_key}"},
                )
                resp.raise_for_status()
                data = resp.json()
        except (httpx.HTTPError, ValueError) as exc:
            raise EmbedHttpError(f"Embedding request failed for {doc.doc_id}: {exc}") from exc

        raw = data.get("vector") if isinstance(data, dict) else None
        if not isinstance(raw, list):
            raise EmbedHttpError(f"Embedding response for {doc.doc_id} has no 'vector' list")
        try:
            vector = np.array(raw, dtype=float)
        except (TypeError, ValueError) as exc:
            raise EmbedHttpError(f"Embedding for {doc.doc_id} is not numeric") from exc
        if vector.ndim != 1 or vector.shape[0] != self.config.dim:
            raise DimensionMismatchError(
                f"Embedding for {doc.doc_id} has dim {vector.size}, expected {self.config.dim}"
            )
        if not np.all(np.isfinite(vector)):
            raise EmbedHttpError(f"Embedding for {doc.doc_id} has non-finite entries")

        embedding = DocEmbedding(vector=vector, source=EmbeddingProviderKind.HTTP)
        with self._lock:
            self._cache[key] = embedding
        return embedding


def embed_similarity(a: DocEmbedding, b: DocEmbedding) -> SimilarityScore:
    """max(0, cosine(a, b)); a zero vector on either side scores 0 with a warning."""
    if a.dim != b.dim:
        raise DimensionMismatchError(f"Cannot compare embeddings of dim {a.dim} and {b.dim}")
    norm_a = float(np.linalg.norm(a.vector))
    norm_b = float(np.linalg.norm(b.vector))
    if norm_a == 0.0 or norm_b == 0.0:
        return SimilarityScore.empty(AlgorithmId.EMBED)
    value = float(a.vector @ b.vector) / (norm_a * norm_b)
    return SimilarityScore.clamped(value, AlgorithmId.EMBED)
