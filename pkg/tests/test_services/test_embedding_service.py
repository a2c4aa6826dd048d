"""Tests for the fallback and HTTP embedding providers."""

from unittest.mock import MagicMock, patch

import httpx
import numpy as np
import pytest

from figplag.models.embedding import DocEmbedding, EmbeddingProviderConfig, EmbeddingProviderKind
from figplag.models.report import ScoreWarning
from figplag.models.text import PipelineOptions
from figplag.services.embedding_service import (
    DimensionMismatchError,
    EmbeddingService,
    EmbedHttpError,
    embed_similarity,
    splitmix64_stream,
    token_vector,
)
from figplag.services.index_service import doc_from_lemmas

HTTP_CONFIG = EmbeddingProviderConfig(
    kind=EmbeddingProviderKind.HTTP, endpoint="https://embed.example/v1", dim=4
)


def _doc(*lemmas, doc_id="q"):
    return doc_from_lemmas(doc_id, list(lemmas), PipelineOptions())


def _mock_client(mock_client_cls, payload=None, error=None):
    client = MagicMock()
    mock_client_cls.return_value.__enter__ = MagicMock(return_value=client)
    mock_client_cls.return_value.__exit__ = MagicMock(return_value=False)
    resp = MagicMock()
    resp.json.return_value = payload
    if error is not None:
        resp.raise_for_status.side_effect = error
    client.post.return_value = resp
    return client


class TestSplitmix:
    def test_known_first_output(self):
        # Reference value of splitmix64 seeded with 0.
        assert int(splitmix64_stream(0, 1)[0]) == 0xE220A8397B1DCDAF

    def test_token_vector_unit_and_deterministic(self):
        v = token_vector("graph", 42, 64)
        assert np.linalg.norm(v) == pytest.approx(1.0)
        np.testing.assert_array_equal(v, token_vector("graph", 42, 64))

    def test_seed_changes_vector(self):
        assert not np.array_equal(token_vector("graph", 1, 64), token_vector("graph", 2, 64))


class TestFallbackEmbedding:
    def test_deterministic_across_instances(self):
        a = EmbeddingService(EmbeddingProviderConfig()).embed(_doc("sales", "graph"))
        b = EmbeddingService(EmbeddingProviderConfig()).embed(_doc("sales", "graph"))
        assert a == b
        assert a.dim == 256
        assert a.source == EmbeddingProviderKind.FALLBACK

    def test_order_independent(self, embedder):
        a = embedder.embed(_doc("sales", "graph", "region"))
        b = embedder.embed(_doc("region", "sales", "graph"))
        np.testing.assert_allclose(a.vector, b.vector, atol=1e-12)

    def test_empty_doc_is_zero(self, embedder):
        assert not np.any(embedder.embed(_doc()).vector)

    def test_self_similarity(self, embedder):
        emb = embedder.embed(_doc("pie", "chart", "energy"))
        assert embed_similarity(emb, emb).value == pytest.approx(1.0)

    def test_disjoint_docs_score_low(self, embedder):
        a = embedder.embed(_doc("flowchart", "login", "password", "user"))
        b = embedder.embed(_doc("pie", "chart", "energy", "coal"))
        assert embed_similarity(a, b).value <= 0.2

    def test_label(self, embedder):
        assert embedder.label == "fallback(dim=256,seed=42)"


class TestEmbedSimilarity:
    def test_zero_vector_warns(self):
        zero = DocEmbedding(np.zeros(3), EmbeddingProviderKind.FALLBACK)
        other = DocEmbedding(np.ones(3), EmbeddingProviderKind.FALLBACK)
        score = embed_similarity(zero, other)
        assert score.value == 0.0
        assert score.warning == ScoreWarning.EMPTY_COMPARISON

    def test_negative_cosine_clamped(self):
        a = DocEmbedding(np.array([1.0, 0.0]), EmbeddingProviderKind.HTTP)
        b = DocEmbedding(np.array([-1.0, 0.0]), EmbeddingProviderKind.HTTP)
        assert embed_similarity(a, b).value == 0.0

    def test_dimension_mismatch(self):
        a = DocEmbedding(np.ones(2), EmbeddingProviderKind.HTTP)
        b = DocEmbedding(np.ones(3), EmbeddingProviderKind.HTTP)
        with pytest.raises(DimensionMismatchError):
            embed_similarity(a, b)


class TestHttpEmbedding:
    def test_missing_credential(self):
        with pytest.raises(EmbedHttpError, match="EMBED_API_KEY"):
            EmbeddingService(HTTP_CONFIG)

    @patch("figplag.services.embedding_service.httpx.Client")
    def test_posts_text_with_bearer_key(self, mock_client_cls, monkeypatch):
        monkeypatch.setenv("EMBED_API_KEY", "secret")
        client = _mock_client(mock_client_cls, {"vector": [1.0, 0.0, 0.0, 0.0]})
        emb = EmbeddingService(HTTP_CONFIG).embed(_doc("sales", "graph"))

        assert emb.source == EmbeddingProviderKind.HTTP
        np.testing.assert_array_equal(emb.vector, [1.0, 0.0, 0.0, 0.0])
        _, kwargs = client.post.call_args
        assert kwargs["json"] == {"text": "sales graph"}
        assert kwargs["headers"]["Authorization"] == "Bearer secret"

    @patch("figplag.services.embedding_service.httpx.Client")
    def test_identical_text_cached(self, mock_client_cls, monkeypatch):
        monkeypatch.setenv("EMBED_API_KEY", "secret")
        client = _mock_client(mock_client_cls, {"vector": [0.5, 0.5, 0.5, 0.5]})
        service = EmbeddingService(HTTP_CONFIG)
        service.embed(_doc("a", doc_id="one"))
        service.embed(_doc("a", doc_id="two"))
        assert client.post.call_count == 1

    @patch("figplag.services.embedding_service.httpx.Client")
    def test_wrong_dimension(self, mock_client_cls, monkeypatch):
        monkeypatch.setenv("EMBED_API_KEY", "secret")
        _mock_client(mock_client_cls, {"vector": [1.0, 2.0]})
        with pytest.raises(DimensionMismatchError):
            EmbeddingService(HTTP_CONFIG).embed(_doc("a"))

    @patch("figplag.services.embedding_service.httpx.Client")
    def test_http_status_error(self, mock_client_cls, monkeypatch):
        monkeypatch.setenv("EMBED_API_KEY", "secret")
        error = httpx.HTTPStatusError("boom", request=MagicMock(), response=MagicMock())
        _mock_client(mock_client_cls, error=error)
        with pytest.raises(EmbedHttpError, match="failed"):
            EmbeddingService(HTTP_CONFIG).embed(_doc("a"))

    @patch("figplag.services.embedding_service.httpx.Client")
    def test_malformed_body(self, mock_client_cls, monkeypatch):
        monkeypatch.setenv("EMBED_API_KEY", "secret")
        _mock_client(mock_client_cls, {"embedding": []})
        with pytest.raises(EmbedHttpError, match="'vector'"):
            EmbeddingService(HTTP_CONFIG).embed(_doc("a"))
