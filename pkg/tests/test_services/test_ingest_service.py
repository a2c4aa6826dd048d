"""Tests for corpus discovery and cached extraction."""

import logging
from unittest.mock import patch

import pytest

from figplag.errors import EmptyCorpusError
from figplag.models.document import ImageFormat, OcrBackendConfig, OcrBackendKind
from figplag.services.ingest_service import (
    DuplicateDocumentError,
    UnsupportedImageError,
    discover_images,
    ingest_corpus,
    make_image_doc,
)
from figplag.services.ocr_service import SidecarBackend
from tests.conftest import EXTRACTED_AT, write_image

SIDECAR = OcrBackendConfig()


def _clock():
    return EXTRACTED_AT


class TestDiscoverImages:
    def test_skips_unsupported_files(self, tmp_path, caplog):
        for stem in ("c", "a", "b"):
            write_image(tmp_path, stem, "text")
        (tmp_path / "anim.gif").write_bytes(b"GIF89a")
        (tmp_path / ".hidden.png").write_bytes(b"x")

        with caplog.at_level(logging.WARNING, logger="figplag.services.ingest_service"):
            images = discover_images(tmp_path)

        assert [img.id for img in images] == ["a", "b", "c"]
        assert "anim.gif" in caplog.text

    def test_duplicate_stems(self, tmp_path):
        write_image(tmp_path, "fig1", "x", ext="png")
        write_image(tmp_path, "fig1", None, ext="jpg")
        with pytest.raises(DuplicateDocumentError, match="fig1"):
            discover_images(tmp_path)

    def test_missing_directory(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            discover_images(tmp_path / "nope")

    def test_image_doc_fields(self, tmp_path):
        image = make_image_doc(write_image(tmp_path, "Fig5", None, ext="JPEG"))
        assert image.id == "Fig5"
        assert image.format == ImageFormat.JPEG
        assert len(image.content_hash) == 64

    def test_unsupported_single_image(self, tmp_path):
        path = tmp_path / "x.gif"
        path.write_bytes(b"GIF89a")
        with pytest.raises(UnsupportedImageError, match="gif"):
            make_image_doc(path)


class TestIngestCorpus:
    def test_extracts_every_image(self, corpus_dir, tmp_path):
        result = ingest_corpus(corpus_dir, SIDECAR, tmp_path / "ocr_cache.json", clock=_clock)
        assert result.ok
        assert [t.doc_id for t in result.texts] == ["fig1", "fig2", "fig3", "fig4", "fig5"]
        assert all(t.backend_id == OcrBackendKind.SIDECAR for t in result.texts)
        assert (tmp_path / "ocr_cache.json").exists()

    def test_empty_directory(self, tmp_path):
        (tmp_path / "empty").mkdir()
        with pytest.raises(EmptyCorpusError):
            ingest_corpus(tmp_path / "empty", SIDECAR, tmp_path / "ocr_cache.json")

    def test_second_run_served_from_cache(self, corpus_dir, tmp_path):
        cache = tmp_path / "ocr_cache.json"
        ingest_corpus(corpus_dir, SIDECAR, cache, clock=_clock)

        original = SidecarBackend.extract
        with patch.object(SidecarBackend, "extract", autospec=True, side_effect=original) as spy:
            result = ingest_corpus(corpus_dir, SIDECAR, cache, clock=_clock)

        assert spy.call_count == 0
        assert len(result.texts) == 5

    def test_changed_sidecar_refreshes(self, make_corpus, tmp_path):
        corpus = make_corpus({"fig1": "old text"})
        cache = tmp_path / "ocr_cache.json"
        ingest_corpus(corpus, SIDECAR, cache, clock=_clock)

        (corpus / "fig1.txt").write_text("new text", encoding="utf-8")
        result = ingest_corpus(corpus, SIDECAR, cache, clock=_clock)
        assert result.texts[0].raw_text == "new text"

    def test_missing_sidecar_collected_as_failure(self, make_corpus, tmp_path):
        corpus = make_corpus({"fig1": "text"})
        write_image(corpus, "fig2", None)
        result = ingest_corpus(corpus, SIDECAR, tmp_path / "ocr_cache.json", clock=_clock)
        assert not result.ok
        assert [f.doc_id for f in result.failures] == ["fig2"]
        assert [t.doc_id for t in result.texts] == ["fig1"]

    def test_undecodable_sidecar_collected_as_failure(self, make_corpus, tmp_path):
        corpus = make_corpus({"a": "good text"})
        write_image(corpus, "b", None)
        (corpus / "b.txt").write_bytes(b"\xff\xfe bad")

        result = ingest_corpus(corpus, SIDECAR, tmp_path / "ocr_cache.json", clock=_clock)

        assert [t.doc_id for t in result.texts] == ["a"]
        assert [f.doc_id for f in result.failures] == ["b"]
        assert "UTF-8" in str(result.failures[0].error)

    def test_identical_images_with_different_sidecars_stay_cached(self, make_corpus, tmp_path):
        corpus = make_corpus({"a": "first caption"})
        (corpus / "b.png").write_bytes((corpus / "a.png").read_bytes())
        (corpus / "b.txt").write_text("second caption", encoding="utf-8")
        cache = tmp_path / "ocr_cache.json"
        ingest_corpus(corpus, SIDECAR, cache, clock=_clock)

        original = SidecarBackend.extract
        with patch.object(SidecarBackend, "extract", autospec=True, side_effect=original) as spy:
            result = ingest_corpus(corpus, SIDECAR, cache, clock=_clock)

        assert spy.call_count == 0
        assert [t.raw_text for t in result.texts] == ["first caption", "second caption"]
