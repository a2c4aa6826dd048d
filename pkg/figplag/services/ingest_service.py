"""Corpus discovery and cached, concurrent text extraction."""

import hashlib
import logging
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path

from figplag.errors import EmptyCorpusError, FigplagError
from figplag.models.document import (
    ExtractedText,
    ImageDoc,
    ImageFormat,
    OcrBackendConfig,
    OcrBackendKind,
)
from figplag.services.ocr_cache import QUOTA_FILE, OcrCache, QuotaCounter
from figplag.services.ocr_service import OcrBackend, make_backend, sidecar_digest, utcnow

_log = logging.getLogger(__name__)

SUPPORTED_EXTENSIONS = frozenset(fmt.value for fmt in ImageFormat)
SIDECAR_EXTENSION = "txt"


class DuplicateDocumentError(FigplagError):
    """Raised when two corpus images share a file stem."""


class UnsupportedImageError(FigplagError):
    """Raised when an image has an extension outside jpg, jpeg, png and bmp."""


def content_hash(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def make_image_doc(path: Path) -> ImageDoc:
    path = Path(path)
    ext = path.suffix.lstrip(".").lower()
    if ext not in SUPPORTED_EXTENSIONS:
        raise UnsupportedImageError(
            f"Unsupported image type '.{ext}'. Allowed: {', '.join(sorted(SUPPORTED_EXTENSIONS))}"
        )
    return ImageDoc(
        id=path.stem, path=path, format=ImageFormat(ext), content_hash=content_hash(path)
    )


def discover_images(directory: Path) -> list[ImageDoc]:
    """Supported images directly inside *directory*, sorted by id."""
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"Corpus directory {directory} does not exist")

    found: dict[str, ImageDoc] = {}
    for path in sorted(directory.iterdir()):
        if not path.is_file() or path.name.startswith("."):
            continue
        ext = path.suffix.lstrip(".").lower()
        if ext == SIDECAR_EXTENSION:
            continue
        if ext not in SUPPORTED_EXTENSIONS:
            _log.warning("Skipping unsupported file %s", path.name)
            continue
        image = make_image_doc(path)
        if image.id in found:
            raise DuplicateDocumentError(
                f"Duplicate document id {image.id!r}: {found[image.id].path.name}, {path.name}"
            )
        found[image.id] = image
    return [found[key] for key in sorted(found)]


def extract_cached(
    image: ImageDoc, backend: OcrBackend, cache: OcrCache | None = None
) -> ExtractedText:
    """Extract *image*, serving and refreshing its cache entry (content hash plus sidecar hash)."""
    side_hash = sidecar_digest(image) if backend.kind == OcrBackendKind.SIDECAR else None
    if cache is not None:
        entry = cache.lookup(image.content_hash, backend.kind, side_hash)
        if entry is not None:
            _log.debug("Cache hit for %s", image.id)
            return entry.to_extracted(image.id)
        _log.debug("Cache miss for %s", image.id)

    text = backend.extract(image)
    if cache is not None:
        cache.store(image.content_hash, text, side_hash)
    return text


@dataclass(frozen=True)
class IngestFailure:
    doc_id: str
    error: Exception

    def __str__(self) -> str:
        return f"{self.doc_id}: {self.error}"


@dataclass
class IngestResult:
    texts: list[ExtractedText] = field(default_factory=list)
    failures: list[IngestFailure] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def ingest_corpus(
    directory: Path,
    backend: OcrBackendConfig,
    cache: Path,
    clock: Callable[[], datetime] = utcnow,
) -> IngestResult:
    """Extract every supported image of *directory*; per-file failures are collected.

    *cache* is the path of ``ocr_cache.json``; the quota counter lives beside it.
    """
    images = discover_images(directory)
    if not images:
        raise EmptyCorpusError(f"No supported images found in {directory}")

    cache_path = Path(cache)
    quota = QuotaCounter(cache_path.with_name(QUOTA_FILE), backend.monthly_quota, clock=clock)
    ocr = make_backend(backend, quota=quota, clock=clock)
    store = OcrCache(cache_path)

    def _one(image: ImageDoc) -> ExtractedText | IngestFailure:
        try:
            return extract_cached(image, ocr, store)
        except (FigplagError, OSError) as exc:
            _log.warning("OCR failed for %s: %s", image.path.name, exc)
            return IngestFailure(image.id, exc)

    try:
        with ThreadPoolExecutor(max_workers=backend.max_in_flight) as pool:
            outcomes = list(pool.map(_one, images))
    finally:
        store.save()

    result = IngestResult()
    for outcome in outcomes:
        if isinstance(outcome, IngestFailure):
            result.failures.append(outcome)
        else:
            result.texts.append(outcome)
    _log.info("Ingested %d of %d images from %s", len(result.texts), len(images), directory)
    return result
