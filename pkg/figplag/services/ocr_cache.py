"""Content-hash keyed OCR cache and the monthly quota counter, both JSON files on disk."""

import json
import logging
import os
import tempfile
import threading
from collections.abc import Callable
from dataclasses import dataclass
from datetime import UTC, datetime
from pathlib import Path

from figplag.errors import FigplagError
from figplag.models.document import ExtractedText, OcrBackendKind

_log = logging.getLogger(__name__)

CACHE_FILE = "ocr_cache.json"
QUOTA_FILE = "ocr_quota.json"


class QuotaExceededError(FigplagError):
    """Raised when the monthly OCR quota is used up."""


def _write_json_atomic(path: Path, data: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(data, fh, indent=2, sort_keys=True, ensure_ascii=False)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _read_json(path: Path) -> dict:
    if not path.exists():
        return {}
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        _log.warning("Ignoring unreadable %s: %s", path, exc)
        return {}
    return data if isinstance(data, dict) else {}


def cache_key(content_hash: str, sidecar_hash: str | None = None) -> str:
    """Sidecar extractions are keyed by image and sidecar content together."""
    return content_hash if sidecar_hash is None else f"{content_hash}:{sidecar_hash}"


@dataclass(frozen=True)
class CacheEntry:
    doc_id: str
    raw_text: str
    backend_id: OcrBackendKind
    extracted_at: datetime
    sidecar_hash: str | None = None

    def to_dict(self) -> dict:
        data = {
            "doc_id": self.doc_id,
            "raw_text": self.raw_text,
            "backend_id": self.backend_id.value,
            "extracted_at": self.extracted_at.isoformat(),
        }
        if self.sidecar_hash is not None:
            data["sidecar_hash"] = self.sidecar_hash
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "CacheEntry":
        return cls(
            doc_id=data["doc_id"],
            raw_text=data["raw_text"],
            backend_id=OcrBackendKind(data["backend_id"]),
            extracted_at=datetime.fromisoformat(data["extracted_at"]),
            sidecar_hash=data.get("sidecar_hash"),
        )

    def to_extracted(self, doc_id: str) -> ExtractedText:
        return ExtractedText(
            doc_id=doc_id,
            raw_text=self.raw_text,
            backend_id=self.backend_id,
            extracted_at=self.extracted_at,
        )


class OcrCache:
    """``ocr_cache.json``: cache_key -> extraction. Mutations are serialized by a lock."""

    def __init__(self, path: Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._entries: dict[str, CacheEntry] = {}
        self._dirty = False
        for key, raw in _read_json(self.path).items():
            try:
                self._entries[key] = CacheEntry.from_dict(raw)
            except (KeyError, TypeError, ValueError):
                _log.warning("Dropping malformed cache entry %s", key)

    def __len__(self) -> int:
        return len(self._entries)

    def lookup(
        self,
        content_hash: str,
        backend_id: OcrBackendKind,
        sidecar_hash: str | None = None,
    ) -> CacheEntry | None:
        with self._lock:
            entry = self._entries.get(cache_key(content_hash, sidecar_hash))
        if entry is None:
            return None
        if entry.backend_id != backend_id or entry.sidecar_hash != sidecar_hash:
            _log.debug("Stale cache entry for %s", entry.doc_id)
            return None
        return entry

    def store(
        self, content_hash: str, text: ExtractedText, sidecar_hash: str | None = None
    ) -> None:
        entry = CacheEntry(
            doc_id=text.doc_id,
            raw_text=text.raw_text,
            backend_id=text.backend_id,
            extracted_at=text.extracted_at,
            sidecar_hash=sidecar_hash,
        )
        key = cache_key(content_hash, sidecar_hash)
        with self._lock:
            # Drop this document's extractions from earlier sidecar versions.
            for old in [k for k, e in self._entries.items() if e.doc_id == text.doc_id]:
                if old.split(":", 1)[0] == content_hash and old != key:
                    del self._entries[old]
            self._entries[key] = entry
            self._dirty = True

    def save(self) -> None:
        with self._lock:
            if not self._dirty and self.path.exists():
                return
            data = {key: entry.to_dict() for key, entry in self._entries.items()}
            _write_json_atomic(self.path, data)
            self._dirty = False
        _log.debug("Wrote %d cache entries to %s", len(data), self.path)


def _current_month(now: datetime) -> str:
    return now.astimezone(UTC).strftime("%Y-%m")


class QuotaCounter:
    """Calendar-month call counter persisted as ``ocr_quota.json``; monotonic within a month."""

    def __init__(
        self,
        path: Path,
        limit: int | None,
        clock: Callable[[], datetime] = lambda: datetime.now(UTC),
    ):
        self.path = Path(path)
        self.limit = limit
        self._clock = clock
        self._lock = threading.Lock()

    def _load(self, month: str) -> int:
        data = _read_json(self.path)
        if data.get("month") != month:
            return 0
        return int(data.get("calls", 0))

    @property
    def used(self) -> int:
        return self._load(_current_month(self._clock()))

    def reserve(self) -> int:
        """Count one backend call, or raise when the month's quota is spent."""
        with self._lock:
            month = _current_month(self._clock())
            calls = self._load(month)
            if self.limit is not None and calls >= self.limit:
                raise QuotaExceededError(
                    f"Monthly OCR quota of {self.limit} calls reached for {month}"
                )
            calls += 1
            _write_json_atomic(self.path, {"month": month, "calls": calls})
        _log.info("OCR quota usage %s: %d/%s", month, calls, self.limit or "unlimited")
        return calls
