"""OCR backends: a vision HTTP service and the offline sidecar reader."""

import hashlib
import logging
import os
from collections.abc import Callable
from datetime import UTC, datetime
from pathlib import Path
from typing import Any

import httpx

from figplag.errors import FigplagError
from figplag.models.document import ExtractedText, ImageDoc, OcrBackendConfig, OcrBackendKind
from figplag.services.ocr_cache import QuotaCounter, QuotaExceededError

__all__ = [
    "HttpVisionBackend",
    "MissingSidecarError",
    "OcrBackend",
    "OcrHttpError",
    "QuotaExceededError",
    "SidecarBackend",
    "SidecarDecodeError",
    "extract_text",
    "make_backend",
    "parse_ocr_response",
    "sidecar_digest",
    "sidecar_path",
    "utcnow",
]

_log = logging.getLogger(__name__)

SUBSCRIPTION_HEADER = "Ocp-Apim-Subscription-Key"

Clock = Callable[[], datetime]


def utcnow() -> datetime:
    return datetime.now(UTC)


class MissingSidecarError(FigplagError):
    """Raised when the sidecar backend finds no ``<stem>.txt`` next to an image."""


class OcrHttpError(FigplagError):
    """Raised on a missing credential, a non-2xx answer or an unreadable OCR response."""


class SidecarDecodeError(FigplagError):
    """Raised when a sidecar text file is not valid UTF-8."""


def sidecar_path(image: ImageDoc) -> Path:
    return image.path.with_suffix(".txt")


def sidecar_digest(image: ImageDoc) -> str | None:
    path = sidecar_path(image)
    if not path.is_file():
        return None
    return hashlib.sha256(path.read_bytes()).hexdigest()


def parse_ocr_response(data: Any) -> list[str]:
    """Recognized lines in reading order.

    Accepted documents:
      {"lines": ["..", ..]}
      {"regions": [{"lines": [{"words": [{"text": ".."}]}]}]}
      {"analyzeResult": {"readResults": [{"lines": [{"text": ".."}]}]}}
    """
    if not isinstance(data, dict):
        raise OcrHttpError("OCR response is not a JSON object")

    try:
        if "lines" in data:
            lines = data["lines"]
            if not all(isinstance(line, str) for line in lines):
                raise OcrHttpError("OCR 'lines' must be a list of strings")
            return list(lines)

        if "regions" in data:
            return [
                " ".join(word["text"] for word in line.get("words", []))
                for region in data["regions"]
                for line in region.get("lines", [])
            ]

        if "analyzeResult" in data:
            pages = data["analyzeResult"].get("readResults", [])
            return [line["text"] for page in pages for line in page.get("lines", [])]
    except (AttributeError, KeyError, TypeError) as exc:
        raise OcrHttpError(f"Malformed OCR response: {exc}") from exc

    raise OcrHttpError(f"Unrecognized OCR response keys: {sorted(data)}")


class OcrBackend:
    kind: OcrBackendKind

    def extract(self, image: ImageDoc) -> ExtractedText:
        raise NotImplementedError


class SidecarBackend(OcrBackend):
    kind = OcrBackendKind.SIDECAR

    def __init__(self, clock: Clock = utcnow):
        self._clock = clock

    def extract(self, image: ImageDoc) -> ExtractedText:
        path = sidecar_path(image)
        try:
            raw = path.read_bytes()
        except FileNotFoundError as exc:
            raise MissingSidecarError(f"No sidecar text {path.name} for {image.path}") from exc
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SidecarDecodeError(f"Sidecar {path.name} is not valid UTF-8: {exc}") from exc
        return ExtractedText(
            doc_id=image.id,
            raw_text=text,
            backend_id=self.kind,
            extracted_at=self._clock(),
        )


class HttpVisionBackend(OcrBackend):
    kind = OcrBackendKind.HTTP_VISION

    def __init__(
        self,
        config: OcrBackendConfig,
        quota: QuotaCounter | None = None,
        clock: Clock = utcnow,
    ):
        self.config = config
        self._quota = quota
        self._clock = clock
        self._api_key = os.environ.get(config.credential_env, "")
        if not self._api_key:
            raise OcrHttpError(f"OCR credential env var {config.credential_env} is not set")

    def extract(self, image: ImageDoc) -> ExtractedText:
        content = image.path.read_bytes()
        if self._quota is not None:
            self._quota.reserve()

        try:
            with httpx.Client(timeout=self.config.timeout) as client:
                resp = client.post(
                    self.config.endpoint,
                    content=content,
                    headers={
                        "Content-Type": "application/octet-stream",
                        SUBSCRIPTION_HEADER: self._api_key,
                    },
                )
                resp.raise_for_status()
                data = resp.json()
        except httpx.HTTPStatusError as exc:
            raise OcrHttpError(
                f"OCR service answered {exc.response.status_code} for {image.path.name}"
            ) from exc
        except (httpx.HTTPError, ValueError) as exc:
            raise OcrHttpError(f"OCR request failed for {image.path.name}: {exc}") from exc

        lines = parse_ocr_response(data)
        _log.debug("OCR %s: %d lines", image.id, len(lines))
        return ExtractedText(
            doc_id=image.id,
            raw_text="\n".join(lines),
            backend_id=self.kind,
            extracted_at=self._clock(),
        )


def make_backend(
    config: OcrBackendConfig, quota: QuotaCounter | None = None, clock: Clock = utcnow
) -> OcrBackend:
    if config.kind == OcrBackendKind.HTTP_VISION:
        return HttpVisionBackend(config, quota=quota, clock=clock)
    return SidecarBackend(clock=clock)


def extract_text(
    image: ImageDoc, backend: OcrBackendConfig, quota: QuotaCounter | None = None
) -> ExtractedText:
    return make_backend(backend, quota).extract(image)
