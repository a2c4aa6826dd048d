import enum
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path


class ImageFormat(enum.StrEnum):
    JPG = "jpg"
    JPEG = "jpeg"
    PNG = "png"
    BMP = "bmp"


class OcrBackendKind(enum.StrEnum):
    HTTP_VISION = "http_vision"
    SIDECAR = "sidecar"


@dataclass(frozen=True)
class ImageDoc:
    id: str
    path: Path
    format: ImageFormat
    content_hash: str


@dataclass(frozen=True)
class ExtractedText:
    doc_id: str
    raw_text: str
    backend_id: OcrBackendKind
    extracted_at: datetime


@dataclass(frozen=True)
class OcrBackendConfig:
    """How to reach the OCR backend. ``credential_env`` names the env var, never the key."""

    kind: OcrBackendKind = OcrBackendKind.SIDECAR
    endpoint: str | None = None
    credential_env: str = "VISION_API_KEY"
    max_in_flight: int = 4
    monthly_quota: int | None = None
    timeout: float = 30.0

    def __post_init__(self) -> None:
        if self.max_in_flight < 1:
            raise ValueError("max_in_flight must be a positive integer")
        if self.monthly_quota is not None and self.monthly_quota < 1:
            raise ValueError("monthly_quota must be a positive integer")
        if self.kind == OcrBackendKind.HTTP_VISION and not (self.endpoint and self.credential_env):
            raise ValueError("http_vision backend requires endpoint and credential_env")
