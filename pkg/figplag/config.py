import logging
from pathlib import Path
from typing import Annotated, Any

from pydantic import Field, PositiveFloat, PositiveInt, ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from figplag.errors import ConfigError
from figplag.models.document import OcrBackendConfig, OcrBackendKind
from figplag.models.embedding import EmbeddingProviderConfig, EmbeddingProviderKind
from figplag.models.lexicon import WordNetMeasure
from figplag.models.report import OutputFormat, ScoreMode
from figplag.models.text import NerMode, PipelineOptions

_log = logging.getLogger(__name__)


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix="FIGPLAG_", env_file=".env", env_file_encoding="utf-8", extra="ignore"
    )

    # OCR
    ocr_backend: OcrBackendKind = OcrBackendKind.SIDECAR
    ocr_endpoint: str = ""
    ocr_credential_env: str = "VISION_API_KEY"
    ocr_max_in_flight: PositiveInt = 4
    ocr_monthly_quota: PositiveInt | None = None
    ocr_timeout: PositiveFloat = 30.0

    # Embedding provider ("BERT" column)
    embed_provider: EmbeddingProviderKind = EmbeddingProviderKind.FALLBACK
    embed_endpoint: str = ""
    embed_credential_env: str = "EMBED_API_KEY"
    embed_dim: Annotated[int, Field(ge=8)] = 256
    embed_seed: int = 42
    embed_max_in_flight: PositiveInt = 4

    # Linguistic resources (empty = packaged resource)
    lexicon_path: str = ""
    gazetteer_path: str = ""

    # Preprocessing
    strip_refs: bool = True
    stopwords: bool = True
    lemmatize: bool = True
    keep_numbers: bool = True

    # Scoring & output
    lsa_rank: PositiveInt | None = None
    wordnet_measure: WordNetMeasure = WordNetMeasure.WU_PALMER
    default_mode: ScoreMode = ScoreMode.PAIRWISE
    output_format: OutputFormat = OutputFormat.TABLE

    log_level: str = "INFO"

    def ocr_backend_config(self) -> OcrBackendConfig:
        return OcrBackendConfig(
            kind=self.ocr_backend,
            endpoint=self.ocr_endpoint or None,
            credential_env=self.ocr_credential_env,
            max_in_flight=self.ocr_max_in_flight,
            monthly_quota=self.ocr_monthly_quota,
            timeout=self.ocr_timeout,
        )

    def embedding_config(self) -> EmbeddingProviderConfig:
        return EmbeddingProviderConfig(
            kind=self.embed_provider,
            endpoint=self.embed_endpoint or None,
            credential_env=self.embed_credential_env,
            dim=self.embed_dim,
            seed=self.embed_seed,
            max_in_flight=self.embed_max_in_flight,
        )

    def pipeline_options(self, ner_mode: NerMode, gazetteer_digest: str = "") -> PipelineOptions:
        return PipelineOptions(
            strip_refs=self.strip_refs,
            stopwords=self.stopwords,
            lemmatize=self.lemmatize,
            keep_numbers=self.keep_numbers,
            ner_mode=ner_mode,
            gazetteer_digest=gazetteer_digest,
        )


def read_config_file(path: Path) -> dict[str, str]:
    """Parse a flat ``key=value`` file. Blank lines and ``#`` comments are ignored."""
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"Cannot read config file {path}: {exc}") from exc

    known = set(Settings.model_fields)
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in known:
            raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
        values[key] = value
    return values


def load_settings(
    config_file: Path | None = None, overrides: dict[str, Any] | None = None
) -> Settings:
    """Resolve settings with precedence flags > config file > environment > defaults.

    Init values outrank environment variables in pydantic-settings, so the config file
    values are merged under the flag overrides and passed as init values.
    """
    values: dict[str, Any] = {}
    if config_file is not None:
        values.update(read_config_file(config_file))
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        settings = Settings(**values)
    except ValidationError as exc:
        raise ConfigError(f"Invalid settings: {exc}") from exc
    _log.debug("Resolved settings: %s", settings.model_dump())
    return settings
