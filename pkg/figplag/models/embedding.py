import enum
from dataclasses import dataclass

import numpy as np


class EmbeddingProviderKind(enum.StrEnum):
    HTTP = "http"
    FALLBACK = "fallback"


@dataclass(frozen=True)
class EmbeddingProviderConfig:
    kind: EmbeddingProviderKind = EmbeddingProviderKind.FALLBACK
    endpoint: str | None = None
    credential_env: str = "EMBED_API_KEY"
    dim: int = 256
    seed: int = 42
    max_in_flight: int = 4

    def __post_init__(self) -> None:
        if self.kind == EmbeddingProviderKind.HTTP and not self.endpoint:
            raise ValueError("http embedding provider requires an endpoint")
        if self.kind == EmbeddingProviderKind.FALLBACK and self.dim < 8:
            raise ValueError("fallback embedding provider requires dim >= 8")

    @property
    def label(self) -> str:
        if self.kind == EmbeddingProviderKind.HTTP:
            return f"http:{self.endpoint}"
        return f"fallback(dim={self.dim},seed={self.seed})"


@dataclass(frozen=True, eq=False)
class DocEmbedding:
    vector: np.ndarray
    source: EmbeddingProviderKind

    @property
    def dim(self) -> int:
        return int(self.vector.shape[0])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DocEmbedding):
            return NotImplemented
        return self.source == other.source and np.array_equal(self.vector, other.vector)

    __hash__ = None  # type: ignore[assignment]
