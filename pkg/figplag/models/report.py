import enum
import math
from dataclasses import dataclass, field

from figplag.models.text import NerMode


class AlgorithmId(enum.StrEnum):
    JACCARD = "jaccard"
    COSINE = "cosine"
    TFIDF = "tfidf"
    LSA = "lsa"
    EMBED = "embed"
    WORDNET = "wordnet"


# Column headers mirror the published comparison tables ("BERT" is the embedding slot).
ALGORITHM_HEADERS: dict[AlgorithmId, str] = {
    AlgorithmId.JACCARD: "Jaccard",
    AlgorithmId.COSINE: "Cosine",
    AlgorithmId.TFIDF: "TF-IDF",
    AlgorithmId.LSA: "LSA",
    AlgorithmId.EMBED: "BERT",
    AlgorithmId.WORDNET: "WordNet",
}


class ScoreMode(enum.StrEnum):
    PAIRWISE = "pairwise"
    POOLED = "pooled"


class OutputFormat(enum.StrEnum):
    TABLE = "table"
    CSV = "csv"
    JSON = "json"


class ScoreWarning(enum.StrEnum):
    EMPTY_COMPARISON = "EmptyComparison"


@dataclass(frozen=True)
class SimilarityScore:
    value: float
    algorithm: AlgorithmId
    warning: ScoreWarning | None = None

    def __post_init__(self) -> None:
        if not math.isfinite(self.value) or not 0.0 <= self.value <= 1.0:
            raise ValueError(f"similarity must be a finite value in [0, 1], got {self.value}")

    @classmethod
    def empty(cls, algorithm: AlgorithmId) -> "SimilarityScore":
        return cls(0.0, algorithm, ScoreWarning.EMPTY_COMPARISON)

    @classmethod
    def clamped(cls, value: float, algorithm: AlgorithmId) -> "SimilarityScore":
        return cls(min(1.0, max(0.0, value)), algorithm)


@dataclass(frozen=True)
class MatchResult:
    algorithm: AlgorithmId
    mode: ScoreMode
    ner_mode: NerMode
    best_doc: str | None
    percent: float
    warning: ScoreWarning | None = None

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm.value,
            "mode": self.mode.value,
            "ner_mode": self.ner_mode.value,
            "best_doc": self.best_doc,
            "percent": self.percent,
            "warning": self.warning.value if self.warning else None,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MatchResult":
        return cls(
            algorithm=AlgorithmId(data["algorithm"]),
            mode=ScoreMode(data["mode"]),
            ner_mode=NerMode(data["ner_mode"]),
            best_doc=data.get("best_doc"),
            percent=float(data["percent"]),
            warning=ScoreWarning(data["warning"]) if data.get("warning") else None,
        )


@dataclass(frozen=True)
class PlagiarismReport:
    query_id: str
    corpus_size: int
    results: tuple[MatchResult, ...]
    labels: dict[str, str] = field(default_factory=dict)
    options_fingerprint: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        keys = [(r.algorithm, r.ner_mode) for r in self.results]
        if len(keys) != len(set(keys)):
            raise ValueError("PlagiarismReport holds duplicate (algorithm, ner_mode) results")

    def result_for(self, algorithm: AlgorithmId, ner_mode: NerMode) -> MatchResult | None:
        for result in self.results:
            if result.algorithm == algorithm and result.ner_mode == ner_mode:
                return result
        return None

    def to_dict(self) -> dict:
        return {
            "query_id": self.query_id,
            "corpus_size": self.corpus_size,
            "results": [r.to_dict() for r in self.results],
            "labels": dict(sorted(self.labels.items())),
            "options_fingerprint": dict(sorted(self.options_fingerprint.items())),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PlagiarismReport":
        return cls(
            query_id=data["query_id"],
            corpus_size=int(data["corpus_size"]),
            results=tuple(MatchResult.from_dict(r) for r in data["results"]),
            labels=dict(data.get("labels", {})),
            options_fingerprint=dict(data.get("options_fingerprint", {})),
        )
