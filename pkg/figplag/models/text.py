import enum
import hashlib
import json
from dataclasses import asdict, dataclass, field, replace


class EntityLabel(enum.StrEnum):
    PERSON = "PERSON"
    ORG = "ORG"
    LOC = "LOC"
    DATE = "DATE"
    MISC = "MISC"


class EntitySource(enum.StrEnum):
    GAZETTEER = "gazetteer"
    YEAR_PATTERN = "year_pattern"
    CAPITAL_RUN = "capital_run"


class NerMode(enum.StrEnum):
    INCLUDE = "include"
    EXCLUDE = "exclude"


@dataclass(frozen=True)
class Token:
    surface: str
    lower: str
    lemma: str
    position: int
    is_stopword: bool = False
    entity_label: EntityLabel | None = None


@dataclass(frozen=True)
class EntitySpan:
    """Inclusive token-position range tagged as a named entity."""

    start: int
    end: int
    label: EntityLabel
    source: EntitySource

    def __post_init__(self) -> None:
        if self.start > self.end:
            raise ValueError(f"EntitySpan start {self.start} > end {self.end}")

    def covers(self, position: int) -> bool:
        return self.start <= position <= self.end

    @property
    def length(self) -> int:
        return self.end - self.start + 1


@dataclass(frozen=True)
class PipelineOptions:
    strip_refs: bool = True
    stopwords: bool = True
    lemmatize: bool = True
    keep_numbers: bool = True
    ner_mode: NerMode = NerMode.INCLUDE
    gazetteer_digest: str = ""

    def to_dict(self) -> dict:
        data = asdict(self)
        data["ner_mode"] = self.ner_mode.value
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineOptions":
        return cls(**{**data, "ner_mode": NerMode(data["ner_mode"])})

    def fingerprint(self) -> str:
        """Stable digest of the applied pipeline; equal fingerprints mean comparable docs."""
        raw = json.dumps(self.to_dict(), sort_keys=True).encode("utf-8")
        return hashlib.sha256(raw).hexdigest()[:16]

    def with_ner_mode(self, ner_mode: NerMode) -> "PipelineOptions":
        return replace(self, ner_mode=ner_mode)


@dataclass(frozen=True)
class PreprocessedDoc:
    doc_id: str
    tokens: tuple[Token, ...]
    options: PipelineOptions
    entities: tuple[EntitySpan, ...] = field(default=())

    @property
    def lemmas(self) -> list[str]:
        return [t.lemma for t in self.tokens]

    @property
    def lemma_set(self) -> frozenset[str]:
        return frozenset(t.lemma for t in self.tokens)

    @property
    def is_empty(self) -> bool:
        return not self.tokens
