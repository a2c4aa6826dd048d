import enum
from dataclasses import dataclass, field


class PartOfSpeech(enum.StrEnum):
    NOUN = "n"
    VERB = "v"
    ADJECTIVE = "a"
    ADVERB = "r"


class WordNetMeasure(enum.StrEnum):
    WU_PALMER = "wu_palmer"
    PATH = "path"


@dataclass(frozen=True)
class Synset:
    id: str
    pos: PartOfSpeech
    lemmas: frozenset[str]


@dataclass(frozen=True)
class SynsetRef:
    id: str


@dataclass(frozen=True, eq=False)
class Lexicon:
    """Hypernym taxonomy. Validated as a DAG with no dangling parents at load time."""

    synsets: dict[str, Synset]
    hypernyms: dict[str, frozenset[str]]
    lemma_index: dict[str, frozenset[str]]
    roots: tuple[str, ...] = field(default=())

    def __contains__(self, synset_id: str) -> bool:
        return synset_id in self.synsets

    def noun_synsets(self, lemma: str) -> list[str]:
        """Noun synset ids holding *lemma*, sorted by id."""
        return sorted(
            sid
            for sid in self.lemma_index.get(lemma, ())
            if self.synsets[sid].pos == PartOfSpeech.NOUN
        )
