"""Rule- and gazetteer-based named-entity tagging plus the entity exclusion transform."""

import hashlib
import logging
from collections.abc import Sequence
from dataclasses import dataclass, field, replace
from pathlib import Path

from figplag.errors import FigplagError
from figplag.models.text import (
    EntityLabel,
    EntitySource,
    EntitySpan,
    NerMode,
    PreprocessedDoc,
    Token,
)
from figplag.resources import GAZETTEER_FILE, load_stopwords
from figplag.services.tokenizer import split_words

_log = logging.getLogger(__name__)

GAZETTEER_LABELS = (EntityLabel.PERSON, EntityLabel.ORG, EntityLabel.LOC)
YEAR_RANGE = (1500, 2099)


class GazetteerError(FigplagError):
    """Raised when a gazetteer file is malformed."""


@dataclass(frozen=True)
class Gazetteer:
    """Case-sensitive multi-word surface forms per label, stored as word sequences."""

    entries: dict[EntityLabel, frozenset[tuple[str, ...]]]
    _lookup: dict[tuple[str, ...], EntityLabel] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        lookup: dict[tuple[str, ...], EntityLabel] = {}
        for label in GAZETTEER_LABELS:
            for form in sorted(self.entries.get(label, ())):
                if not form or not all(form):
                    raise GazetteerError(f"Empty gazetteer form under {label}")
                lookup.setdefault(form, label)
        object.__setattr__(self, "_lookup", lookup)

    @property
    def max_length(self) -> int:
        return max((len(form) for form in self._lookup), default=0)

    def label_for(self, words: tuple[str, ...]) -> EntityLabel | None:
        return self._lookup.get(words)

    def digest(self) -> str:
        """Content digest recorded in the options fingerprint."""
        lines = sorted(f"{label}\t{' '.join(form)}" for form, label in self._lookup.items())
        return hashlib.sha256("\n".join(lines).encode("utf-8")).hexdigest()[:16]

    @classmethod
    def empty(cls) -> "Gazetteer":
        return cls(entries={})


def load_gazetteer(path: Path | str | None = None) -> Gazetteer:
    """Parse ``LABEL<TAB>surface form`` lines; ``#`` lines are comments."""
    path = Path(path) if path else GAZETTEER_FILE
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise GazetteerError(f"Cannot read gazetteer {path}: {exc}") from exc

    entries: dict[EntityLabel, set[tuple[str, ...]]] = {label: set() for label in GAZETTEER_LABELS}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip() or raw.startswith("#"):
            continue
        label_raw, sep, surface = raw.partition("\t")
        if not sep:
            raise GazetteerError(f"{path}:{lineno}: expected LABEL<TAB>surface form")
        try:
            label = EntityLabel(label_raw.strip())
        except ValueError as exc:
            raise GazetteerError(f"{path}:{lineno}: unknown label {label_raw!r}") from exc
        if label not in GAZETTEER_LABELS:
            raise GazetteerError(f"{path}:{lineno}: label must be PERSON, ORG or LOC")
        words = split_words(surface)
        if not words:
            raise GazetteerError(f"{path}:{lineno}: empty surface form")
        entries[label].add(words)

    _log.debug("Loaded gazetteer %s with %d forms", path, sum(len(v) for v in entries.values()))
    return Gazetteer(entries={label: frozenset(forms) for label, forms in entries.items()})


def _resolve(
    candidates: list[tuple[int, int, EntityLabel, EntitySource]], covered: list[bool]
) -> list[tuple[int, int, EntityLabel, EntitySource]]:
    """Accept non-overlapping candidates longest-first, then leftmost."""
    accepted = []
    for start, end, label, source in sorted(candidates, key=lambda c: (c[0] - c[1], c[0])):
        if any(covered[start : end + 1]):
            continue
        for i in range(start, end + 1):
            covered[i] = True
        accepted.append((start, end, label, source))
    return accepted


def _is_year(surface: str) -> bool:
    if len(surface) != 4 or not surface.isdigit():
        return False
    return YEAR_RANGE[0] <= int(surface) <= YEAR_RANGE[1]


def tag_entities(
    tokens: Sequence[Token], gaz: Gazetteer, stopwords: frozenset[str] | None = None
) -> list[EntitySpan]:
    """Tag entity spans in priority order: gazetteer, year pattern, capitalized runs.

    Spans are pairwise disjoint and returned in token order. Sentence-initial
    capitalization is not special-cased.
    """
    stopwords = load_stopwords() if stopwords is None else stopwords
    surfaces = [t.surface for t in tokens]
    n = len(surfaces)
    covered = [False] * n
    found: list[tuple[int, int, EntityLabel, EntitySource]] = []

    gaz_candidates = []
    for i in range(n):
        for length in range(1, min(gaz.max_length, n - i) + 1):
            label = gaz.label_for(tuple(surfaces[i : i + length]))
            if label is not None:
                gaz_candidates.append((i, i + length - 1, label, EntitySource.GAZETTEER))
    found.extend(_resolve(gaz_candidates, covered))

    year_candidates = [
        (i, i, EntityLabel.DATE, EntitySource.YEAR_PATTERN)
        for i, surface in enumerate(surfaces)
        if _is_year(surface)
    ]
    found.extend(_resolve(year_candidates, covered))

    def capitalized(i: int) -> bool:
        token = tokens[i]
        return not covered[i] and token.surface[:1].isupper() and token.lower not in stopwords

    i = 0
    while i < n:
        if not capitalized(i):
            i += 1
            continue
        j = i
        while j + 1 < n and capitalized(j + 1):
            j += 1
        if j > i:
            found.append((i, j, EntityLabel.MISC, EntitySource.CAPITAL_RUN))
        i = j + 1

    return [
        EntitySpan(tokens[start].position, tokens[end].position, label, source)
        for start, end, label, source in sorted(found)
    ]


def exclude_entities(doc: PreprocessedDoc, spans: Sequence[EntitySpan]) -> PreprocessedDoc:
    """Drop every token inside a span; token order is preserved."""
    kept = tuple(t for t in doc.tokens if not any(s.covers(t.position) for s in spans))
    return replace(doc, tokens=kept, options=doc.options.with_ner_mode(NerMode.EXCLUDE))
