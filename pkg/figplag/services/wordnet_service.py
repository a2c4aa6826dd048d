"""Hypernym-taxonomy lexicon loading and path / Wu-Palmer similarity."""

import logging
import math
from collections import deque
from collections.abc import Collection
from functools import lru_cache
from pathlib import Path

from figplag.errors import FigplagError
from figplag.models.lexicon import Lexicon, PartOfSpeech, Synset, SynsetRef, WordNetMeasure
from figplag.models.report import AlgorithmId, SimilarityScore
from figplag.models.text import PreprocessedDoc
from figplag.resources import LEXICON_FILE

_log = logging.getLogger(__name__)

VIRTUAL_ROOT = "<root>"
WORD_CACHE_SIZE = 65_536


class LexiconParseError(FigplagError):
    """Raised for a malformed lexicon line."""

    def __init__(self, message: str, lineno: int):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class CyclicTaxonomyError(FigplagError):
    """Raised when the hypernym graph contains a cycle."""


class DanglingParentError(FigplagError):
    """Raised when a synset names a parent that is never defined."""


def load_lexicon(path: Path | str | None = None) -> Lexicon:
    """Parse ``synset_id|pos|lemma1,lemma2|parent1,parent2`` lines into a validated Lexicon."""
    path = Path(path) if path else LEXICON_FILE
    synsets: dict[str, Synset] = {}
    hypernyms: dict[str, frozenset[str]] = {}

    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split("|")
            if len(fields) != 4:
                raise LexiconParseError(
                    f"expected 4 '|'-separated fields, got {len(fields)}", lineno
                )
            synset_id, pos_raw, lemmas_raw, parents_raw = (part.strip() for part in fields)
            if not synset_id:
                raise LexiconParseError("empty synset id", lineno)
            if synset_id in synsets:
                raise LexiconParseError(f"duplicate synset id {synset_id!r}", lineno)
            try:
                pos = PartOfSpeech(pos_raw)
            except ValueError as exc:
                raise LexiconParseError(f"unknown part of speech {pos_raw!r}", lineno) from exc
            lemmas = [lemma.strip().lower() for lemma in lemmas_raw.split(",")]
            if not lemmas_raw or not all(lemmas):
                raise LexiconParseError(f"synset {synset_id!r} has an empty lemma", lineno)
            parents = [p.strip() for p in parents_raw.split(",")] if parents_raw else []
            if not all(parents):
                raise LexiconParseError(f"synset {synset_id!r} has an empty parent id", lineno)
            synsets[synset_id] = Synset(id=synset_id, pos=pos, lemmas=frozenset(lemmas))
            hypernyms[synset_id] = frozenset(parents)

    for synset_id in sorted(hypernyms):
        missing = sorted(hypernyms[synset_id] - synsets.keys())
        if missing:
            raise DanglingParentError(f"synset {synset_id!r} names undefined parent(s) {missing}")

    _topological_order(hypernyms)

    lemma_index: dict[str, set[str]] = {}
    for synset in synsets.values():
        for lemma in synset.lemmas:
            lemma_index.setdefault(lemma, set()).add(synset.id)

    roots = tuple(sorted(sid for sid, parents in hypernyms.items() if not parents))
    _log.debug("Loaded lexicon %s: %d synsets, %d roots", path, len(synsets), len(roots))
    return Lexicon(
        synsets=synsets,
        hypernyms=hypernyms,
        lemma_index={lemma: frozenset(ids) for lemma, ids in lemma_index.items()},
        roots=roots,
    )


def _topological_order(hypernyms: dict[str, frozenset[str]]) -> list[str]:
    """Parents before children. Raises CyclicTaxonomyError on a cycle."""
    children: dict[str, list[str]] = {sid: [] for sid in hypernyms}
    pending = {sid: len(parents) for sid, parents in hypernyms.items()}
    for sid in sorted(hypernyms):
        for parent in hypernyms[sid]:
            children[parent].append(sid)
    queue = deque(sorted(sid for sid, count in pending.items() if count == 0))
    order: list[str] = []
    while queue:
        sid = queue.popleft()
        order.append(sid)
        for child in children[sid]:
            pending[child] -= 1
            if pending[child] == 0:
                queue.append(child)
    if len(order) != len(hypernyms):
        stuck = sorted(sid for sid, count in pending.items() if count > 0)
        raise CyclicTaxonomyError(f"hypernym cycle among {stuck[:10]}")
    return order


class WordNetService:
    """Similarity measures over an immutable Lexicon.

    Depth is the longest hypernym path from a root, counted from 1. When the lexicon has
    several roots they hang under a virtual root of depth 1.
    """

    def __init__(self, lexicon: Lexicon, measure: WordNetMeasure = WordNetMeasure.WU_PALMER):
        self.lexicon = lexicon
        self.measure = measure
        self._multi_root = len(lexicon.roots) > 1
        self._depth: dict[str, int] = {}
        self._ancestors: dict[str, frozenset[str]] = {}
        self._neighbors: dict[str, set[str]] = {sid: set() for sid in lexicon.synsets}
        self._cached_word_similarity = lru_cache(maxsize=WORD_CACHE_SIZE)(self._word_similarity)

        root_depth = 2 if self._multi_root else 1
        for sid in _topological_order(lexicon.hypernyms):
            parents = lexicon.hypernyms[sid]
            if parents:
                self._depth[sid] = 1 + max(self._depth[p] for p in parents)
            else:
                self._depth[sid] = root_depth
            self._ancestors[sid] = frozenset({sid}).union(*(self._ancestors[p] for p in parents))
            for parent in parents:
                self._neighbors[sid].add(parent)
                self._neighbors[parent].add(sid)
        if self._multi_root:
            self._neighbors[VIRTUAL_ROOT] = set(lexicon.roots)
            for root in lexicon.roots:
                self._neighbors[root].add(VIRTUAL_ROOT)

    def depth(self, ref: SynsetRef) -> int:
        return self._depth[self._check(ref)]

    def _check(self, ref: SynsetRef) -> str:
        if ref.id not in self.lexicon.synsets:
            raise ValueError(f"unknown synset {ref.id!r}")
        return ref.id

    def shortest_path_length(self, a: SynsetRef, b: SynsetRef) -> int:
        """Edges on the shortest path along hypernym links in either direction."""
        start, goal = self._check(a), self._check(b)
        if start == goal:
            return 0
        seen = {start}
        frontier = deque([(start, 0)])
        while frontier:
            node, dist = frontier.popleft()
            for neighbor in self._neighbors[node]:
                if neighbor == goal:
                    return dist + 1
                if neighbor not in seen:
                    seen.add(neighbor)
                    frontier.append((neighbor, dist + 1))
        raise ValueError(f"no path between {start!r} and {goal!r}")

    def path_similarity(self, a: SynsetRef, b: SynsetRef) -> float:
        return 1.0 / (1 + self.shortest_path_length(a, b))

    def lowest_common_subsumer(self, a: SynsetRef, b: SynsetRef) -> str:
        """Deepest common ancestor-or-self; ties go to the smallest id."""
        common = self._ancestors[self._check(a)] & self._ancestors[self._check(b)]
        if not common:
            return VIRTUAL_ROOT
        return min(common, key=lambda sid: (-self._depth[sid], sid))

    def wu_palmer(self, a: SynsetRef, b: SynsetRef) -> float:
        lcs = self.lowest_common_subsumer(a, b)
        lcs_depth = 1 if lcs == VIRTUAL_ROOT else self._depth[lcs]
        return 2 * lcs_depth / (self.depth(a) + self.depth(b))

    def synset_similarity(
        self, a: SynsetRef, b: SynsetRef, measure: WordNetMeasure | None = None
    ) -> float:
        measure = measure or self.measure
        if measure == WordNetMeasure.PATH:
            return self.path_similarity(a, b)
        return self.wu_palmer(a, b)

    def word_similarity(self, w1: str, w2: str, measure: WordNetMeasure | None = None) -> float:
        """Max synset similarity over noun senses; out-of-lexicon words only match themselves."""
        measure = measure or self.measure
        if w1 > w2:
            w1, w2 = w2, w1
        return self._cached_word_similarity(w1, w2, measure)

    def _word_similarity(self, w1: str, w2: str, measure: WordNetMeasure) -> float:
        senses1 = self.lexicon.noun_synsets(w1)
        senses2 = self.lexicon.noun_synsets(w2)
        if not senses1 or not senses2:
            return 1.0 if w1 == w2 else 0.0
        return max(
            self.synset_similarity(SynsetRef(s1), SynsetRef(s2), measure)
            for s1 in senses1
            for s2 in senses2
        )

    def doc_similarity(
        self,
        a: PreprocessedDoc | Collection[str],
        b: PreprocessedDoc | Collection[str],
        measure: WordNetMeasure | None = None,
    ) -> SimilarityScore:
        """Symmetric average of best-match word similarities over unique lemma sets."""
        left = sorted(a.lemma_set if isinstance(a, PreprocessedDoc) else set(a))
        right = sorted(b.lemma_set if isinstance(b, PreprocessedDoc) else set(b))
        if not left or not right:
            _log.debug("WordNet comparison with an empty side")
            return SimilarityScore.empty(AlgorithmId.WORDNET)

        def directed(src: list[str], dst: list[str]) -> float:
            best = [max(self.word_similarity(x, y, measure) for y in dst) for x in src]
            return math.fsum(best) / len(best)

        value = 0.5 * (directed(left, right) + directed(right, left))
        return SimilarityScore.clamped(value, AlgorithmId.WORDNET)
