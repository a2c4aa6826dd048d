"""Builds, saves and loads the corpus index (both NER modes in one ``index.json``)."""

import json
import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from figplag.errors import EmptyCorpusError, FigplagError
from figplag.models.document import ExtractedText
from figplag.models.embedding import DocEmbedding, EmbeddingProviderKind
from figplag.models.text import NerMode, PipelineOptions, PreprocessedDoc, Token
from figplag.models.vectors import LatentIndex, TermVector, Vocabulary
from figplag.services.embedding_service import EmbeddingService
from figplag.services.lsa_service import ZeroMatrixError, default_rank, truncated_svd
from figplag.services.ner_service import Gazetteer
from figplag.services.preprocess_service import preprocess
from figplag.services.vector_space import build_vocabulary, tfidf_vectors, weight_matrix

_log = logging.getLogger(__name__)

INDEX_FILE = "index.json"
TEXTS_DIR = "texts"
FORMAT_VERSION = 1
POOLED_DOC_ID = "<corpus>"


class IndexFormatError(FigplagError):
    """Raised when ``index.json`` is missing fields or internally inconsistent."""


def doc_from_lemmas(
    doc_id: str, lemmas: Sequence[str], options: PipelineOptions
) -> PreprocessedDoc:
    tokens = tuple(
        Token(surface=lemma, lower=lemma, lemma=lemma, position=i)
        for i, lemma in enumerate(lemmas)
    )
    return PreprocessedDoc(doc_id=doc_id, tokens=tokens, options=options)


@dataclass(frozen=True, eq=False)
class ModeIndex:
    """Vector-space, LSA and embedding artifacts of the corpus under one NER mode."""

    options: PipelineOptions
    doc_ids: tuple[str, ...]
    lemmas: tuple[tuple[str, ...], ...]
    vocabulary: Vocabulary
    tfidf: tuple[TermVector, ...]
    latent: LatentIndex | None
    embeddings: tuple[DocEmbedding, ...]

    def __post_init__(self) -> None:
        n = len(self.doc_ids)
        if not (len(self.lemmas) == len(self.tfidf) == len(self.embeddings) == n):
            raise IndexFormatError("Per-document arrays disagree with doc_ids")
        if self.latent is not None and self.latent.doc_latent.shape[0] != n:
            raise IndexFormatError("LSA document factors disagree with doc_ids")

    @property
    def ner_mode(self) -> NerMode:
        return self.options.ner_mode

    def doc(self, i: int) -> PreprocessedDoc:
        return doc_from_lemmas(self.doc_ids[i], self.lemmas[i], self.options)

    def pooled_doc(self) -> PreprocessedDoc:
        """All corpus token streams concatenated in doc-id order."""
        pooled = [lemma for lemmas in self.lemmas for lemma in lemmas]
        return doc_from_lemmas(POOLED_DOC_ID, pooled, self.options)

    def to_dict(self) -> dict:
        return {
            "options": self.options.to_dict(),
            "fingerprint": self.options.fingerprint(),
            "lemmas": [list(lemmas) for lemmas in self.lemmas],
            "vocabulary": {
                "terms": list(self.vocabulary.terms),
                "df": list(self.vocabulary.df),
                "n_docs": self.vocabulary.n_docs,
            },
            "tfidf": [vector.to_dict() for vector in self.tfidf],
            "latent": self.latent.to_dict() if self.latent is not None else None,
            "embeddings": {
                "source": self.embeddings[0].source.value if self.embeddings else None,
                "vectors": [[float(x) for x in e.vector] for e in self.embeddings],
            },
        }

    @classmethod
    def from_dict(cls, data: dict, doc_ids: tuple[str, ...]) -> "ModeIndex":
        options = PipelineOptions.from_dict(data["options"])
        if options.fingerprint() != data["fingerprint"]:
            raise IndexFormatError(f"Fingerprint mismatch for ner_mode {options.ner_mode}")
        vocab = data["vocabulary"]
        embeddings = data["embeddings"]
        source = EmbeddingProviderKind(embeddings["source"]) if embeddings["source"] else None
        return cls(
            options=options,
            doc_ids=doc_ids,
            lemmas=tuple(tuple(lemmas) for lemmas in data["lemmas"]),
            vocabulary=Vocabulary(
                terms=tuple(vocab["terms"]), df=tuple(vocab["df"]), n_docs=vocab["n_docs"]
            ),
            tfidf=tuple(TermVector.from_dict(v) for v in data["tfidf"]),
            latent=LatentIndex.from_dict(data["latent"]) if data["latent"] else None,
            embeddings=tuple(
                DocEmbedding(vector=np.array(v, dtype=float), source=source)
                for v in embeddings["vectors"]
            ),
        )


@dataclass(frozen=True, eq=False)
class CorpusIndex:
    doc_ids: tuple[str, ...]
    modes: dict[NerMode, ModeIndex]
    labels: dict[str, str] = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.doc_ids)

    def mode(self, ner_mode: NerMode) -> ModeIndex:
        try:
            return self.modes[ner_mode]
        except KeyError:
            raise IndexFormatError(f"Index has no artifacts for ner_mode {ner_mode}") from None

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "doc_ids": list(self.doc_ids),
            "labels": dict(sorted(self.labels.items())),
            "modes": {mode.value: self.modes[mode].to_dict() for mode in NerMode},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CorpusIndex":
        try:
            if data.get("format_version") != FORMAT_VERSION:
                raise IndexFormatError(
                    f"Unsupported index format version {data.get('format_version')!r}"
                )
            doc_ids = tuple(data["doc_ids"])
            modes = {
                NerMode(key): ModeIndex.from_dict(value, doc_ids)
                for key, value in data["modes"].items()
            }
        except IndexFormatError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise IndexFormatError(f"Malformed index: {exc!r}") from exc
        for mode, mode_index in modes.items():
            if mode_index.ner_mode != mode:
                raise IndexFormatError(f"Artifacts under {mode} were built for another mode")
        return cls(doc_ids=doc_ids, modes=modes, labels=dict(data.get("labels", {})))

    def save(self, directory: Path, texts: Sequence[ExtractedText] = ()) -> Path:
        """Write ``index.json`` and one ``texts/<doc_id>.txt`` per extracted text."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        if texts:
            texts_dir = directory / TEXTS_DIR
            texts_dir.mkdir(exist_ok=True)
            for text in texts:
                (texts_dir / f"{text.doc_id}.txt").write_bytes(text.raw_text.encode("utf-8"))
        path = directory / INDEX_FILE
        payload = json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False)
        path.write_bytes((payload + "\n").encode("utf-8"))
        _log.info("Wrote index of %d documents to %s", self.size, path)
        return path

    @classmethod
    def load(cls, directory: Path) -> "CorpusIndex":
        path = Path(directory) / INDEX_FILE
        if not path.is_file():
            raise FileNotFoundError(f"No {INDEX_FILE} in {directory}")
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except ValueError as exc:
            raise IndexFormatError(f"{path} is not valid JSON: {exc}") from exc
        return cls.from_dict(data)


def build_mode_index(
    docs: Sequence[PreprocessedDoc],
    options: PipelineOptions,
    embedder: EmbeddingService,
    lsa_rank: int | None = None,
) -> ModeIndex:
    doc_ids = tuple(doc.doc_id for doc in docs)
    lemmas = tuple(tuple(doc.lemmas) for doc in docs)
    try:
        vocab = build_vocabulary(lemmas)
    except EmptyCorpusError:
        if options.ner_mode == NerMode.INCLUDE:
            raise
        _log.warning("Every document is empty with named entities excluded")
        vocab = Vocabulary(terms=(), df=(), n_docs=len(docs))

    vectors = tfidf_vectors(lemmas, vocab)
    latent: LatentIndex | None = None
    if len(vocab):
        rank = default_rank(len(docs), len(vocab)) if lsa_rank is None else lsa_rank
        try:
            latent = truncated_svd(weight_matrix(vectors, len(vocab)), rank)
        except ZeroMatrixError:
            _log.warning("TF-IDF matrix is zero for ner_mode %s; LSA unavailable", options.ner_mode)

    return ModeIndex(
        options=options,
        doc_ids=doc_ids,
        lemmas=lemmas,
        vocabulary=vocab,
        tfidf=tuple(vectors),
        latent=latent,
        embeddings=tuple(embedder.embed_many(docs)),
    )


def build_index(
    texts: Sequence[ExtractedText],
    base_options: PipelineOptions,
    gazetteer: Gazetteer,
    embedder: EmbeddingService,
    lsa_rank: int | None = None,
    labels: dict[str, str] | None = None,
) -> CorpusIndex:
    """Preprocess the corpus under both NER modes and build each mode's artifacts."""
    if not texts:
        raise EmptyCorpusError("Cannot index an empty corpus")
    ordered = sorted(texts, key=lambda t: t.doc_id)
    modes: dict[NerMode, ModeIndex] = {}
    for ner_mode in NerMode:
        options = base_options.with_ner_mode(ner_mode)
        docs = [preprocess(text, options, gazetteer) for text in ordered]
        modes[ner_mode] = build_mode_index(docs, options, embedder, lsa_rank)
        _log.info(
            "ner_mode %s: %d terms, LSA rank %s",
            ner_mode,
            len(modes[ner_mode].vocabulary),
            modes[ner_mode].latent.k if modes[ner_mode].latent else "n/a",
        )
    return CorpusIndex(
        doc_ids=tuple(t.doc_id for t in ordered),
        modes=modes,
        labels={"embed_provider": embedder.label, **(labels or {})},
    )
