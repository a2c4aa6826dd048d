"""Plagiarism percentages against the corpus and their table / CSV / JSON renderings."""

import csv
import io
import json
import logging
from collections.abc import Iterable, Sequence

from figplag.errors import EmptyCorpusError
from figplag.models.document import ExtractedText
from figplag.models.report import (
    ALGORITHM_HEADERS,
    AlgorithmId,
    MatchResult,
    OutputFormat,
    PlagiarismReport,
    ScoreMode,
    ScoreWarning,
    SimilarityScore,
)
from figplag.models.text import NerMode, PipelineOptions, PreprocessedDoc
from figplag.services.embedding_service import EmbeddingService
from figplag.services.index_service import CorpusIndex, ModeIndex
from figplag.services.ner_service import Gazetteer
from figplag.services.preprocess_service import preprocess
from figplag.services.similarity_service import (
    DocumentFeatures,
    OptionsMismatchError,
    ScoringContext,
    score,
)
from figplag.services.wordnet_service import WordNetService

_log = logging.getLogger(__name__)

CSV_HEADER = ("input", "algorithm", "ner_mode", "mode", "best_doc", "percent")
LABEL_KEYS = ("ocr_backend", "embed_provider", "wordnet_measure", "mode")


class CorpusScorer:
    """Scores queries against one NER mode of an index; corpus features are built once."""

    def __init__(self, index: ModeIndex, wordnet: WordNetService, embedder: EmbeddingService):
        if not index.doc_ids:
            raise EmptyCorpusError("Index holds no documents")
        self.index = index
        self.context = ScoringContext(
            options=index.options,
            vocabulary=index.vocabulary,
            latent=index.latent,
            wordnet=wordnet,
            embedder=embedder,
        )
        self._corpus: list[DocumentFeatures] | None = None
        self._pooled: DocumentFeatures | None = None

    @property
    def corpus(self) -> list[DocumentFeatures]:
        if self._corpus is None:
            self._corpus = [
                self.context.features(
                    self.index.doc(i), algorithms=(), embedding=self.index.embeddings[i]
                )
                for i in range(len(self.index.doc_ids))
            ]
        return self._corpus

    @property
    def pooled(self) -> DocumentFeatures:
        if self._pooled is None:
            self._pooled = self.context.features(self.index.pooled_doc())
        return self._pooled

    def features(self, query: PreprocessedDoc, algos: Iterable[AlgorithmId]) -> DocumentFeatures:
        return self.context.features(query, algorithms=algos)

    def score_against_corpus(
        self, query: DocumentFeatures, algo: AlgorithmId, mode: ScoreMode
    ) -> MatchResult:
        """Pairwise: max over corpus docs, ties to the smallest id. Pooled: one pooled doc."""
        if mode == ScoreMode.POOLED:
            pooled = score(algo, query, self.pooled, self.context)
            return self._result(algo, mode, None, pooled, pooled.warning)

        best: SimilarityScore | None = None
        best_doc: str | None = None
        all_empty = True
        for target in sorted(self.corpus, key=lambda f: f.doc_id):
            current = score(algo, query, target, self.context)
            all_empty = all_empty and current.warning is not None
            if best is None or current.value > best.value:
                best, best_doc = current, target.doc_id
        warning = ScoreWarning.EMPTY_COMPARISON if all_empty else None
        return self._result(algo, mode, best_doc, best, warning)

    def _result(
        self,
        algo: AlgorithmId,
        mode: ScoreMode,
        best_doc: str | None,
        best: SimilarityScore,
        warning: ScoreWarning | None,
    ) -> MatchResult:
        return MatchResult(
            algorithm=algo,
            mode=mode,
            ner_mode=self.index.ner_mode,
            best_doc=best_doc,
            percent=100.0 * best.value,
            warning=warning,
        )


def score_against_corpus(
    query: PreprocessedDoc,
    index: ModeIndex,
    algo: AlgorithmId,
    mode: ScoreMode,
    wordnet: WordNetService,
    embedder: EmbeddingService,
) -> MatchResult:
    scorer = CorpusScorer(index, wordnet, embedder)
    return scorer.score_against_corpus(scorer.features(query, (algo,)), algo, mode)


class ReportService:
    def __init__(
        self,
        index: CorpusIndex,
        base_options: PipelineOptions,
        gazetteer: Gazetteer,
        wordnet: WordNetService,
        embedder: EmbeddingService,
        labels: dict[str, str] | None = None,
    ):
        self.index = index
        self.base_options = base_options
        self.gazetteer = gazetteer
        self.wordnet = wordnet
        self.embedder = embedder
        self.labels = dict(labels or {})
        self._scorers: dict[NerMode, CorpusScorer] = {}

    def scorer(self, ner_mode: NerMode) -> CorpusScorer:
        if ner_mode not in self._scorers:
            self._scorers[ner_mode] = CorpusScorer(
                self.index.mode(ner_mode), self.wordnet, self.embedder
            )
        return self._scorers[ner_mode]

    def _check_embedder(self) -> None:
        built_with = self.index.labels.get("embed_provider")
        if built_with is not None and built_with != self.embedder.label:
            raise OptionsMismatchError(
                f"Index embeddings come from {built_with}, current provider is "
                f"{self.embedder.label}"
            )

    def build_report(
        self,
        query: ExtractedText,
        algos: Sequence[AlgorithmId] = tuple(AlgorithmId),
        ner_modes: Sequence[NerMode] = tuple(NerMode),
        mode: ScoreMode = ScoreMode.PAIRWISE,
    ) -> PlagiarismReport:
        """Preprocess *query* once per NER mode and score every requested algorithm."""
        algos = [a for a in AlgorithmId if a in set(algos)]
        ner_modes = [m for m in NerMode if m in set(ner_modes)]
        if AlgorithmId.EMBED in algos:
            self._check_embedder()

        results: list[MatchResult] = []
        fingerprints: dict[str, str] = {}
        for ner_mode in ner_modes:
            options = self.base_options.with_ner_mode(ner_mode)
            doc = preprocess(query, options, self.gazetteer)
            scorer = self.scorer(ner_mode)
            features = scorer.features(doc, algos)
            fingerprints[ner_mode.value] = features.fingerprint
            for algo in algos:
                results.append(scorer.score_against_corpus(features, algo, mode))
            _log.debug("Scored %s under ner_mode %s", query.doc_id, ner_mode)

        labels = {
            **self.labels,
            "embed_provider": self.embedder.label,
            "wordnet_measure": self.wordnet.measure.value,
            "mode": mode.value,
        }
        return PlagiarismReport(
            query_id=query.doc_id,
            corpus_size=self.index.size,
            results=tuple(results),
            labels=labels,
            options_fingerprint=fingerprints,
        )


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------


def _format_table(rows: list[list[str]], numeric_from: int) -> list[str]:
    widths = [max(len(row[c]) for row in rows) for c in range(len(rows[0]))]
    lines = []
    for row in rows:
        cells = [
            cell.rjust(widths[c]) if c >= numeric_from else cell.ljust(widths[c])
            for c, cell in enumerate(row)
        ]
        lines.append("  ".join(cells).rstrip())
    return lines


def render_table(reports: Sequence[PlagiarismReport]) -> str:
    """One row per (input, ner_mode); algorithm columns in enum order, 2-decimal percents."""
    present = {r.algorithm for report in reports for r in report.results}
    algos = [a for a in AlgorithmId if a in present]
    rows = [["Input", "NER"] + [ALGORITHM_HEADERS[a] for a in algos]]
    for report in reports:
        for ner_mode in NerMode:
            if not any(r.ner_mode == ner_mode for r in report.results):
                continue
            row = [report.query_id, ner_mode.value]
            for algo in algos:
                result = report.result_for(algo, ner_mode)
                row.append(f"{result.percent:.2f}" if result is not None else "-")
            rows.append(row)

    lines = _format_table(rows, numeric_from=2)
    labels = reports[0].labels if reports else {}
    footer = [f"{key}: {labels[key]}" for key in LABEL_KEYS if key in labels]
    if footer:
        lines.append("")
        lines.extend(footer)
    return "\n".join(lines) + "\n"


def render_csv(reports: Sequence[PlagiarismReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for report in reports:
        for r in report.results:
            writer.writerow(
                [
                    report.query_id,
                    r.algorithm.value,
                    r.ner_mode.value,
                    r.mode.value,
                    r.best_doc or "",
                    repr(r.percent),
                ]
            )
    return buf.getvalue()


def render_json(reports: Sequence[PlagiarismReport]) -> str:
    if len(reports) == 1:
        payload: dict | list = reports[0].to_dict()
    else:
        payload = [report.to_dict() for report in reports]
    return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def render(report: PlagiarismReport | Sequence[PlagiarismReport], fmt: OutputFormat) -> str:
    reports = [report] if isinstance(report, PlagiarismReport) else list(report)
    match fmt:
        case OutputFormat.TABLE:
            return render_table(reports)
        case OutputFormat.CSV:
            return render_csv(reports)
        case OutputFormat.JSON:
            return render_json(reports)
    raise ValueError(f"Unknown output format {fmt!r}")


def reports_from_json(text: str) -> list[PlagiarismReport]:
    data = json.loads(text)
    items = data if isinstance(data, list) else [data]
    return [PlagiarismReport.from_dict(item) for item in items]


def results_from_csv(text: str) -> list[tuple[str, MatchResult]]:
    """(input, result) pairs; the CSV carries no warning column."""
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_HEADER:
        raise ValueError(f"Unexpected CSV header {reader.fieldnames}")
    return [
        (
            row["input"],
            MatchResult(
                algorithm=AlgorithmId(row["algorithm"]),
                mode=ScoreMode(row["mode"]),
                ner_mode=NerMode(row["ner_mode"]),
                best_doc=row["best_doc"] or None,
                percent=float(row["percent"]),
            ),
        )
        for row in reader
    ]
