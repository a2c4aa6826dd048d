"""Command-line interface: ``figplag index``, ``figplag check`` and ``figplag selftest``."""

import argparse
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

from figplag import __version__
from figplag.config import Settings, load_settings
from figplag.errors import ConfigError, EmptyCorpusError
from figplag.models.document import OcrBackendKind
from figplag.models.embedding import EmbeddingProviderKind
from figplag.models.lexicon import WordNetMeasure
from figplag.models.report import AlgorithmId, OutputFormat, ScoreMode
from figplag.models.text import NerMode
from figplag.selftest import DEFAULT_SEED, SUITES, run_selftest
from figplag.services.embedding_service import (
    DimensionMismatchError,
    EmbeddingService,
    EmbedHttpError,
)
from figplag.services.index_service import INDEX_FILE, CorpusIndex, IndexFormatError, build_index
from figplag.services.ingest_service import (
    DuplicateDocumentError,
    UnsupportedImageError,
    ingest_corpus,
    make_image_doc,
)
from figplag.services.ner_service import GazetteerError, load_gazetteer
from figplag.services.ocr_cache import CACHE_FILE, QUOTA_FILE, QuotaCounter, QuotaExceededError
from figplag.services.ocr_service import (
    MissingSidecarError,
    OcrHttpError,
    SidecarDecodeError,
    make_backend,
)
from figplag.services.report_service import ReportService, render
from figplag.services.similarity_service import OptionsMismatchError
from figplag.services.wordnet_service import (
    CyclicTaxonomyError,
    DanglingParentError,
    LexiconParseError,
    WordNetService,
    load_lexicon,
)

_log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_BACKEND = 2
EXIT_OPTIONS_MISMATCH = 3

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
REPORT_FILES = {
    OutputFormat.TABLE: "report.txt",
    OutputFormat.CSV: "report.csv",
    OutputFormat.JSON: "report.json",
}
NER_CHOICES = {
    "include": (NerMode.INCLUDE,),
    "exclude": (NerMode.EXCLUDE,),
    "both": (NerMode.INCLUDE, NerMode.EXCLUDE),
}

_RESOURCE_ERRORS = (GazetteerError, LexiconParseError, CyclicTaxonomyError, DanglingParentError)
_BACKEND_ERRORS = (
    OcrHttpError,
    MissingSidecarError,
    SidecarDecodeError,
    QuotaExceededError,
    EmbedHttpError,
    DimensionMismatchError,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(f"{self.prog}: error: {message}")


def _fail(message: str, code: int) -> int:
    print(message, file=sys.stderr)
    return code


def _configure_logging(level: str) -> None:
    logging.basicConfig(format=LOG_FORMAT, stream=sys.stderr)
    logging.getLogger().setLevel(level.upper())


def _algorithms(value: str) -> tuple[AlgorithmId, ...]:
    names = [name.strip() for name in value.split(",") if name.strip()]
    if not names:
        raise argparse.ArgumentTypeError("at least one algorithm is required")
    try:
        return tuple(AlgorithmId(name) for name in names)
    except ValueError:
        allowed = ", ".join(a.value for a in AlgorithmId)
        raise argparse.ArgumentTypeError(
            f"unknown algorithm in {value!r} (choose from {allowed})"
        ) from None


def _ocr_kind(value: str) -> OcrBackendKind:
    if value == "http":
        return OcrBackendKind.HTTP_VISION
    try:
        return OcrBackendKind(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"unknown OCR backend {value!r}") from None


def _add_settings_args(parser: argparse.ArgumentParser) -> None:
    """Flags mirroring every config key. Unset flags fall through to file, env, defaults."""
    parser.add_argument("--config", type=Path, help="Optional key=value config file")
    ocr = parser.add_argument_group("OCR")
    ocr.add_argument("--ocr", dest="ocr_backend", type=_ocr_kind, help="sidecar | http_vision")
    ocr.add_argument("--ocr-endpoint", dest="ocr_endpoint")
    ocr.add_argument("--ocr-credential-env", dest="ocr_credential_env")
    ocr.add_argument("--ocr-max-in-flight", dest="ocr_max_in_flight", type=int)
    ocr.add_argument("--ocr-monthly-quota", dest="ocr_monthly_quota", type=int)
    ocr.add_argument("--ocr-timeout", dest="ocr_timeout", type=float)

    embed = parser.add_argument_group("embedding provider")
    embed.add_argument(
        "--embed", dest="embed_provider", choices=[k.value for k in EmbeddingProviderKind]
    )
    embed.add_argument("--embed-endpoint", dest="embed_endpoint")
    embed.add_argument("--embed-credential-env", dest="embed_credential_env")
    embed.add_argument("--embed-dim", dest="embed_dim", type=int)
    embed.add_argument("--embed-seed", dest="embed_seed", type=int)
    embed.add_argument("--embed-max-in-flight", dest="embed_max_in_flight", type=int)

    text = parser.add_argument_group("preprocessing and resources")
    text.add_argument("--lexicon", dest="lexicon_path")
    text.add_argument("--gazetteer", dest="gazetteer_path")
    for flag in ("strip-refs", "stopwords", "lemmatize", "keep-numbers"):
        text.add_argument(
            f"--{flag}", dest=flag.replace("-", "_"), action=argparse.BooleanOptionalAction
        )

    scoring = parser.add_argument_group("scoring and output")
    scoring.add_argument("--lsa-rank", dest="lsa_rank", type=int)
    scoring.add_argument(
        "--wordnet-measure", dest="wordnet_measure", choices=[m.value for m in WordNetMeasure]
    )
    scoring.add_argument("--mode", dest="default_mode", choices=[m.value for m in ScoreMode])
    scoring.add_argument(
        "--format", dest="output_format", choices=[f.value for f in OutputFormat]
    )
    parser.add_argument("--log-level", dest="log_level")


def _settings(args: argparse.Namespace) -> Settings:
    overrides = {key: getattr(args, key) for key in Settings.model_fields if hasattr(args, key)}
    settings = load_settings(args.config, overrides)
    _configure_logging(settings.log_level)
    return settings


def cmd_index(args: argparse.Namespace) -> int:
    settings = _settings(args)
    corpus = Path(args.corpus)
    if not corpus.is_dir():
        return _fail(f"Corpus directory {corpus} does not exist", EXIT_USAGE)
    out = Path(args.out)
    cache = Path(args.cache) if args.cache else out / CACHE_FILE

    try:
        backend = settings.ocr_backend_config()
        embedding = settings.embedding_config()
    except ValueError as exc:
        return _fail(f"Backend misconfigured: {exc}", EXIT_BACKEND)

    try:
        gazetteer = load_gazetteer(settings.gazetteer_path or None)
        result = ingest_corpus(corpus, backend, cache)
    except (EmptyCorpusError, DuplicateDocumentError, *_RESOURCE_ERRORS) as exc:
        return _fail(str(exc), EXIT_USAGE)
    except _BACKEND_ERRORS as exc:
        return _fail(str(exc), EXIT_BACKEND)

    if not result.ok:
        for failure in result.failures:
            print(f"OCR failed: {failure}", file=sys.stderr)
        return _fail(
            f"{len(result.failures)} image(s) failed; cache kept at {cache}, index not written",
            EXIT_BACKEND,
        )

    try:
        embedder = EmbeddingService(embedding, timeout=settings.ocr_timeout)
        index = build_index(
            result.texts,
            settings.pipeline_options(NerMode.INCLUDE, gazetteer.digest()),
            gazetteer,
            embedder,
            lsa_rank=settings.lsa_rank,
            labels={"ocr_backend": settings.ocr_backend.value},
        )
    except EmptyCorpusError as exc:
        return _fail(str(exc), EXIT_USAGE)
    except _BACKEND_ERRORS as exc:
        return _fail(str(exc), EXIT_BACKEND)

    path = index.save(out, result.texts)
    print(f"Indexed {index.size} documents into {path}")
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    settings = _settings(args)
    index_dir = Path(args.index)
    if not (index_dir / INDEX_FILE).is_file():
        return _fail(f"No {INDEX_FILE} found in {index_dir}", EXIT_USAGE)
    inputs = [Path(p) for p in args.input]
    missing = [str(p) for p in inputs if not p.is_file()]
    if missing:
        return _fail(f"Input image(s) not found: {', '.join(missing)}", EXIT_USAGE)

    try:
        backend_config = settings.ocr_backend_config()
        embedding = settings.embedding_config()
    except ValueError as exc:
        return _fail(f"Backend misconfigured: {exc}", EXIT_BACKEND)

    try:
        index = CorpusIndex.load(index_dir)
        gazetteer = load_gazetteer(settings.gazetteer_path or None)
        wordnet = WordNetService(
            load_lexicon(settings.lexicon_path or None), settings.wordnet_measure
        )
        images = [make_image_doc(p) for p in inputs]
    except (IndexFormatError, UnsupportedImageError, OSError, *_RESOURCE_ERRORS) as exc:
        return _fail(str(exc), EXIT_USAGE)

    mode = settings.default_mode
    fmt = settings.output_format
    try:
        embedder = EmbeddingService(embedding, timeout=settings.ocr_timeout)
        quota = QuotaCounter(index_dir / QUOTA_FILE, backend_config.monthly_quota)
        ocr = make_backend(backend_config, quota=quota)
        service = ReportService(
            index,
            settings.pipeline_options(NerMode.INCLUDE, gazetteer.digest()),
            gazetteer,
            wordnet,
            embedder,
            labels={"ocr_backend": backend_config.kind.value},
        )
        reports = [
            service.build_report(ocr.extract(image), args.algorithms, NER_CHOICES[args.ner], mode)
            for image in images
        ]
    except OptionsMismatchError as exc:
        return _fail(f"Index and query options differ: {exc}", EXIT_OPTIONS_MISMATCH)
    except EmptyCorpusError as exc:
        return _fail(str(exc), EXIT_USAGE)
    except _BACKEND_ERRORS as exc:
        return _fail(str(exc), EXIT_BACKEND)

    sys.stdout.write(render(reports, fmt))
    if args.output_dir:
        out = Path(args.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        for out_fmt, name in REPORT_FILES.items():
            (out / name).write_bytes(render(reports, out_fmt).encode("utf-8"))
        _log.info("Wrote reports to %s", out)
    return EXIT_OK


def cmd_selftest(args: argparse.Namespace) -> int:
    _configure_logging(args.log_level or "WARNING")
    results = run_selftest(only=args.only, svd_perturbation=args.svd_perturbation, seed=args.seed)
    for suite in results:
        status = "PASS" if suite.passed else "FAIL"
        print(f"{status} {suite.name}: {suite.checks} checks, {len(suite.failures)} failures")
        for failure in suite.failures[:5]:
            print(f"    {failure}")
    failed = [suite.name for suite in results if not suite.passed]
    if failed:
        print(f"selftest FAILED: {', '.join(failed)}")
        return EXIT_USAGE
    print(f"selftest passed ({len(results)} suites)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="figplag", description="Plagiarism detection for text inside images.")
    parser.add_argument("--version", action="version", version=f"figplag {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    index = sub.add_parser("index", help="Extract, preprocess and index an image corpus")
    index.add_argument("--corpus", required=True, help="Directory of corpus images")
    index.add_argument("--out", required=True, help="Index output directory")
    index.add_argument("--cache", help=f"OCR cache file (default: <out>/{CACHE_FILE})")
    _add_settings_args(index)
    index.set_defaults(func=cmd_index)

    check = sub.add_parser("check", help="Check suspicious images against an index")
    check.add_argument("--index", required=True, help="Directory holding index.json")
    check.add_argument("--input", required=True, action="append", help="Suspicious image")
    check.add_argument(
        "--algorithms", type=_algorithms, default=tuple(AlgorithmId), help="Comma-separated list"
    )
    check.add_argument("--ner", choices=sorted(NER_CHOICES), default="both")
    check.add_argument("--output-dir", help="Also write report.txt, report.csv and report.json")
    _add_settings_args(check)
    check.set_defaults(func=cmd_check)

    selftest = sub.add_parser("selftest", help="Run the oracle suites")
    selftest.add_argument("--only", action="append", choices=SUITES, help="Repeatable")
    selftest.add_argument(
        "--svd-perturbation",
        type=float,
        default=0.0,
        help="Scale computed singular values by 1+EPS before comparison (fault injection)",
    )
    selftest.add_argument("--seed", type=int, default=DEFAULT_SEED)
    selftest.add_argument("--log-level", dest="log_level")
    selftest.set_defaults(func=cmd_selftest)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        return _fail(str(exc), EXIT_USAGE)
    try:
        return args.func(args)
    except ConfigError as exc:
        return _fail(str(exc), EXIT_USAGE)


if __name__ == "__main__":
    sys.exit(main())
