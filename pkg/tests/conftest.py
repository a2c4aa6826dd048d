import os
from datetime import UTC, datetime
from pathlib import Path

import pytest

from figplag.models.document import ExtractedText, OcrBackendKind
from figplag.models.embedding import EmbeddingProviderConfig
from figplag.models.text import PipelineOptions
from figplag.resources import clear as clear_resources
from figplag.services.embedding_service import EmbeddingService
from figplag.services.ner_service import load_gazetteer
from figplag.services.wordnet_service import load_lexicon

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = FIXTURES / "golden"
EXTRACTED_AT = datetime(2024, 5, 1, 12, 0, tzinfo=UTC)
PNG_MAGIC = b"\x89PNG\r\n\x1a\n"

# Five figure texts; fig2 and fig4 carry named entities. Every text shares a term with
# another one so no document is orthogonal to the rest of the corpus.
CORPUS_TEXTS = {
    "fig1": "Flowchart of the login process: user enters password, server verifies user.",
    "fig2": "Bar chart of annual sales revenue by region for Microsoft in 2019.",
    "fig3": "Table of student marks by region: name, roll number, subject, grade.",
    "fig4": "Network diagram showing server, router and client computers in Mumbai.",
    "fig5": "Pie chart of annual energy consumption: coal, solar, wind and nuclear sources.",
}


def write_image(directory: Path, stem: str, text: str | None, ext: str = "png") -> Path:
    """Fake image whose bytes are unique per stem, plus an optional sidecar text."""
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{stem}.{ext}"
    path.write_bytes(PNG_MAGIC + stem.encode("utf-8"))
    if text is not None:
        (directory / f"{stem}.txt").write_bytes(text.encode("utf-8"))
    return path


def extracted(doc_id: str, raw_text: str) -> ExtractedText:
    return ExtractedText(doc_id, raw_text, OcrBackendKind.SIDECAR, EXTRACTED_AT)


@pytest.fixture(autouse=True)
def _hermetic_env(monkeypatch, tmp_path):
    """No credentials or FIGPLAG_* settings leak in from the developer's shell."""
    for key in list(os.environ):
        if key.startswith("FIGPLAG_"):
            monkeypatch.delenv(key)
    monkeypatch.delenv("VISION_API_KEY", raising=False)
    monkeypatch.delenv("EMBED_API_KEY", raising=False)
    monkeypatch.chdir(tmp_path)
    yield
    clear_resources()


@pytest.fixture
def make_corpus(tmp_path):
    def _make(texts: dict[str, str], name: str = "corpus") -> Path:
        directory = tmp_path / name
        for stem, text in texts.items():
            write_image(directory, stem, text)
        return directory

    return _make


@pytest.fixture
def corpus_dir(make_corpus):
    return make_corpus(CORPUS_TEXTS)


@pytest.fixture
def gazetteer():
    return load_gazetteer(FIXTURES / "gazetteer.tsv")


@pytest.fixture
def toy_lexicon():
    return load_lexicon(FIXTURES / "toy.wn")


@pytest.fixture
def options(gazetteer):
    return PipelineOptions(gazetteer_digest=gazetteer.digest())


@pytest.fixture
def embedder():
    return EmbeddingService(EmbeddingProviderConfig())
