"""Packaged linguistic resources with a module-level cache."""

from pathlib import Path

_dir = Path(__file__).parent
_cache: dict[str, object] = {}

STOPWORDS_FILE = _dir / "stopwords.txt"
LEMMA_EXCEPTIONS_FILE = _dir / "lemma_exceptions.txt"
GAZETTEER_FILE = _dir / "gazetteer.tsv"
LEXICON_FILE = _dir / "lexicon.wn"
TOY_LEXICON_FILE = _dir / "toy.wn"


def _data_lines(path: Path) -> list[str]:
    with open(path, encoding="utf-8") as f:
        return [line.rstrip("\n") for line in f if line.strip() and not line.startswith("#")]


def load_stopwords() -> frozenset[str]:
    """Return the embedded English stopword list (lowercase)."""
    if "stopwords" not in _cache:
        words = (line.strip().lower() for line in _data_lines(STOPWORDS_FILE))
        _cache["stopwords"] = frozenset(words)
    return _cache["stopwords"]  # type: ignore[return-value]


def load_lemma_exceptions() -> dict[str, str]:
    """Return the surface -> lemma exception table consulted before suffix rules."""
    if "lemma_exceptions" not in _cache:
        table: dict[str, str] = {}
        for line in _data_lines(LEMMA_EXCEPTIONS_FILE):
            surface, lemma = line.split("\t", 1)
            table[surface.strip().lower()] = lemma.strip().lower()
        _cache["lemma_exceptions"] = table
    return dict(_cache["lemma_exceptions"])  # type: ignore[arg-type]


def clear() -> None:
    """Drop cached resources. Useful for testing."""
    _cache.clear()
