import math
from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Vocabulary:
    """Term index in first-appearance order with per-term document frequencies."""

    terms: tuple[str, ...]
    df: tuple[int, ...]
    n_docs: int
    term_to_index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(self.terms) != len(self.df):
            raise ValueError("terms and df must have equal length")
        object.__setattr__(self, "term_to_index", {t: i for i, t in enumerate(self.terms)})

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, term: str) -> bool:
        return term in self.term_to_index

    def idf(self, index: int) -> float:
        return math.log(self.n_docs / self.df[index])


@dataclass(frozen=True)
class TermVector:
    """Sparse index -> weight vector. Zero weights are never stored."""

    entries: Mapping[int, float]
    norm: float = field(init=False)

    def __post_init__(self) -> None:
        cleaned = {i: float(w) for i, w in sorted(self.entries.items()) if w != 0.0}
        object.__setattr__(self, "entries", cleaned)
        object.__setattr__(self, "norm", math.sqrt(math.fsum(w * w for w in cleaned.values())))

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[tuple[int, float]]:
        return iter(self.entries.items())

    @property
    def is_zero(self) -> bool:
        return not self.entries

    def dot(self, other: "TermVector") -> float:
        small, large = (self, other) if len(self) <= len(other) else (other, self)
        return math.fsum(w * large.entries.get(i, 0.0) for i, w in small.entries.items())

    def to_dense(self, size: int) -> np.ndarray:
        dense = np.zeros(size)
        for i, w in self.entries.items():
            dense[i] = w
        return dense

    def to_dict(self) -> dict[str, float]:
        return {str(i): w for i, w in self.entries.items()}

    @classmethod
    def from_dict(cls, data: Mapping[str, float]) -> "TermVector":
        return cls({int(i): float(w) for i, w in data.items()})


@dataclass(frozen=True, eq=False)
class LatentIndex:
    """Truncated SVD of the docs x terms TF-IDF matrix (documents are rows)."""

    k: int
    singular_values: np.ndarray
    term_factors: np.ndarray
    doc_latent: np.ndarray

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("LatentIndex rank must be positive")
        if self.singular_values.shape != (self.k,):
            raise ValueError("singular_values must have length k")
        if self.term_factors.ndim != 2 or self.term_factors.shape[1] != self.k:
            raise ValueError("term_factors must be |terms| x k")
        if self.doc_latent.ndim != 2 or self.doc_latent.shape[1] != self.k:
            raise ValueError("doc_latent must be n_docs x k")

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "singular_values": [float(s) for s in self.singular_values],
            "term_factors": {
                "shape": list(self.term_factors.shape),
                "data": [float(x) for x in self.term_factors.ravel()],
            },
            "doc_latent": {
                "shape": list(self.doc_latent.shape),
                "data": [float(x) for x in self.doc_latent.ravel()],
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LatentIndex":
        def _matrix(blob: dict) -> np.ndarray:
            return np.array(blob["data"], dtype=float).reshape(blob["shape"])

        return cls(
            k=int(data["k"]),
            singular_values=np.array(data["singular_values"], dtype=float),
            term_factors=_matrix(data["term_factors"]),
            doc_latent=_matrix(data["doc_latent"]),
        )
