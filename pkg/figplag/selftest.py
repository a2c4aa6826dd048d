"""Oracle suites behind ``figplag selftest``. The oracles are shared with the test suite."""

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from datetime import UTC, datetime

import numpy as np

from figplag.models.document import ExtractedText, OcrBackendKind
from figplag.models.embedding import EmbeddingProviderConfig
from figplag.models.lexicon import Lexicon, PartOfSpeech, Synset, SynsetRef
from figplag.models.text import NerMode, PipelineOptions
from figplag.models.vectors import TermVector
from figplag.resources import TOY_LEXICON_FILE
from figplag.services.embedding_service import EmbeddingService, embed_similarity
from figplag.services.lsa_service import truncated_svd
from figplag.services.ner_service import load_gazetteer
from figplag.services.preprocess_service import preprocess, strip_references
from figplag.services.similarity_service import cosine, jaccard
from figplag.services.wordnet_service import VIRTUAL_ROOT, WordNetService, load_lexicon

_log = logging.getLogger(__name__)

SUITES = ("jaccard", "cosine", "svd", "wordnet", "preprocess", "embed")
DEFAULT_SEED = 20240501
_EPOCH = datetime(1970, 1, 1, tzinfo=UTC)


# ---------------------------------------------------------------------------
# Oracles
# ---------------------------------------------------------------------------


def jaccard_oracle(a: Sequence[str], b: Sequence[str]) -> float:
    """Brute force over the distinct elements of both lists."""
    universe: list[str] = []
    for item in list(a) + list(b):
        if item not in universe:
            universe.append(item)
    if not universe:
        return 0.0
    shared = sum(1 for item in universe if item in a and item in b)
    return shared / len(universe)


def dense_cosine_oracle(u: np.ndarray, v: np.ndarray) -> float:
    nu = math.sqrt(sum(x * x for x in u))
    nv = math.sqrt(sum(x * x for x in v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return sum(x * y for x, y in zip(u, v, strict=True)) / (nu * nv)


def jacobi_eigenvalues(sym: np.ndarray, tol: float = 1e-14, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, descending."""
    a = np.array(sym, dtype=float)
    n = a.shape[0]
    for _ in range(max_sweeps):
        off = math.sqrt(sum(a[p, q] ** 2 for p in range(n) for q in range(n) if p != q))
        if off <= tol * max(1.0, float(np.abs(a).max())):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if a[p, q] == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2 * a[p, q])
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1))
                c = 1 / math.sqrt(t * t + 1)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
    return np.sort(np.diag(a))[::-1]


def all_pairs_shortest_paths(nodes: Sequence[str], edges: Sequence[tuple[str, str]]) -> dict:
    """Floyd-Warshall over the undirected graph; unreachable pairs are absent."""
    inf = math.inf
    dist = {(a, b): (0 if a == b else inf) for a in nodes for b in nodes}
    for a, b in edges:
        dist[a, b] = dist[b, a] = 1
    for k in nodes:
        for i in nodes:
            dik = dist[i, k]
            if dik == inf:
                continue
            for j in nodes:
                if dik + dist[k, j] < dist[i, j]:
                    dist[i, j] = dik + dist[k, j]
    return {pair: int(d) for pair, d in dist.items() if d != inf}


def random_taxonomy(rng: np.random.Generator, size: int) -> Lexicon:
    """Random noun DAG: every synset picks 0-2 parents among earlier ones."""
    ids = [f"s{i:02d}.n.01" for i in range(size)]
    synsets = {
        sid: Synset(sid, PartOfSpeech.NOUN, frozenset({f"w{i}"})) for i, sid in enumerate(ids)
    }
    hypernyms: dict[str, frozenset[str]] = {}
    for i, sid in enumerate(ids):
        if i == 0 or rng.random() < 0.1:
            hypernyms[sid] = frozenset()
            continue
        count = min(i, int(rng.integers(1, 3)))
        hypernyms[sid] = frozenset(ids[j] for j in rng.choice(i, size=count, replace=False))
    return Lexicon(
        synsets=synsets,
        hypernyms=hypernyms,
        lemma_index={f"w{i}": frozenset({sid}) for i, sid in enumerate(ids)},
        roots=tuple(sorted(sid for sid, parents in hypernyms.items() if not parents)),
    )


def taxonomy_edges(lexicon: Lexicon) -> tuple[list[str], list[tuple[str, str]]]:
    nodes = sorted(lexicon.synsets)
    edges = [(sid, parent) for sid in nodes for parent in sorted(lexicon.hypernyms[sid])]
    if len(lexicon.roots) > 1:
        nodes.append(VIRTUAL_ROOT)
        edges.extend((root, VIRTUAL_ROOT) for root in lexicon.roots)
    return nodes, edges


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------


@dataclass
class SuiteResult:
    name: str
    checks: int = 0
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def expect(self, condition: bool, message: str) -> None:
        self.checks += 1
        if not condition:
            self.failures.append(message)


def check_jaccard(rng: np.random.Generator, pairs: int = 1000) -> SuiteResult:
    result = SuiteResult("jaccard")
    words = [f"t{i}" for i in range(80)]
    for n in range(pairs):
        a = [str(w) for w in rng.choice(words, size=int(rng.integers(0, 51)))]
        b = [str(w) for w in rng.choice(words, size=int(rng.integers(0, 51)))]
        got = jaccard(a, b).value
        want = jaccard_oracle(a, b)
        result.expect(got == want, f"pair {n}: jaccard {got!r} != oracle {want!r}")
    return result


def check_cosine(rng: np.random.Generator, pairs: int = 1000, dim: int = 40) -> SuiteResult:
    result = SuiteResult("cosine")
    for n in range(pairs):
        dense = []
        for _ in range(2):
            mask = rng.random(dim) < 0.3
            dense.append(np.where(mask, rng.uniform(0.1, 5.0, dim), 0.0))
        u, v = (TermVector({i: float(x) for i, x in enumerate(d) if x}) for d in dense)
        got = cosine(u, v).value
        want = dense_cosine_oracle(*dense)
        result.expect(abs(got - want) <= 1e-12, f"pair {n}: cosine {got!r} vs oracle {want!r}")

        scale = float(rng.uniform(0.5, 10.0))
        if not u.is_zero:
            scaled = TermVector({i: w * scale for i, w in u})
            value = cosine(u, scaled).value
            result.expect(abs(value - 1.0) <= 1e-12, f"pair {n}: scale invariance {value!r}")
    return result


def check_svd(
    rng: np.random.Generator, matrices: int = 200, perturbation: float = 0.0
) -> SuiteResult:
    """Singular values vs. Jacobi on A^T A, factor orthonormality, discarded energy, and
    graded spectra reaching down to the rank cutoff.
    """
    result = SuiteResult("svd")
    for n in range(matrices):
        rows, cols = (int(x) for x in rng.integers(1, 9, size=2))
        a = rng.standard_normal((rows, cols))
        full = truncated_svd(a, min(rows, cols))
        sigma = full.singular_values * (1.0 + perturbation)
        oracle = np.sqrt(np.clip(jacobi_eigenvalues(a.T @ a), 0.0, None))[: full.k]
        result.expect(
            bool(np.allclose(sigma, oracle, rtol=0.0, atol=1e-8)),
            f"matrix {n} ({rows}x{cols}): singular values {sigma} vs oracle {oracle}",
        )
        for name, factor in (("doc", full.doc_latent), ("term", full.term_factors)):
            gram = factor.T @ factor
            result.expect(
                bool(np.allclose(gram, np.eye(full.k), atol=1e-8)),
                f"matrix {n}: {name} factors are not orthonormal",
            )

        k = int(rng.integers(1, min(rows, cols) + 1))
        part = truncated_svd(a, k)
        approx = (part.doc_latent * part.singular_values) @ part.term_factors.T
        total = float(np.sum(a * a))
        discarded = float(np.sum((a - approx) ** 2))
        kept = float(np.sum(part.singular_values**2))
        result.expect(
            abs(total - kept - discarded) <= 1e-6 * total,
            f"matrix {n}: discarded energy {discarded} != {total} - {kept}",
        )

    for n in range(matrices // 10):
        rows, cols = (int(x) for x in rng.integers(2, 13, size=2))
        rank = int(rng.integers(1, min(rows, cols) + 1))
        sigma = np.logspace(0.0, -8.5, rank)
        u = np.linalg.qr(rng.standard_normal((rows, rank)))[0]
        v = np.linalg.qr(rng.standard_normal((cols, rank)))[0]
        graded = truncated_svd((u * sigma) @ v.T, min(rows, cols))
        got = graded.singular_values * (1.0 + perturbation)
        result.expect(
            graded.k == rank and bool(np.allclose(got, sigma, rtol=1e-6, atol=0.0)),
            f"graded {n} ({rows}x{cols}, rank {rank}): singular values {got} vs {sigma}",
        )
    return result


def check_wordnet(rng: np.random.Generator, taxonomies: int = 50) -> SuiteResult:
    result = SuiteResult("wordnet")
    for n in range(taxonomies):
        lexicon = random_taxonomy(rng, int(rng.integers(2, 31)))
        service = WordNetService(lexicon)
        nodes, edges = taxonomy_edges(lexicon)
        oracle = all_pairs_shortest_paths(nodes, edges)
        for a in sorted(lexicon.synsets):
            for b in sorted(lexicon.synsets):
                got = service.path_similarity(SynsetRef(a), SynsetRef(b))
                want = 1.0 / (1 + oracle[a, b])
                result.expect(got == want, f"taxonomy {n}: path({a}, {b}) {got} != {want}")
                wup = service.wu_palmer(SynsetRef(a), SynsetRef(b))
                result.expect(
                    0.0 < wup <= 1.0 and wup == service.wu_palmer(SynsetRef(b), SynsetRef(a)),
                    f"taxonomy {n}: wu_palmer({a}, {b}) = {wup} is asymmetric or out of (0, 1]",
                )

    toy = WordNetService(load_lexicon(TOY_LEXICON_FILE))
    dog, cat = SynsetRef("dog.n.01"), SynsetRef("cat.n.01")
    wup = toy.wu_palmer(dog, cat)
    path = toy.path_similarity(dog, cat)
    result.expect(abs(wup - 2 / 3) <= 1e-9, f"toy wu_palmer(dog, cat) = {wup}")
    result.expect(abs(path - 1 / 3) <= 1e-9, f"toy path(dog, cat) = {path}")
    return result


_PREPROCESS_SAMPLES = (
    "The Pillai College of Engineering reported results in 2019 [3].",
    "Graph of accuracy by method (Smith et al., 2020) for New York data.",
    "Start -> Process Data -> Decision -> End",
    "",
)


def check_preprocess() -> SuiteResult:
    result = SuiteResult("preprocess")
    gazetteer = load_gazetteer()
    options = PipelineOptions(gazetteer_digest=gazetteer.digest())
    for n, sample in enumerate(_PREPROCESS_SAMPLES):
        once = strip_references(sample)
        result.expect(strip_references(once) == once, f"sample {n}: reference strip not idempotent")

        text = ExtractedText(f"s{n}", sample, OcrBackendKind.SIDECAR, _EPOCH)
        include = preprocess(text, options.with_ner_mode(NerMode.INCLUDE), gazetteer)
        exclude = preprocess(text, options.with_ner_mode(NerMode.EXCLUDE), gazetteer)
        result.expect(
            _is_subsequence(exclude.lemmas, include.lemmas),
            f"sample {n}: excluded stream is not a subsequence of the included stream",
        )
        if include.entities:
            result.expect(
                len(exclude.lemmas) < len(include.lemmas),
                f"sample {n}: tagged entities did not shorten the stream",
            )
    return result


def check_embed() -> SuiteResult:
    result = SuiteResult("embed")
    service = EmbeddingService(EmbeddingProviderConfig())
    gazetteer = load_gazetteer()
    options = PipelineOptions(gazetteer_digest=gazetteer.digest())
    text = ExtractedText("e", "start process data end", OcrBackendKind.SIDECAR, _EPOCH)
    doc = preprocess(text, options, gazetteer)
    first, second = service.embed(doc), service.embed(doc)
    result.expect(first == second, "fallback embedding is not deterministic")
    norm = float(np.linalg.norm(first.vector))
    result.expect(abs(norm - 1.0) <= 1e-12, f"fallback embedding norm {norm}")
    value = embed_similarity(first, second).value
    result.expect(abs(value - 1.0) <= 1e-12, f"self similarity {value}")
    return result


def _is_subsequence(short: Sequence[str], long: Sequence[str]) -> bool:
    it = iter(long)
    return all(any(item == candidate for candidate in it) for item in short)


def run_selftest(
    only: Sequence[str] | None = None,
    svd_perturbation: float = 0.0,
    seed: int = DEFAULT_SEED,
) -> list[SuiteResult]:
    selected = [name for name in SUITES if not only or name in only]
    unknown = sorted(set(only or ()) - set(SUITES))
    if unknown:
        raise ValueError(f"Unknown self-test suite(s): {', '.join(unknown)}")

    rng = np.random.default_rng(seed)
    runners: dict[str, Callable[[], SuiteResult]] = {
        "jaccard": lambda: check_jaccard(rng),
        "cosine": lambda: check_cosine(rng),
        "svd": lambda: check_svd(rng, perturbation=svd_perturbation),
        "wordnet": lambda: check_wordnet(rng),
        "preprocess": check_preprocess,
        "embed": check_embed,
    }
    results = []
    for name in selected:
        suite = runners[name]()
        _log.info("selftest %s: %d checks, %d failures", name, suite.checks, len(suite.failures))
        results.append(suite)
    return results
