"""Truncated SVD of the TF-IDF matrix and LSA folding-in of query vectors."""

import logging

import numpy as np

from figplag.errors import FigplagError
from figplag.models.vectors import LatentIndex, TermVector

_log = logging.getLogger(__name__)

DEFAULT_MAX_RANK = 50
DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10_000
DEFAULT_SEED = 42
DEFAULT_OVERSAMPLE = 10
RANK_CUTOFF = 1e-9


class ZeroMatrixError(FigplagError):
    """Raised when the matrix to decompose has no nonzero entry."""


def default_rank(n_docs: int, n_terms: int) -> int:
    return max(1, min(DEFAULT_MAX_RANK, n_docs - 1, n_terms))


def _deflate(x: np.ndarray, basis: list[np.ndarray]) -> np.ndarray:
    # Two Gram-Schmidt passes keep the iterate orthogonal to found components.
    for _ in range(2):
        for v in basis:
            x = x - (v @ x) * v
    return x


def deflated_power_iteration(
    gram: np.ndarray,
    n_components: int,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    seed: int = DEFAULT_SEED,
) -> tuple[np.ndarray, np.ndarray]:
    """Leading eigenpairs of a symmetric PSD matrix, one component at a time.

    Each component iterates ``x <- G x`` restricted to the orthogonal complement of the
    components found so far. Stops early once the deflated operator vanishes.
    Returns (vectors as columns, eigenvalues).
    """
    dim = gram.shape[0]
    rng = np.random.default_rng(seed)
    floor = 64 * np.finfo(float).eps * max(float(np.linalg.norm(gram)), np.finfo(float).tiny)
    basis: list[np.ndarray] = []
    values: list[float] = []

    for component in range(n_components):
        x = _deflate(rng.standard_normal(dim), basis)
        norm = float(np.linalg.norm(x))
        if norm <= floor:
            break
        x /= norm
        value = 0.0
        vanished = False
        for _ in range(max_iter):
            y = _deflate(gram @ x, basis)
            new_value = float(x @ y)
            y_norm = float(np.linalg.norm(y))
            if y_norm <= floor:
                vanished = True
                break
            x = y / y_norm
            converged = abs(new_value - value) <= tol * abs(new_value)
            value = new_value
            if converged:
                break
        else:
            _log.warning(
                "Power iteration for component %d did not converge in %d iterations",
                component,
                max_iter,
            )
        if vanished:
            break
        basis.append(x)
        values.append(value)

    vectors = np.column_stack(basis) if basis else np.zeros((dim, 0))
    return vectors, np.array(values)


def _complete_basis(
    columns: np.ndarray, basis: np.ndarray, target: int, rng: np.random.Generator
) -> np.ndarray:
    """Orthonormal basis of *target* columns spanning *basis* plus the residual range.

    The residual ``M - Q Q^T M`` is formed from the matrix itself, so directions whose
    Gram eigenvalue fell below rounding are still picked up.
    """
    q = np.linalg.qr(basis)[0] if basis.shape[1] else basis
    extra = target - q.shape[1]
    if extra <= 0:
        return q
    residual = columns - q @ (q.T @ columns)
    if not np.any(residual):
        return q
    candidates = residual @ rng.standard_normal((columns.shape[1], extra))
    return np.linalg.qr(np.column_stack([q, candidates]))[0]


def truncated_svd(
    matrix: np.ndarray,
    k: int,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    seed: int = DEFAULT_SEED,
    oversample: int = DEFAULT_OVERSAMPLE,
) -> LatentIndex:
    """Top-r factors of a docs x terms matrix, r = min(k, #{i: sigma_i >= 1e-9 sigma_1}).

    Deflated power iteration on the smaller Gram operator collects up to
    ``min(k + oversample, dim)`` components; the basis is completed from the residual range
    and a Rayleigh-Ritz step takes the SVD of the matrix projected onto it.
    """
    if k < 1:
        raise ValueError(f"rank k must be positive, got {k}")
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.size == 0 or not np.any(a):
        raise ZeroMatrixError("Cannot decompose a zero matrix")

    n_docs, n_terms = a.shape
    term_side = n_terms <= n_docs
    # Columns of `columns` live in the space the Gram operator acts on.
    columns = a.T if term_side else a
    gram = columns @ columns.T
    dim = gram.shape[0]
    target = min(k + oversample, dim)

    found, _ = deflated_power_iteration(gram, target, tol, max_iter, seed)
    q = _complete_basis(columns, found, target, np.random.default_rng(seed + 1))
    if q.shape[1] == 0:
        raise ZeroMatrixError("Matrix is numerically zero")

    rotation, sigma, other_t = np.linalg.svd(q.T @ columns, full_matrices=False)
    if sigma[0] <= 0.0:
        raise ZeroMatrixError("Matrix is numerically zero")
    r = min(k, int(np.count_nonzero(sigma >= RANK_CUTOFF * sigma[0])))
    sigma = sigma[:r]
    own = (q @ rotation)[:, :r]
    other = other_t[:r].T

    term_factors, doc_latent = (own, other) if term_side else (other, own)

    # Sign convention: largest-magnitude entry of each term factor is positive.
    pivots = np.argmax(np.abs(term_factors), axis=0)
    signs = np.sign(term_factors[pivots, np.arange(r)])
    signs[signs == 0] = 1.0
    return LatentIndex(
        k=r,
        singular_values=sigma,
        term_factors=term_factors * signs,
        doc_latent=doc_latent * signs,
    )


def project_query(q: TermVector, idx: LatentIndex) -> np.ndarray:
    """Fold a query into the latent space: Sigma_k^-1 U_k^T q."""
    latent = np.zeros(idx.k)
    for i, w in q:
        if i < idx.term_factors.shape[0]:
            latent += w * idx.term_factors[i]
    return latent / idx.singular_values
