"""Manifold-learning kernels: Isomap vertex ordering and exact t-SNE.

Vertices live as N points in group-assignment space (the columns of the
reduced matrix).  Isomap — kNN graph, geodesic distances, classical MDS to
one dimension — gives the left-to-right order for the diagrams; the order
can be transferred to other ensembles of the same network.  t-SNE embeds
the groups themselves in 2D from their pairwise divergences.

Both kernels are exact, dense, desk-scale implementations; no landmark or
tree approximations.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components, csgraph_from_dense, dijkstra

from .ensemble import AssignmentMatrix, _readonly
from .errors import ConfigError, NumericalError

MDS_TOL = 1e-10
MDS_MAX_ITER = 10_000
PERPLEXITY_ENTROPY_TOL = 1e-5
EARLY_EXAGGERATION = 12.0
EXAGGERATION_ITERS = 250


@dataclass(frozen=True)
class VertexOrder:
    """A display permutation of vertex indices.

    ``permutation[pos]`` is the original index of the vertex drawn at
    position ``pos``.  Orientation is canonical: the lowest-index vertex
    sits in the first half, with ties resolved toward the identity
    direction.
    """

    permutation: tuple[int, ...]
    source: str = ""

    def __post_init__(self):
        n = len(self.permutation)
        if sorted(self.permutation) != list(range(n)):
            raise ConfigError("permutation is not a bijection on 0..N-1")


@dataclass(frozen=True)
class TsneParams:
    perplexity: float = 10.0
    iterations: int = 1000
    learning_rate: float = 100.0
    seed: int = 0


@dataclass(frozen=True)
class Embedding2D:
    coords: np.ndarray  # shape (n_points, 2)
    final_kl: float
    params: TsneParams
    kl_after_exaggeration: float = float("nan")


def default_knn(n: int) -> int:
    """Neighborhood size when none is given: max(10, ceil(ln N)), capped."""
    return min(n - 1, max(10, math.ceil(math.log(n)))) if n > 1 else 1


def knn_geodesics(points: np.ndarray, k: int) -> np.ndarray:
    """Geodesic (graph shortest-path) distances over a symmetric kNN graph.

    Edges carry Euclidean weights; each point is linked to its k nearest
    others and the graph is symmetrized by union.  A disconnected graph is
    repaired by adding the single shortest Euclidean edge between any two
    components, repeated until connected, so the user's locality choice k
    is preserved.  Duplicate points yield zero-weight edges.
    """
    x = np.asarray(points, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ConfigError("need at least 2 points")
    n = x.shape[0]
    if not 1 <= k < n:
        raise ConfigError(f"neighbor count k={k} must satisfy 1 <= k < {n}")
    sq = np.maximum(
        (x**2).sum(axis=1)[:, None] - 2.0 * x @ x.T + (x**2).sum(axis=1)[None, :],
        0.0,
    )
    np.fill_diagonal(sq, 0.0)
    dist = np.sqrt(sq)
    # stable argsort keeps neighbor choice deterministic under ties
    order = np.argsort(dist + np.where(np.eye(n, dtype=bool), np.inf, 0.0),
                       axis=1, kind="stable")
    neighbors = order[:, :k]
    # dense with inf marking non-edges, so zero-weight edges (duplicate
    # points) survive the sparse conversion
    dense = np.full((n, n), np.inf)
    rows = np.repeat(np.arange(n), k)
    cols = neighbors.ravel()
    dense[rows, cols] = dist[rows, cols]
    dense[cols, rows] = dist[cols, rows]  # union symmetrization
    np.fill_diagonal(dense, np.inf)

    graph = csgraph_from_dense(dense, null_value=np.inf)
    n_comp, labels = connected_components(graph, directed=False)
    while n_comp > 1:
        # globally shortest edge between any two components
        mask = labels[:, None] != labels[None, :]
        masked = np.where(mask, dist, np.inf)
        flat = int(np.argmin(masked))
        i, j = divmod(flat, n)
        dense[i, j] = dense[j, i] = dist[i, j]
        graph = csgraph_from_dense(dense, null_value=np.inf)
        n_comp, labels = connected_components(graph, directed=False)

    geo = dijkstra(graph, directed=False)
    if not np.all(np.isfinite(geo)):
        raise NumericalError("geodesic distances are not all finite")
    geo = 0.5 * (geo + geo.T)  # path sums can differ in the last ulp
    np.fill_diagonal(geo, 0.0)
    return geo


def classical_mds(distances: np.ndarray, dims: int = 1) -> np.ndarray:
    """Embed a distance matrix by double centering and top eigenpairs.

    B = -1/2 J D^2 J is diagonalized by power iteration with deflation
    (tolerance 1e-10, at most 10^4 iterations per component); coordinates
    are eigenvector times sqrt(eigenvalue).  A negative leading eigenvalue
    means the input is too far from Euclidean and raises.
    """
    d = np.asarray(distances, dtype=float)
    n = d.shape[0]
    if d.ndim != 2 or d.shape[1] != n:
        raise NumericalError("distance matrix must be square")
    if dims not in (1, 2):
        raise NumericalError("dims must be 1 or 2")
    if not np.allclose(d, d.T, atol=1e-9, rtol=1e-9):
        raise NumericalError("distance matrix must be symmetric")
    if np.any(d < 0) or np.any(np.diag(d) != 0.0):
        raise NumericalError("distance matrix must be nonnegative with zero diagonal")
    if not d.any():
        warnings.warn("all distances are zero; returning all-zero coordinates")
        return np.zeros((n, dims))
    d = 0.5 * (d + d.T)
    sq = d**2
    row = sq.mean(axis=1)
    b = -0.5 * (sq - row[:, None] - row[None, :] + sq.mean())
    b = 0.5 * (b + b.T)

    coords = np.zeros((n, dims))
    for comp in range(dims):
        lam, vec = _power_iteration(b, seed=comp)
        if lam <= 0.0:
            if comp == 0:
                raise NumericalError(
                    "leading eigenvalue is not positive; distances are not "
                    "embeddable"
                )
            raise NumericalError(
                f"only {comp} positive eigenvalue(s); cannot embed in {dims} "
                f"dimensions"
            )
        coords[:, comp] = vec * math.sqrt(lam)
        b = b - lam * np.outer(vec, vec)
    return coords


def _power_iteration(b: np.ndarray, seed: int) -> tuple[float, np.ndarray]:
    rng = np.random.default_rng([987654321, seed])
    v = rng.standard_normal(b.shape[0])
    v /= np.linalg.norm(v)
    for _ in range(MDS_MAX_ITER):
        w = b @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0, v
        nxt = w / norm
        if nxt @ v < 0:
            nxt = -nxt
        done = np.linalg.norm(nxt - v) <= MDS_TOL
        v = nxt
        if done:
            break
    return float(v @ (b @ v)), v


def isomap_order(
    matrix: AssignmentMatrix, k: int | None = None
) -> VertexOrder:
    """Order vertices by their 1D Isomap coordinate.

    The N columns of the matrix are the points.  Coordinate ties break
    toward the original index; of the two sort directions the one placing
    vertex 0 in the first half wins (ties toward the identity direction).
    """
    points = matrix.entries.T
    n = points.shape[0]
    if k is None:
        k = default_knn(n)
    if n == 1:
        return VertexOrder(permutation=(0,), source=matrix.content_hash())
    geo = knn_geodesics(points, k)
    coord = classical_mds(geo, dims=1)[:, 0]
    perm = _canonical_order(coord)
    return VertexOrder(permutation=perm, source=matrix.content_hash())


def _canonical_order(coord: np.ndarray) -> tuple[int, ...]:
    n = coord.shape[0]
    idx = np.arange(n)
    fwd = np.lexsort((idx, coord))
    rev = np.lexsort((idx, -coord))
    pos_fwd = int(np.flatnonzero(fwd == 0)[0])
    pos_rev = int(np.flatnonzero(rev == 0)[0])
    if pos_fwd < pos_rev:
        pick = fwd
    elif pos_rev < pos_fwd:
        pick = rev
    else:
        pick = fwd if tuple(fwd) <= tuple(rev) else rev
    return tuple(int(i) for i in pick)


def apply_order(order: VertexOrder, matrix: AssignmentMatrix) -> AssignmentMatrix:
    """Permute the matrix columns into display order; rows untouched."""
    if len(order.permutation) != matrix.n_vertices:
        raise ConfigError(
            f"order covers {len(order.permutation)} vertices but the matrix "
            f"has {matrix.n_vertices}"
        )
    perm = np.asarray(order.permutation)
    return AssignmentMatrix(
        entries=_readonly(matrix.entries[:, perm]),
        group_labels=matrix.group_labels,
        n_vertices=matrix.n_vertices,
        dropped_groups=matrix.dropped_groups,
    )


def contiguity_breaks(
    ordered_entries: np.ndarray, threshold: float = 0.5
) -> list[int]:
    """Per group, extra runs of above-threshold assignment along the order.

    0 means the group occupies one contiguous stretch (or none); each
    additional separated stretch counts as one break.
    """
    breaks = []
    for row in np.asarray(ordered_entries):
        above = row >= threshold
        runs = int(np.count_nonzero(above[1:] & ~above[:-1])) + int(above[0])
        breaks.append(max(0, runs - 1))
    return breaks


# --- exact t-SNE ---------------------------------------------------------


def _conditional_probs(sq_dists: np.ndarray, perplexity: float) -> np.ndarray:
    """Per-point Gaussian conditionals matched to the perplexity by bisection."""
    n = sq_dists.shape[0]
    target = math.log(perplexity)
    p = np.zeros((n, n))
    for i in range(n):
        d = np.delete(sq_dists[i], i)
        lo, hi = 0.0, np.inf
        beta = 1.0
        row = None
        for _ in range(100):
            logits = -beta * d
            logits -= logits.max()
            w = np.exp(logits)
            total = w.sum()
            row = w / total
            nz = row > 0
            h = float(-(row[nz] * np.log(row[nz])).sum())
            if abs(h - target) <= PERPLEXITY_ENTROPY_TOL:
                break
            if h > target:  # too flat: sharpen
                lo = beta
                beta = beta * 2.0 if hi == np.inf else 0.5 * (lo + hi)
            else:
                hi = beta
                beta = 0.5 * (lo + hi)
        p[i, np.arange(n) != i] = row
    return p


def _tsne_kl_grad(y: np.ndarray, p: np.ndarray) -> tuple[float, np.ndarray]:
    """KL(P || Q) and its gradient for a 2D embedding y."""
    sq = ((y[:, None, :] - y[None, :, :]) ** 2).sum(axis=2)
    num = 1.0 / (1.0 + sq)
    np.fill_diagonal(num, 0.0)
    q = num / num.sum()
    mask = p > 0
    kl = float(np.sum(p[mask] * np.log(p[mask] / np.maximum(q[mask], 1e-300))))
    pq = (p - q) * num
    grad = 4.0 * ((pq.sum(axis=1)[:, None] * y) - pq @ y)
    return kl, grad


def tsne_embed(
    distances: np.ndarray,
    perplexity: float = 10.0,
    seed: int = 0,
    iterations: int = 1000,
    learning_rate: float = 100.0,
) -> Embedding2D:
    """Exact t-SNE on a precomputed distance matrix.

    Affinities use squared input distances with per-point bandwidths found
    by bisection (entropy within 1e-5 of log perplexity), symmetrized as
    (P_{j|i} + P_{i|j}) / 2P.  Optimization is plain gradient descent with
    adaptive gains, momentum 0.5 switching to 0.8 and early exaggeration
    x12 dropped at iteration 250, from a seeded Gaussian init scaled 1e-4.
    """
    d = np.asarray(distances, dtype=float)
    n = d.shape[0]
    if d.ndim != 2 or d.shape[1] != n:
        raise NumericalError("distance matrix must be square")
    if n < 3:
        raise NumericalError("t-SNE needs at least 3 points")
    if not np.all(np.isfinite(d)):
        raise NumericalError("distance matrix has non-finite entries")
    if not 1.0 <= perplexity <= (n - 1) / 3.0:
        raise NumericalError(
            f"perplexity {perplexity} infeasible for {n} points; must be in "
            f"[1, {(n - 1) / 3.0:g}]"
        )
    if iterations < 1:
        raise NumericalError("iterations must be >= 1")

    cond = _conditional_probs(d**2, perplexity)
    p = (cond + cond.T) / (2.0 * n)

    rng = np.random.default_rng(seed)
    y = rng.standard_normal((n, 2)) * 1e-4
    inc = np.zeros_like(y)
    gains = np.ones_like(y)
    kl_exag_end = float("nan")
    exag_iters = min(EXAGGERATION_ITERS, iterations)
    p_run = p * EARLY_EXAGGERATION

    for it in range(iterations):
        if it == exag_iters:
            p_run = p
            kl_exag_end, _ = _tsne_kl_grad(y, p)
        momentum = 0.5 if it < EXAGGERATION_ITERS else 0.8
        _, grad = _tsne_kl_grad(y, p_run)
        same_sign = np.sign(grad) == np.sign(inc)
        gains = np.where(same_sign, gains * 0.8, gains + 0.2)
        gains = np.maximum(gains, 0.01)
        inc = momentum * inc - learning_rate * gains * grad
        y = y + inc
        y = y - y.mean(axis=0)

    if not np.all(np.isfinite(y)):
        raise NumericalError("t-SNE diverged to non-finite coordinates")
    final_kl, _ = _tsne_kl_grad(y, p)
    if math.isnan(kl_exag_end):
        kl_exag_end = final_kl
    if final_kl > kl_exag_end + 1e-9:
        raise NumericalError(
            "t-SNE objective rose after early exaggeration ended"
        )
    return Embedding2D(
        coords=_readonly(y),
        final_kl=max(final_kl, 0.0),
        params=TsneParams(
            perplexity=perplexity,
            iterations=iterations,
            learning_rate=learning_rate,
            seed=seed,
        ),
        kl_after_exaggeration=kl_exag_end,
    )
