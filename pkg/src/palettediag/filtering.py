"""Redundant-group filtering: cluster the groups, keep one per cluster.

The stacked matrix usually contains many near-copies of the same underlying
group.  Rows of the symmetrized divergence matrix serve as feature vectors,
k-means partitions them into the target number of clusters, and the member
with the largest total assignment mass represents each cluster in the
reduced matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .divergence import DivergenceMatrix
from .ensemble import AssignmentMatrix, _readonly
from .errors import ConfigError, NumericalError

KMEANS_MAX_ITER = 300


@dataclass(frozen=True)
class GroupClustering:
    """k-means result over the stacked groups."""

    labels: np.ndarray  # cluster index per original group
    objective: float  # final within-cluster sum of squared distances
    seed: int
    n_clusters: int
    objective_history: tuple[float, ...] = ()  # per-iteration, best restart


@dataclass(frozen=True)
class ReducedAssignment:
    """Representative rows of the stacked matrix, one per cluster."""

    matrix: AssignmentMatrix  # n_clusters rows, copied verbatim
    representative_of: dict[int, int]  # cluster index -> original group index
    member_groups: dict[int, list[int]]  # cluster index -> original group indices


def group_features(d: DivergenceMatrix) -> np.ndarray:
    """Feature vectors for clustering: rows of the symmetrized matrix."""
    if not d.symmetrized:
        raise ConfigError("group features require a symmetrized divergence matrix")
    return d.entries


def _kmeans_pp_init(x: np.ndarray, m: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    centers = np.empty((m, x.shape[1]))
    centers[0] = x[rng.integers(n)]
    d2 = np.sum((x - centers[0]) ** 2, axis=1)
    for j in range(1, m):
        total = d2.sum()
        if total <= 0.0:
            # remaining points coincide with chosen centers; any point works
            centers[j] = x[rng.integers(n)]
            continue
        centers[j] = x[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, np.sum((x - centers[j]) ** 2, axis=1))
    return centers


def _lloyd(x: np.ndarray, centers: np.ndarray, m: int):
    labels = np.full(x.shape[0], -1)
    history = []
    for _ in range(KMEANS_MAX_ITER):
        d2 = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = np.argmin(d2, axis=1)
        # empty-cluster repair: hand the point farthest from its centroid to
        # the empty cluster and seed the centroid on it, which can only
        # lower the objective
        for j in range(m):
            if np.any(new_labels == j):
                continue
            assigned = d2[np.arange(x.shape[0]), new_labels].copy()
            counts = np.bincount(new_labels, minlength=m)
            assigned[counts[new_labels] <= 1] = -np.inf  # keep donors non-empty
            far = int(np.argmax(assigned))
            new_labels[far] = j
            centers[j] = x[far]
            d2[far, j] = 0.0
        converged = np.array_equal(new_labels, labels)
        labels = new_labels
        for j in range(m):
            centers[j] = x[labels == j].mean(axis=0)
        obj = float(((x - centers[labels]) ** 2).sum())
        history.append(obj)
        if converged:
            break
    for prev, cur in zip(history, history[1:]):
        if cur > prev + 1e-9 * max(1.0, prev):
            raise NumericalError("k-means objective increased during Lloyd iteration")
    return labels, history


def kmeans(
    features: np.ndarray, m: int, seed: int = 0, restarts: int = 10
) -> GroupClustering:
    """Best-of-restarts Lloyd's algorithm with k-means++ seeding.

    Deterministic given ``seed``: restart r draws from a generator seeded by
    (seed, r), so running restarts in any order or thread layout gives the
    same result.  Convergence is unchanged assignments or 300 iterations.

    Raises
    ------
    ConfigError
        If ``m`` exceeds the number of distinct feature vectors; lower the
        target group count.
    """
    x = np.asarray(features, dtype=float)
    if x.ndim != 2 or x.shape[0] < 1:
        raise ConfigError("features must be a non-empty 2D array")
    if restarts < 1:
        raise ConfigError("restarts must be >= 1")
    n_distinct = np.unique(x, axis=0).shape[0]
    if m < 1 or m > n_distinct:
        raise ConfigError(
            f"cannot form {m} clusters from {n_distinct} distinct groups; "
            f"lower the target group count to at most {n_distinct}"
        )
    best = None
    for r in range(restarts):
        rng = np.random.default_rng([seed, r])
        centers = _kmeans_pp_init(x, m, rng)
        labels, history = _lloyd(x, centers.copy(), m)
        obj = history[-1]
        if best is None or obj < best[0]:
            best = (obj, labels, history)
    obj, labels, history = best
    labels = labels.copy()
    labels.flags.writeable = False
    return GroupClustering(
        labels=labels,
        objective=obj,
        seed=seed,
        n_clusters=m,
        objective_history=tuple(history),
    )


def select_representatives(
    stacked: AssignmentMatrix, clustering: GroupClustering
) -> ReducedAssignment:
    """Pick the maximal-mass member of each cluster.

    Ties go to the lowest original group index; the reduced matrix rows are
    ordered by cluster index and copied verbatim from the stacked matrix.
    """
    if clustering.labels.shape[0] != stacked.n_rows:
        raise ConfigError(
            f"clustering covers {clustering.labels.shape[0]} groups but the "
            f"stacked matrix has {stacked.n_rows}"
        )
    mass = stacked.entries.sum(axis=1)
    representative_of: dict[int, int] = {}
    member_groups: dict[int, list[int]] = {}
    for c in range(clustering.n_clusters):
        members = np.flatnonzero(clustering.labels == c)
        if members.size == 0:
            raise NumericalError(f"cluster {c} is empty")
        member_groups[c] = [int(g) for g in members]
        representative_of[c] = int(members[np.argmax(mass[members])])
    rows = [stacked.entries[representative_of[c]] for c in range(clustering.n_clusters)]
    labels = tuple(
        stacked.group_labels[representative_of[c]]
        for c in range(clustering.n_clusters)
    )
    reduced = AssignmentMatrix(
        entries=_readonly(np.vstack(rows)),
        group_labels=labels,
        n_vertices=stacked.n_vertices,
    )
    return ReducedAssignment(
        matrix=reduced,
        representative_of=representative_of,
        member_groups=member_groups,
    )


def inspect_clusters(
    d: DivergenceMatrix, clustering: GroupClustering, tsne_params=None
) -> list[tuple[float, float, int]]:
    """2D map of all groups, colored by cluster, for judging (alpha, M).

    Embeds the divergence matrix with t-SNE; each returned triple is
    (x, y, cluster label) for one original group.
    """
    from .embedding import TsneParams, tsne_embed

    if tsne_params is None:
        tsne_params = TsneParams()
    entries = d.entries
    if not d.symmetrized:
        entries = 0.5 * (entries + entries.T)
    emb = tsne_embed(
        entries,
        perplexity=tsne_params.perplexity,
        seed=tsne_params.seed,
        iterations=tsne_params.iterations,
        learning_rate=tsne_params.learning_rate,
    )
    return [
        (float(x), float(y), int(c))
        for (x, y), c in zip(emb.coords, clustering.labels)
    ]


def silhouette(features: np.ndarray, labels: np.ndarray) -> float | None:
    """Mean silhouette coefficient; None when it is undefined."""
    x = np.asarray(features, dtype=float)
    labels = np.asarray(labels)
    uniq = np.unique(labels)
    if uniq.size < 2 or x.shape[0] != labels.shape[0]:
        return None
    dist = np.sqrt(np.maximum(((x[:, None, :] - x[None, :, :]) ** 2).sum(axis=2), 0.0))
    scores = []
    for i in range(x.shape[0]):
        own = labels[i]
        same = labels == own
        if same.sum() <= 1:
            scores.append(0.0)
            continue
        a = dist[i, same].sum() / (same.sum() - 1)
        b = min(dist[i, labels == c].mean() for c in uniq if c != own)
        scores.append((b - a) / max(a, b) if max(a, b) > 0 else 0.0)
    return float(np.mean(scores))
