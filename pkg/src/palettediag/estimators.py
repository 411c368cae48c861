"""Estimator-style wrappers: fit on one ensemble, transform any other.

GroupFilter learns which groups are redundant and keeps representatives;
VertexSorter learns a vertex order and applies it to other assignment
matrices of the same network, which is how two algorithms' results get
compared under a single ordering.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .divergence import divergence_matrix
from .embedding import apply_order, default_knn, isomap_order
from .ensemble import AssignmentMatrix, _readonly
from .errors import ConfigError
from .filtering import group_features, kmeans, select_representatives


def as_assignment_matrix(x) -> AssignmentMatrix:
    """Accept an AssignmentMatrix or a plain (groups x vertices) array."""
    if isinstance(x, AssignmentMatrix):
        return x
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 2:
        raise ConfigError("expected a 2D groups-by-vertices array")
    if not np.all(np.isfinite(arr)):
        raise ConfigError("assignment entries must be finite")
    if np.any(arr < 0):
        raise ConfigError("assignment entries must be nonnegative")
    labels = tuple(("rows", i) for i in range(arr.shape[0]))
    return AssignmentMatrix(
        entries=_readonly(arr),
        group_labels=labels,
        n_vertices=arr.shape[1],
        dropped_groups=(),
    )


class GroupFilter(BaseEstimator):
    """Reduce a stacked assignment matrix to representative groups.

    fit clusters the rows by pairwise symmetrized alpha-divergence and
    remembers the representative row indices; transform selects those
    rows from any matrix with the same row count.
    """

    def __init__(self, n_groups: int = 3, alpha: float = 0.5, seed: int = 0,
                 restarts: int = 10):
        self.n_groups = n_groups
        self.alpha = alpha
        self.seed = seed
        self.restarts = restarts

    def fit(self, X, y=None):
        m = as_assignment_matrix(X)
        div = divergence_matrix(m, alpha=self.alpha)
        clustering = kmeans(
            group_features(div), self.n_groups,
            seed=self.seed, restarts=self.restarts,
        )
        sel = select_representatives(m, clustering)
        self.n_features_in_ = m.entries.shape[0]
        self.labels_ = clustering.labels
        self.objective_ = clustering.objective
        self.representative_indices_ = tuple(
            sel.representative_of[c] for c in range(clustering.n_clusters)
        )
        self.reduced_ = sel.matrix
        self.divergence_ = div
        return self

    def transform(self, X) -> np.ndarray:
        if not hasattr(self, "representative_indices_"):
            raise ConfigError("GroupFilter is not fitted")
        m = as_assignment_matrix(X)
        if m.entries.shape[0] != self.n_features_in_:
            raise ConfigError(
                f"X has {m.entries.shape[0]} groups; fitted on "
                f"{self.n_features_in_}"
            )
        return m.entries[list(self.representative_indices_)]

    def fit_transform(self, X, y=None) -> np.ndarray:
        return self.fit(X).transform(X)


class VertexSorter(BaseEstimator):
    """Learn a vertex order from one matrix, permute columns of others."""

    def __init__(self, n_neighbors: int | None = None):
        self.n_neighbors = n_neighbors

    def fit(self, X, y=None):
        m = as_assignment_matrix(X)
        k = self.n_neighbors
        if k is None:
            k = default_knn(m.n_vertices)
        self.order_ = isomap_order(m, k=k)
        self.n_features_in_ = m.n_vertices
        return self

    def transform(self, X) -> np.ndarray:
        if not hasattr(self, "order_"):
            raise ConfigError("VertexSorter is not fitted")
        m = as_assignment_matrix(X)
        if m.n_vertices != self.n_features_in_:
            raise ConfigError(
                f"X has {m.n_vertices} vertices; fitted on "
                f"{self.n_features_in_}"
            )
        return apply_order(self.order_, m).entries

    def fit_transform(self, X, y=None) -> np.ndarray:
        return self.fit(X).transform(X)
