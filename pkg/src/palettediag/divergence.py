"""Alpha-divergence family and the groups-by-groups dissimilarity matrix.

The dissimilarity between two groups is the alpha-divergence of their
vertex-assignment distributions,

    D_a(p || q) = (1 - sum_i p_i^a q_i^(1-a)) / (a (1 - a)),

which interpolates the family: a -> 1 gives KL(p || q), a -> 0 gives
KL(q || p), and a = 0.5 is the (scaled) squared Hellinger distance.  The
matrix over all group pairs is what the group filter clusters.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .ensemble import AssignmentMatrix, normalized_rows
from .errors import NumericalError

DISTRIBUTION_ATOL = 1e-9
SMOOTHING_EPS = 1e-12


@dataclass(frozen=True)
class DivergenceMatrix:
    """Pairwise group dissimilarities at one alpha.

    Despite clustering literature calling this a "similarity matrix", the
    alpha-divergence is a dissimilarity and the matrix is treated as
    distance-like throughout.
    """

    entries: np.ndarray  # shape (n_groups, n_groups), zero diagonal
    alpha: float
    symmetrized: bool

    @property
    def n_groups(self) -> int:
        return self.entries.shape[0]


def _check_distribution(p: np.ndarray, which: str) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1:
        raise NumericalError(f"{which} must be a 1D probability vector")
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise NumericalError(f"{which} has negative or non-finite entries")
    if abs(p.sum() - 1.0) > DISTRIBUTION_ATOL:
        raise NumericalError(f"{which} sums to {p.sum()!r}, not 1")
    return p


def _smooth(p: np.ndarray) -> np.ndarray:
    # (p + eps) / (1 + N*eps): keeps KL finite under support mismatch
    n = p.size
    return (p + SMOOTHING_EPS) / (1.0 + n * SMOOTHING_EPS)


def _kl(p: np.ndarray, q: np.ndarray) -> float:
    if np.any((p > 0) & (q == 0)):
        p, q = _smooth(p), _smooth(q)
    mask = p > 0
    return float(np.sum(p[mask] * np.log(p[mask] / q[mask])))


def alpha_divergence(p, q, alpha: float) -> float:
    """Divergence D_alpha(p || q) between two distributions.

    At alpha = 1 this is KL(p || q); at alpha = 0 it is KL(q || p).  KL
    support mismatches are epsilon-smoothed so the result stays finite.
    Inputs must each sum to 1 within 1e-9.
    """
    if not np.isfinite(alpha):
        raise NumericalError(f"alpha must be finite, got {alpha!r}")
    p = _check_distribution(p, "p")
    q = _check_distribution(q, "q")
    if p.size != q.size:
        raise NumericalError(f"length mismatch: {p.size} vs {q.size}")
    if alpha == 1.0:
        return _kl(p, q)
    if alpha == 0.0:
        return _kl(q, p)
    # 0^a = 0 for a > 0; for alpha outside (0, 1) a zero in the negative
    # power would be infinite, which only strictly-positive inputs avoid.
    with np.errstate(divide="ignore"):
        s = float(np.sum(p**alpha * q ** (1.0 - alpha)))
    return (1.0 - s) / (alpha * (1.0 - alpha))


def _worker_count(n_workers: int | None) -> int:
    if n_workers is None:
        n_workers = int(os.environ.get("PALETTE_THREADS", "1") or "1")
    return max(1, n_workers)


def divergence_matrix(
    matrix: AssignmentMatrix,
    alpha: float = 0.5,
    symmetrize: bool = True,
    n_workers: int | None = None,
) -> DivergenceMatrix:
    """All-pairs alpha-divergences of the row distributions.

    Rows are normalized to distributions first; empty rows propagate
    EmptyGroupError.  With ``symmetrize`` each entry becomes the arithmetic
    mean of the two directed divergences, which keeps the zero diagonal and
    makes the matrix exactly equal to its transpose.  Worker count only
    splits the row range (``PALETTE_THREADS`` caps the default); every entry
    is independent, so the result is identical for any worker count.
    """
    if not np.isfinite(alpha):
        raise NumericalError(f"alpha must be finite, got {alpha!r}")
    dists = normalized_rows(matrix.entries)
    m = dists.shape[0]
    if alpha in (0.0, 1.0):
        out = np.empty((m, m))
        for i in range(m):
            for j in range(m):
                p, q = (dists[i], dists[j]) if alpha == 1.0 else (dists[j], dists[i])
                out[i, j] = 0.0 if i == j else _kl(p, q)
    else:
        with np.errstate(divide="ignore"):
            pa = dists**alpha
            qa = dists ** (1.0 - alpha)
        out = np.empty((m, m))

        def fill(lo: int, hi: int) -> None:
            # 0 * inf from mismatched supports shows up as NaN and is
            # rejected by the finiteness check below
            with np.errstate(invalid="ignore"):
                out[lo:hi] = (1.0 - pa[lo:hi] @ qa.T) / (alpha * (1.0 - alpha))

        workers = _worker_count(n_workers)
        if workers == 1 or m < 2 * workers:
            fill(0, m)
        else:
            bounds = np.linspace(0, m, workers + 1, dtype=int)
            with ThreadPoolExecutor(max_workers=workers) as pool:
                futures = [
                    pool.submit(fill, int(lo), int(hi))
                    for lo, hi in zip(bounds[:-1], bounds[1:])
                ]
                for f in futures:
                    f.result()
    np.fill_diagonal(out, 0.0)
    if not np.all(np.isfinite(out)):
        raise NumericalError(
            "divergence matrix has non-finite entries; alpha outside [0, 1] "
            "requires strictly positive distributions"
        )
    if symmetrize:
        out = 0.5 * (out + out.T)
        np.fill_diagonal(out, 0.0)
    out.flags.writeable = False
    return DivergenceMatrix(entries=out, alpha=float(alpha), symmetrized=symmetrize)
