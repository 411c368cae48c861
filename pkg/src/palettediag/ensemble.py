"""Partition-ensemble data model, ingestion, and assignment-matrix stacking.

An ensemble collects L labeled partitions of one vertex set.  Each partition
carries a groups-by-vertices matrix of assignment probabilities; hard
partitions may be supplied as label vectors and are expanded to one-hot
matrices at load time.  Stacking the ensemble produces the combined
assignment matrix whose rows are all groups of all partitions, which is the
input to filtering, sorting, and rendering.
"""

from __future__ import annotations

import hashlib
import io
import json
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyGroupError, EnsembleValidationError

COLUMN_SUM_SLACK = 1e-9


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Partition:
    """One clustering result: a groups-by-vertices probability matrix."""

    name: str
    assignment: np.ndarray  # shape (n_groups, n_vertices), entries in [0, 1]

    @property
    def n_groups(self) -> int:
        return self.assignment.shape[0]

    @property
    def n_vertices(self) -> int:
        return self.assignment.shape[1]


@dataclass(frozen=True)
class PartitionEnsemble:
    """L >= 1 partitions of the same vertex set."""

    n_vertices: int
    partitions: tuple[Partition, ...]
    vertex_names: tuple[str, ...] | None = None

    @property
    def n_partitions(self) -> int:
        return len(self.partitions)

    def to_dict(self) -> dict:
        d: dict = {"n_vertices": self.n_vertices}
        if self.vertex_names is not None:
            d["vertex_names"] = list(self.vertex_names)
        d["partitions"] = [
            {"name": p.name, "kind": "soft", "assignment": p.assignment.tolist()}
            for p in self.partitions
        ]
        return d

    def content_hash(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class AssignmentMatrix:
    """Stacked groups-by-vertices matrix with per-row provenance labels.

    Row g is one group's assignment vector over the N vertices.  Groups whose
    assignment vector was entirely zero are dropped at stacking time and
    recorded in ``dropped_groups``.
    """

    entries: np.ndarray  # shape (n_rows, n_vertices)
    group_labels: tuple[tuple[str, int], ...]  # (partition name, local group index)
    n_vertices: int
    dropped_groups: tuple[tuple[str, int], ...] = field(default=())

    @property
    def n_rows(self) -> int:
        return self.entries.shape[0]

    def content_hash(self) -> str:
        h = hashlib.sha256()
        h.update(repr(self.group_labels).encode())
        h.update(self.entries.tobytes())
        return h.hexdigest()


def validate_partition(
    assignment: np.ndarray, name: str, expected_n: int | None = None
) -> np.ndarray:
    """Check one partition matrix; returns the validated float array."""
    a = np.asarray(assignment, dtype=float)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise EnsembleValidationError(
            f"partition '{name}': assignment must be a 2D matrix with at least "
            f"one group and one vertex, got shape {a.shape}"
        )
    if not np.all(np.isfinite(a)):
        g, i = np.argwhere(~np.isfinite(a))[0]
        raise EnsembleValidationError(
            f"partition '{name}': non-finite entry at group {g}, vertex {i}"
        )
    bad = np.argwhere((a < 0) | (a > 1))
    if bad.size:
        g, i = bad[0]
        raise EnsembleValidationError(
            f"partition '{name}': entry {a[g, i]!r} at group {g}, vertex {i} "
            f"is outside [0, 1]"
        )
    col_sums = a.sum(axis=0)
    over = np.argwhere(col_sums > 1.0 + COLUMN_SUM_SLACK)
    if over.size:
        i = int(over[0][0])
        raise EnsembleValidationError(
            f"partition '{name}': vertex {i} has total assignment "
            f"{col_sums[i]!r} > 1"
        )
    if expected_n is not None and a.shape[1] != expected_n:
        raise EnsembleValidationError(
            f"partition '{name}' has {a.shape[1]} vertices but the ensemble "
            f"declares {expected_n}"
        )
    return a


def expand_hard_labels(labels, name: str) -> np.ndarray:
    """Turn a label vector into a one-hot groups-by-vertices matrix."""
    lab = np.asarray(labels)
    if lab.ndim != 1 or lab.size == 0:
        raise EnsembleValidationError(
            f"partition '{name}': hard labels must be a non-empty vector"
        )
    if not np.issubdtype(lab.dtype, np.integer):
        if not np.all(lab == np.floor(lab)):
            raise EnsembleValidationError(
                f"partition '{name}': hard labels must be integers"
            )
        lab = lab.astype(int)
    if lab.min() < 0:
        raise EnsembleValidationError(
            f"partition '{name}': hard label {lab.min()} is negative"
        )
    k = int(lab.max()) + 1
    out = np.zeros((k, lab.size))
    out[lab, np.arange(lab.size)] = 1.0
    return out


def make_ensemble(
    partitions: list[Partition],
    n_vertices: int | None = None,
    vertex_names=None,
) -> PartitionEnsemble:
    """Validate cross-partition consistency and freeze the ensemble."""
    if not partitions:
        raise EnsembleValidationError("ensemble has an empty partition list")
    first = partitions[0]
    n = n_vertices if n_vertices is not None else first.n_vertices
    for p in partitions:
        if p.n_vertices != n:
            raise EnsembleValidationError(
                f"partition '{p.name}' has {p.n_vertices} vertices but "
                f"partition '{first.name}' (and the ensemble header) declare {n}"
            )
    if vertex_names is not None:
        vertex_names = tuple(str(v) for v in vertex_names)
        if len(vertex_names) != n:
            raise EnsembleValidationError(
                f"vertex_names has {len(vertex_names)} entries, expected {n}"
            )
    return PartitionEnsemble(
        n_vertices=n, partitions=tuple(partitions), vertex_names=vertex_names
    )


def _ensemble_from_dict(doc: dict) -> PartitionEnsemble:
    if not isinstance(doc, dict):
        raise EnsembleValidationError("ensemble document must be a JSON object")
    try:
        n = int(doc["n_vertices"])
    except (KeyError, TypeError, ValueError):
        raise EnsembleValidationError("missing or invalid 'n_vertices'") from None
    raw = doc.get("partitions")
    if not isinstance(raw, list) or not raw:
        raise EnsembleValidationError("ensemble has an empty partition list")
    parts = []
    for idx, entry in enumerate(raw):
        if not isinstance(entry, dict):
            raise EnsembleValidationError(f"partition #{idx} is not an object")
        name = str(entry.get("name", f"partition-{idx}"))
        kind = entry.get("kind", "soft")
        if kind == "hard":
            if "labels" not in entry:
                raise EnsembleValidationError(
                    f"partition '{name}': kind 'hard' requires 'labels'"
                )
            a = expand_hard_labels(entry["labels"], name)
        elif kind == "soft":
            if "assignment" not in entry:
                raise EnsembleValidationError(
                    f"partition '{name}': kind 'soft' requires 'assignment'"
                )
            try:
                a = np.asarray(entry["assignment"], dtype=float)
            except (TypeError, ValueError):
                raise EnsembleValidationError(
                    f"partition '{name}': assignment is not a numeric matrix"
                ) from None
        else:
            raise EnsembleValidationError(
                f"partition '{name}': unknown kind {kind!r}"
            )
        a = validate_partition(a, name)
        parts.append(Partition(name=name, assignment=_readonly(a)))
    return make_ensemble(parts, n_vertices=n, vertex_names=doc.get("vertex_names"))


def load_ensemble(source, format: str = "json") -> PartitionEnsemble:
    """Read and validate an ensemble.

    Parameters
    ----------
    source
        For ``format="json"``: a path, bytes, or readable file object holding
        the canonical ensemble JSON document.  For ``format="csv-dir"``: a
        directory path with one CSV file per partition (rows = groups,
        columns = vertices, filename = partition name).
    format : {"json", "csv-dir"}

    Raises
    ------
    EnsembleValidationError
        On parse failure, inconsistent vertex counts, out-of-range entries,
        or an empty partition list; messages name the offending partition.
    """
    if format == "json":
        data = _read_bytes(source)
        try:
            doc = json.loads(data.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise EnsembleValidationError(f"ensemble JSON parse failure: {exc}") from exc
        return _ensemble_from_dict(doc)
    if format == "csv-dir":
        return _load_csv_dir(source)
    raise EnsembleValidationError(f"unknown ensemble format {format!r}")


def _read_bytes(source) -> bytes:
    if isinstance(source, bytes):
        return source
    if hasattr(source, "read"):
        data = source.read()
        return data.encode("utf-8") if isinstance(data, str) else data
    with open(source, "rb") as fh:
        return fh.read()


def _load_csv_dir(path) -> PartitionEnsemble:
    if not os.path.isdir(path):
        raise EnsembleValidationError(f"{path!r} is not a directory")
    names = sorted(f for f in os.listdir(path) if f.endswith(".csv"))
    if not names:
        raise EnsembleValidationError(f"no partition CSV files found in {path!r}")
    parts = []
    for fname in names:
        pname = fname[: -len(".csv")]
        try:
            a = np.loadtxt(os.path.join(path, fname), delimiter=",", ndmin=2)
        except ValueError as exc:
            raise EnsembleValidationError(
                f"partition '{pname}': CSV parse failure: {exc}"
            ) from exc
        a = validate_partition(a, pname)
        parts.append(Partition(name=pname, assignment=_readonly(a)))
    return make_ensemble(parts)


def save_ensemble(ensemble: PartitionEnsemble, path, format: str = "json") -> None:
    """Write an ensemble as canonical JSON or as a CSV directory."""
    if format == "json":
        doc = ensemble.to_dict()
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh)
            fh.write("\n")
    elif format == "csv-dir":
        os.makedirs(path, exist_ok=True)
        for p in ensemble.partitions:
            out = io.StringIO()
            for row in p.assignment:
                out.write(",".join(repr(float(v)) for v in row))
                out.write("\n")
            with open(os.path.join(path, p.name + ".csv"), "w", encoding="utf-8") as fh:
                fh.write(out.getvalue())
    else:
        raise EnsembleValidationError(f"unknown ensemble format {format!r}")


def stack_ensemble(ensemble: PartitionEnsemble) -> AssignmentMatrix:
    """Stack all partitions into one groups-by-vertices matrix.

    Rows follow partition order then local group order.  All-zero rows have
    no distribution over vertices and would break divergence computation, so
    they are dropped here and listed in ``dropped_groups``.
    """
    rows, labels, dropped = [], [], []
    for p in ensemble.partitions:
        for g in range(p.n_groups):
            row = p.assignment[g]
            if row.sum() == 0.0:
                dropped.append((p.name, g))
            else:
                rows.append(row)
                labels.append((p.name, g))
    if not rows:
        raise EmptyGroupError("every group in the ensemble has zero total mass")
    return AssignmentMatrix(
        entries=_readonly(np.vstack(rows)),
        group_labels=tuple(labels),
        n_vertices=ensemble.n_vertices,
        dropped_groups=tuple(dropped),
    )


def row_distribution(matrix: AssignmentMatrix, g: int) -> np.ndarray:
    """Normalize row g into a probability distribution over vertices."""
    row = matrix.entries[g]
    total = row.sum()
    if total <= 0.0:
        raise EmptyGroupError(f"group {g} has zero total assignment mass")
    return row / total


def normalized_rows(entries: np.ndarray) -> np.ndarray:
    """Row-normalize a stacked matrix; rejects all-zero rows."""
    sums = entries.sum(axis=1)
    zero = np.argwhere(sums <= 0.0)
    if zero.size:
        raise EmptyGroupError(
            f"group {int(zero[0][0])} has zero total assignment mass"
        )
    return entries / sums[:, None]
