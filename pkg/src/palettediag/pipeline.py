"""End-to-end orchestration: config, pipeline stages, reports, fixtures.

A run goes stack -> (filter: divergence, k-means, representatives, t-SNE
diagnostics) -> (sort: Isomap order or a transferred order) -> layout ->
SVG.  Each stage is timed and failures abort with the stage name.

The report splits into a deterministic ``payload`` (everything needed to
re-render both diagrams, byte-stable for a given ensemble and config) and
a volatile ``runtime`` section (timings, cache hits).  Determinism
contracts compare payload bytes and SVG bytes; wall-clock numbers are
never part of them.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from .divergence import DivergenceMatrix, divergence_matrix
from .embedding import (
    Embedding2D,
    TsneParams,
    VertexOrder,
    apply_order,
    contiguity_breaks,
    default_knn,
    isomap_order,
    tsne_embed,
)
from .ensemble import (
    AssignmentMatrix,
    Partition,
    PartitionEnsemble,
    _readonly,
    make_ensemble,
    stack_ensemble,
)
from .errors import ConfigError, PipelineStageError, ReportSchemaError
from .filtering import group_features, kmeans, select_representatives, silhouette
from .render import (
    HeatmapLayout,
    SvgStyle,
    assign_colors,
    color_hex,
    emit_svg,
    group_label,
    streamgraph_layout,
)

REPORT_SCHEMA = "palette-report/1"
BASELINE_MODES = ("zero", "symmetric", "wiggle")
DIRICHLET_BASE = 50.0
MIN_TSNE_GROUPS = 4  # perplexity >= 1 requires (M0 - 1) / 3 >= 1


@dataclass(frozen=True)
class PipelineConfig:
    """Everything one analysis depends on; hashable for caching."""

    m: int
    alpha: float = 0.5
    knn_k: int | None = None
    baseline_mode: str = "symmetric"
    scale: float | None = None
    residual: bool = False
    filtering: bool = True
    sorting: bool = True
    seed: int = 0
    restarts: int = 10
    tsne_perplexity: float = 10.0
    tsne_iterations: int = 1000
    tsne_learning_rate: float = 100.0
    order_from: VertexOrder | None = None

    def __post_init__(self):
        if not (isinstance(self.m, int) and self.m >= 1):
            raise ConfigError("target group count m must be an integer >= 1")
        if not (isinstance(self.alpha, (int, float)) and math.isfinite(self.alpha)):
            raise ConfigError("alpha must be a finite number")
        if self.knn_k is not None and self.knn_k < 1:
            raise ConfigError("knn_k must be >= 1")
        if self.baseline_mode not in BASELINE_MODES:
            raise ConfigError(
                f"baseline_mode must be one of {BASELINE_MODES}"
            )
        if self.scale is not None and not self.scale > 0:
            raise ConfigError("scale must be positive")
        if self.tsne_perplexity < 1.0:
            raise ConfigError("tsne_perplexity must be >= 1")
        if self.tsne_iterations < 1:
            raise ConfigError("tsne_iterations must be >= 1")
        if not self.tsne_learning_rate > 0:
            raise ConfigError("tsne_learning_rate must be positive")
        if self.restarts < 1:
            raise ConfigError("restarts must be >= 1")
        if not isinstance(self.seed, int):
            raise ConfigError("seed must be an integer")

    def to_dict(self) -> dict:
        d = {
            "m": self.m,
            "alpha": float(self.alpha),
            "knn_k": self.knn_k,
            "baseline_mode": self.baseline_mode,
            "scale": self.scale,
            "residual": self.residual,
            "filtering": self.filtering,
            "sorting": self.sorting,
            "seed": self.seed,
            "restarts": self.restarts,
            "tsne_perplexity": float(self.tsne_perplexity),
            "tsne_iterations": self.tsne_iterations,
            "tsne_learning_rate": float(self.tsne_learning_rate),
            "order_from": None
            if self.order_from is None
            else {
                "permutation": list(self.order_from.permutation),
                "source": self.order_from.source,
            },
        }
        return d

    @classmethod
    def from_dict(cls, raw: dict) -> "PipelineConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        known = {
            "m", "alpha", "knn_k", "baseline_mode", "scale", "residual",
            "filtering", "sorting", "seed", "restarts", "tsne_perplexity",
            "tsne_iterations", "tsne_learning_rate", "order_from",
        }
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        if "m" not in raw:
            raise ConfigError("config requires the target group count 'm'")
        kwargs = dict(raw)
        of = kwargs.get("order_from")
        if of is not None:
            if (
                not isinstance(of, dict)
                or "permutation" not in of
                or not isinstance(of["permutation"], list)
            ):
                raise ConfigError(
                    "order_from must be an object with a 'permutation' list"
                )
            kwargs["order_from"] = VertexOrder(
                permutation=tuple(int(i) for i in of["permutation"]),
                source=str(of.get("source", "")),
            )
        return cls(**kwargs)

    def config_hash(self) -> str:
        blob = json.dumps(
            self.to_dict(), sort_keys=True, separators=(",", ":")
        ).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()


@dataclass(frozen=True)
class PipelineReport:
    """Deterministic payload plus volatile runtime numbers."""

    payload: dict
    runtime: dict = field(default_factory=dict)

    @property
    def config(self) -> PipelineConfig:
        return PipelineConfig.from_dict(self.payload["config"])

    @property
    def order(self) -> VertexOrder:
        o = self.payload["order"]
        return VertexOrder(
            permutation=tuple(int(i) for i in o["permutation"]),
            source=str(o.get("source", "")),
        )

    @property
    def reduced_matrix(self) -> AssignmentMatrix:
        red = self.payload["reduced"]
        entries = _readonly(np.asarray(red["entries"], dtype=float))
        labels = tuple((str(n), int(i)) for n, i in red["labels"])
        return AssignmentMatrix(
            entries=entries,
            group_labels=labels,
            n_vertices=entries.shape[1],
            dropped_groups=(),
        )


@dataclass(frozen=True)
class PipelineResult:
    report: PipelineReport
    svg_1d: str
    svg_2d: str


class DivergenceCache:
    """Optional reuse across runs: divergence keyed by (matrix hash, alpha),
    group t-SNE keyed additionally by its own parameters.

    Both are pure functions of their keys, so the cache never changes
    results, only timings.
    """

    def __init__(self):
        self._div: dict[tuple, DivergenceMatrix] = {}
        self._tsne: dict[tuple, Embedding2D] = {}

    def divergence(
        self, matrix: AssignmentMatrix, alpha: float
    ) -> tuple[DivergenceMatrix, bool]:
        key = (matrix.content_hash(), float(alpha))
        hit = key in self._div
        if not hit:
            self._div[key] = divergence_matrix(matrix, alpha=alpha)
        return self._div[key], hit

    def tsne(
        self,
        matrix_hash: str,
        alpha: float,
        params: TsneParams,
        distances: np.ndarray,
    ) -> tuple[Embedding2D, bool]:
        key = (
            matrix_hash,
            float(alpha),
            params.perplexity,
            params.iterations,
            params.learning_rate,
            params.seed,
        )
        hit = key in self._tsne
        if not hit:
            self._tsne[key] = tsne_embed(
                distances,
                perplexity=params.perplexity,
                seed=params.seed,
                iterations=params.iterations,
                learning_rate=params.learning_rate,
            )
        return self._tsne[key], hit

    def clear(self):
        self._div.clear()
        self._tsne.clear()


@contextmanager
def _stage(name: str, timings: dict):
    start = time.perf_counter()
    try:
        yield
    except PipelineStageError:
        raise
    except Exception as exc:
        raise PipelineStageError(name, exc) from exc
    finally:
        timings[name] = timings.get(name, 0.0) + time.perf_counter() - start


def run_pipeline(
    ensemble: PartitionEnsemble,
    cfg: PipelineConfig,
    cache: DivergenceCache | None = None,
) -> PipelineResult:
    """Run the full analysis and render both diagrams.

    The four on/off combinations of cfg.filtering and cfg.sorting
    correspond to showing all groups vs representatives only, in input
    vs similarity order.
    """
    timings: dict[str, float] = {}
    runtime: dict = {"timings": timings, "cache": {}}
    notes: list[str] = []
    total_start = time.perf_counter()

    with _stage("stack", timings):
        stacked = stack_ensemble(ensemble)
    m0 = stacked.entries.shape[0]

    cluster_list = None
    representatives = None
    tsne_coords = None
    tsne_kl = None
    tsne_perplexity_used = None
    sil = None
    dropped_mass = None
    reduced = stacked

    if cfg.filtering:
        with _stage("divergence", timings):
            if cache is not None:
                div, hit = cache.divergence(stacked, cfg.alpha)
                runtime["cache"]["divergence"] = "hit" if hit else "miss"
            else:
                div = divergence_matrix(stacked, alpha=cfg.alpha)
                runtime["cache"]["divergence"] = "off"
        with _stage("cluster", timings):
            features = group_features(div)
            clustering = kmeans(
                features, cfg.m, seed=cfg.seed, restarts=cfg.restarts
            )
            cluster_list = [int(c) for c in clustering.labels]
            sil = silhouette(features, clustering.labels)
        with _stage("representatives", timings):
            sel = select_representatives(stacked, clustering)
            reduced = sel.matrix
            representatives = [
                int(sel.representative_of[c])
                for c in range(clustering.n_clusters)
            ]
            if cfg.residual:
                dropped_mass = np.maximum(
                    stacked.entries.sum(axis=0) - reduced.entries.sum(axis=0),
                    0.0,
                )
        with _stage("tsne", timings):
            if m0 >= MIN_TSNE_GROUPS:
                perp = min(cfg.tsne_perplexity, (m0 - 1) / 3.0)
                if perp < cfg.tsne_perplexity:
                    notes.append(
                        f"t-SNE perplexity clamped to {perp:g} for {m0} groups"
                    )
                params = TsneParams(
                    perplexity=perp,
                    iterations=cfg.tsne_iterations,
                    learning_rate=cfg.tsne_learning_rate,
                    seed=cfg.seed,
                )
                if cache is not None:
                    emb, hit = cache.tsne(
                        stacked.content_hash(), cfg.alpha, params, div.entries
                    )
                    runtime["cache"]["tsne"] = "hit" if hit else "miss"
                else:
                    emb = tsne_embed(
                        div.entries,
                        perplexity=perp,
                        seed=cfg.seed,
                        iterations=cfg.tsne_iterations,
                        learning_rate=cfg.tsne_learning_rate,
                    )
                    runtime["cache"]["tsne"] = "off"
                tsne_coords = emb.coords
                tsne_kl = emb.final_kl
                tsne_perplexity_used = perp
            else:
                notes.append(
                    f"t-SNE skipped: {m0} groups, need at least "
                    f"{MIN_TSNE_GROUPS}"
                )

    with _stage("order", timings):
        if not cfg.sorting:
            order = VertexOrder(
                permutation=tuple(range(reduced.n_vertices)), source="input"
            )
        elif cfg.order_from is not None:
            if len(cfg.order_from.permutation) != reduced.n_vertices:
                raise ConfigError(
                    f"order_from covers {len(cfg.order_from.permutation)} "
                    f"vertices but the ensemble has {reduced.n_vertices}"
                )
            order = cfg.order_from
        else:
            k = cfg.knn_k
            if k is None:
                k = default_knn(reduced.n_vertices)
            elif k >= reduced.n_vertices:
                raise ConfigError(
                    f"knn_k={k} must be below the vertex count "
                    f"{reduced.n_vertices}"
                )
            order = isomap_order(reduced, k=k)

    with _stage("diagnostics", timings):
        ordered = apply_order(order, reduced)
        breaks = contiguity_breaks(ordered.entries, threshold=0.5)

    payload = {
        "schema": REPORT_SCHEMA,
        "config": cfg.to_dict(),
        "config_hash": cfg.config_hash(),
        "ensemble": {
            "hash": ensemble.content_hash(),
            "n_vertices": ensemble.n_vertices,
            "n_partitions": len(ensemble.partitions),
            "vertex_names": list(ensemble.vertex_names)
            if ensemble.vertex_names is not None
            else None,
        },
        "groups": {
            "labels": [[n, int(i)] for n, i in stacked.group_labels],
            "dropped": [[n, int(i)] for n, i in stacked.dropped_groups],
            "cluster": cluster_list,
            "representatives": representatives,
            "tsne": None if tsne_coords is None else tsne_coords.tolist(),
            "tsne_final_kl": None if tsne_kl is None else float(tsne_kl),
            "tsne_perplexity": tsne_perplexity_used,
            "silhouette": None if sil is None else float(sil),
        },
        "reduced": {
            "labels": [[n, int(i)] for n, i in reduced.group_labels],
            "entries": reduced.entries.tolist(),
            "dropped_mass": None
            if dropped_mass is None
            else dropped_mass.tolist(),
        },
        "order": {
            "permutation": [int(i) for i in order.permutation],
            "source": order.source,
        },
        "diagnostics": {
            "contiguity_breaks": [int(b) for b in breaks],
            "notes": notes,
        },
    }
    report = PipelineReport(payload=payload, runtime=runtime)

    with _stage("render", timings):
        svg_1d, svg_2d = render_report(report)

    timings["total"] = time.perf_counter() - total_start
    return PipelineResult(report=report, svg_1d=svg_1d, svg_2d=svg_2d)


def _layouts_from_report(report: PipelineReport):
    cfg = report.config
    matrix = report.reduced_matrix
    order = report.order
    ordered = apply_order(order, matrix)
    colors = assign_colors(matrix.entries.shape[0], seed=cfg.seed)
    scale = cfg.scale
    if scale is None:
        scale = float(report.payload["ensemble"]["n_partitions"])
    dropped_mass = report.payload["reduced"].get("dropped_mass")
    residual = None
    if dropped_mass is not None:
        residual = np.asarray(dropped_mass, dtype=float)[
            np.asarray(order.permutation)
        ]
    layout = streamgraph_layout(
        ordered,
        baseline_mode=cfg.baseline_mode,
        scale=scale,
        colors=colors,
        residual_totals=residual,
        order=order,
    )
    labels = tuple(
        group_label(name, idx) for name, idx in matrix.group_labels
    )
    heat = HeatmapLayout(
        order=order,
        grid=np.clip(ordered.entries, 0.0, 1.0),
        colors=tuple(colors),
        labels=labels,
    )
    return layout, heat


def render_report(report: PipelineReport) -> tuple[str, str]:
    """Re-render both SVGs from a report alone, with no recomputation."""
    layout, heat = _layouts_from_report(report)
    style = SvgStyle()
    return emit_svg(layout, style), emit_svg(heat, style)


def report_geometry(report: PipelineReport) -> dict:
    """JSON-ready band and grid geometry for clients that draw their own."""
    layout, heat = _layouts_from_report(report)
    return {
        "bands": layout.bands.tolist(),
        "baseline": layout.baseline.tolist(),
        "colors": [color_hex(c) for c in layout.colors],
        "labels": list(layout.labels),
        "scale": layout.scale,
        "heatmap": heat.grid.tolist(),
    }


def report_payload_bytes(report: PipelineReport) -> bytes:
    """Canonical bytes of the deterministic part of a report."""
    return json.dumps(
        report.payload, sort_keys=True, separators=(",", ":")
    ).encode("utf-8")


def save_report(report: PipelineReport, path) -> None:
    doc = {
        "schema": REPORT_SCHEMA,
        "payload": report.payload,
        "runtime": report.runtime,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def load_report(source) -> PipelineReport:
    """Read a report back; schema problems raise, they never crash."""
    if isinstance(source, (bytes, bytearray)):
        raw = bytes(source)
    else:
        with open(source, "rb") as fh:
            raw = fh.read()
    try:
        doc = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ReportSchemaError(f"report is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ReportSchemaError("report must be a JSON object")
    schema = doc.get("schema")
    if schema != REPORT_SCHEMA:
        raise ReportSchemaError(
            f"unsupported report schema {schema!r}; expected {REPORT_SCHEMA!r}"
        )
    payload = doc.get("payload")
    if not isinstance(payload, dict):
        raise ReportSchemaError("report has no payload object")
    for key in ("config", "reduced", "order", "ensemble"):
        if key not in payload:
            raise ReportSchemaError(f"report payload lacks {key!r}")
    runtime = doc.get("runtime")
    return PipelineReport(
        payload=payload, runtime=runtime if isinstance(runtime, dict) else {}
    )


# --- synthetic fixtures --------------------------------------------------


def planted_labels(n: int, k: int) -> np.ndarray:
    """Ground-truth labels: k contiguous blocks, sizes as equal as possible."""
    sizes = [n // k + (1 if j < n % k else 0) for j in range(k)]
    return np.repeat(np.arange(k), sizes)


def _soft_columns(
    labels: np.ndarray, n_cats: int, eta: float, rng: np.random.Generator
) -> np.ndarray:
    """One column-stochastic matrix: per vertex a Dirichlet draw centered
    on its planted category; eta=0 degenerates to exact one-hot columns."""
    n = labels.shape[0]
    out = np.zeros((n_cats, n))
    if eta == 0.0:
        out[labels, np.arange(n)] = 1.0
        return out
    for i in range(n):
        conc = np.full(n_cats, DIRICHLET_BASE * eta / n_cats)
        conc[labels[i]] += DIRICHLET_BASE * (1.0 - eta)
        out[:, i] = rng.dirichlet(conc)
    return out


def generate_synthetic_ensemble(
    n: int,
    k: int,
    l: int,
    eta: float = 0.0,
    mode: str = "soft",
    seed: int = 0,
) -> PartitionEnsemble:
    """Planted-group test ensembles.

    hard: one-hot labels, each flipped to a uniform random group with
    probability eta.  soft: Dirichlet columns concentrated on the planted
    group with mixing eta.  hierarchical-split: soft, but odd-indexed
    copies split planted group 0 into its two half-blocks (k+1 rows),
    modeling a family of groups subdivided at finer resolution.
    """
    if not 1 <= k <= n:
        raise ConfigError("need 1 <= k <= n")
    if l < 1:
        raise ConfigError("need at least one copy")
    if not 0.0 <= eta <= 1.0:
        raise ConfigError("eta must lie in [0, 1]")
    if mode not in ("hard", "soft", "hierarchical-split"):
        raise ConfigError(f"unknown mode {mode!r}")

    base = planted_labels(n, k)
    partitions = []
    for copy in range(l):
        rng = np.random.default_rng([seed, copy])
        name = f"copy_{copy}"
        if mode == "hard":
            labels = base.copy()
            flip = rng.random(n) < eta
            labels[flip] = rng.integers(0, k, size=int(flip.sum()))
            mat = np.zeros((k, n))
            mat[labels, np.arange(n)] = 1.0
        elif mode == "soft":
            mat = _soft_columns(base, k, eta, rng)
        else:
            if copy % 2 == 1 and k >= 1:
                split = _split_group_zero(base, k)
                mat = _soft_columns(split, k + 1, eta, rng)
            else:
                mat = _soft_columns(base, k, eta, rng)
        partitions.append(Partition(name=name, assignment=_readonly(mat)))
    return make_ensemble(partitions)


def _split_group_zero(base: np.ndarray, k: int) -> np.ndarray:
    """Relabel: group 0's block becomes categories 0 and 1 (half each);
    groups 1..k-1 shift up by one."""
    labels = base + 1
    zero = np.flatnonzero(base == 0)
    half = zero.shape[0] // 2
    labels[zero[:half]] = 0
    labels[zero[half:]] = 1
    return labels
