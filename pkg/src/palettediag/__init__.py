"""Palette diagrams: visual summaries of soft network-partition ensembles.

Workflow: load or generate an ensemble of (soft) partitions, stack all
groups into one assignment matrix, filter redundant groups via pairwise
alpha-divergence and k-means, sort vertices with Isomap, and render the
result as 1D streamgraph and 2D heatmap SVGs.  `run_pipeline` does all of
it; the pieces are importable for custom use.
"""

from .divergence import DivergenceMatrix, alpha_divergence, divergence_matrix
from .embedding import (
    Embedding2D,
    TsneParams,
    VertexOrder,
    apply_order,
    classical_mds,
    contiguity_breaks,
    isomap_order,
    knn_geodesics,
    tsne_embed,
)
from .ensemble import (
    AssignmentMatrix,
    Partition,
    PartitionEnsemble,
    load_ensemble,
    make_ensemble,
    save_ensemble,
    stack_ensemble,
)
from .errors import (
    ConfigError,
    EmptyGroupError,
    EnsembleValidationError,
    NumericalError,
    PaletteError,
    PipelineStageError,
    ReportSchemaError,
)
from .estimators import GroupFilter, VertexSorter, as_assignment_matrix
from .filtering import (
    GroupClustering,
    ReducedAssignment,
    group_features,
    inspect_clusters,
    kmeans,
    select_representatives,
)
from .pipeline import (
    DivergenceCache,
    PipelineConfig,
    PipelineReport,
    PipelineResult,
    generate_synthetic_ensemble,
    load_report,
    planted_labels,
    render_report,
    report_geometry,
    report_payload_bytes,
    run_pipeline,
    save_report,
)
from .render import (
    HeatmapLayout,
    PaletteLayout,
    SvgStyle,
    assign_colors,
    color_hex,
    emit_svg,
    heatmap_layout,
    streamgraph_layout,
)

__version__ = "0.1.0"

__all__ = [
    "AssignmentMatrix",
    "ConfigError",
    "DivergenceCache",
    "DivergenceMatrix",
    "Embedding2D",
    "EmptyGroupError",
    "EnsembleValidationError",
    "GroupClustering",
    "GroupFilter",
    "HeatmapLayout",
    "NumericalError",
    "PaletteError",
    "PaletteLayout",
    "Partition",
    "PartitionEnsemble",
    "PipelineConfig",
    "PipelineReport",
    "PipelineResult",
    "PipelineStageError",
    "ReducedAssignment",
    "ReportSchemaError",
    "SvgStyle",
    "TsneParams",
    "VertexOrder",
    "VertexSorter",
    "alpha_divergence",
    "apply_order",
    "as_assignment_matrix",
    "assign_colors",
    "classical_mds",
    "color_hex",
    "contiguity_breaks",
    "divergence_matrix",
    "emit_svg",
    "generate_synthetic_ensemble",
    "group_features",
    "heatmap_layout",
    "inspect_clusters",
    "isomap_order",
    "kmeans",
    "knn_geodesics",
    "load_ensemble",
    "load_report",
    "make_ensemble",
    "planted_labels",
    "render_report",
    "report_geometry",
    "report_payload_bytes",
    "run_pipeline",
    "save_ensemble",
    "save_report",
    "select_representatives",
    "stack_ensemble",
    "streamgraph_layout",
    "tsne_embed",
]
