"""cloudgraph: neighbor-graph construction, diffusion smoothing, and
local-geometry features for 3D point clouds, with built-in exact oracles."""

from ._kernels import backend, set_backend
from .aggregate import AggregationSpec, aggregate_baseline, aggregate_enhanced
from .construct import (
    DegreeReport,
    SpatialIndex,
    adjacency_from_neighbor_list,
    ball_query,
    ball_query_all,
    build_adjacency,
    build_index,
    degree_report,
    farthest_point_sample,
)
from .core import (
    InvariantViolation,
    NeighborList,
    PointCloud,
    SmoothingConfig,
    SparseAdjacency,
    ValidationReport,
    dense_of,
    validate_cloud,
)
from .fixtures import Fixture, cross_label_fractions, make_fixture
from .geometry import (
    CylindricalCoords,
    LocalFrame,
    ShapeDescriptors,
    cylindrical_transform,
    local_frame,
    shape_descriptors,
)
from .io import (
    ParseError,
    export_adjacency,
    export_degree_heatmap,
    export_neighborhoods,
    parse_adjacency,
    parse_cloud,
    parse_degree_heatmap,
    parse_neighborhoods,
    write_cloud,
)
from .pipeline import PipelineConfig, run_pipeline
from .smooth import (
    SmoothedGraph,
    boundary_junction_classify,
    exact_von_neumann,
    path_sum,
    reselect_neighborhoods,
    smooth,
    symmetric_normalize,
    symmetric_refine,
)

__version__ = "0.1.0"

__all__ = [
    "AggregationSpec",
    "CylindricalCoords",
    "DegreeReport",
    "Fixture",
    "InvariantViolation",
    "LocalFrame",
    "NeighborList",
    "ParseError",
    "PipelineConfig",
    "PointCloud",
    "ShapeDescriptors",
    "SmoothedGraph",
    "SmoothingConfig",
    "SparseAdjacency",
    "SpatialIndex",
    "ValidationReport",
    "adjacency_from_neighbor_list",
    "aggregate_baseline",
    "aggregate_enhanced",
    "backend",
    "ball_query",
    "ball_query_all",
    "boundary_junction_classify",
    "build_adjacency",
    "build_index",
    "cross_label_fractions",
    "cylindrical_transform",
    "degree_report",
    "dense_of",
    "exact_von_neumann",
    "export_adjacency",
    "export_degree_heatmap",
    "export_neighborhoods",
    "farthest_point_sample",
    "local_frame",
    "make_fixture",
    "parse_adjacency",
    "parse_cloud",
    "parse_degree_heatmap",
    "parse_neighborhoods",
    "path_sum",
    "reselect_neighborhoods",
    "run_pipeline",
    "set_backend",
    "shape_descriptors",
    "smooth",
    "symmetric_normalize",
    "symmetric_refine",
    "validate_cloud",
    "write_cloud",
]
