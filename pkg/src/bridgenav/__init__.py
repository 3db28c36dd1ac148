"""Segmentation, graph extraction and inspection-route planning for
2D-projected point clouds of steel bridge joints."""

from .boundary import Boundary, border_midpoint, cluster_center, estimate_boundary
from .cloud import PointCloud, read_cloud, read_csv, write_csv
from .geometry import (
    Line2,
    Point2,
    Polygon2,
    Segment2,
    line_polygon_intersections,
    pca_principal_line,
    point_in_polygon_raycast,
    polyline_length,
)
from .graph import StructureGraph, Vertex, VertexRole, build_graph, dijkstra
from .pipeline import PipelineConfig, RunArtifacts, run_pipeline
from .planner import (
    PlannedPath,
    RobotConfig,
    RobotParams,
    pibc_config_free,
    pibc_point,
    plan_along_route,
    rrt_plan,
)
from .render import render_svg
from .segmentation import (
    ClusterSet,
    GmmModel,
    NeighborStats,
    em_gmm_fit,
    neighbor_matrix,
    segment_structure,
    selection_ratio,
)
from .synth import LabeledCloud, Shape, StructureSpec, degrade, generate
from .vocpp import (
    AugmentedGraph,
    InspectionRoute,
    brute_force_ocpp,
    eulerian_trail,
    odd_vertices,
    plan_route,
)

__version__ = "0.1.0"
