import numpy as np
import pytest

from bridgenav.boundary import border_midpoint, cluster_center, estimate_boundary
from bridgenav.errors import BridgenavError, TooFewPoints
from bridgenav.geometry import Point2, points_in_polygon, signed_area
from bridgenav.synth import Shape, StructureSpec, generate


def sample_l_region(n=4000, seed=0):
    """Uniform points over an L made of [0,2]x[0,1] plus [0,1]x[1,2]."""
    rng = np.random.default_rng(seed)
    pts = []
    while len(pts) < n:
        p = rng.uniform(0, 2, size=2)
        if p[1] <= 1.0 or p[0] <= 1.0:
            pts.append(p)
    return np.array(pts)


# ---------------------------------------------------------------------------
# estimate_boundary
# ---------------------------------------------------------------------------

def test_square_corners_give_square():
    corners = np.array([(0, 0), (1, 0), (1, 1), (0, 1)], dtype=float)
    b = estimate_boundary(corners, sliding_factor=3)
    assert len(b.polygon) == 4
    assert sorted(map(tuple, b.polygon.vertices)) == sorted(map(tuple, corners))
    assert b.polygon.area == pytest.approx(1.0)


def test_l_region_area_beats_convex_hull():
    pts = sample_l_region()
    b = estimate_boundary(pts, sliding_factor=12)
    true_area = 3.0
    assert abs(b.polygon.area - true_area) / true_area < 0.10
    from scipy.spatial import ConvexHull

    assert ConvexHull(pts).volume > 1.15 * b.polygon.area


def test_collinear_points_raise():
    pts = np.array([(0, 0), (1, 0), (2, 0), (3, 0)], dtype=float)
    with pytest.raises(BridgenavError):
        estimate_boundary(pts, sliding_factor=3)


def test_too_few_points():
    with pytest.raises(TooFewPoints):
        estimate_boundary(np.array([(0, 0), (1, 1)]), sliding_factor=3)


def test_vertices_are_subset_of_input():
    pts = sample_l_region(n=1500, seed=3)
    b = estimate_boundary(pts)
    as_set = {tuple(p) for p in pts}
    assert all(tuple(v) in as_set for v in b.polygon.vertices)


def test_containment_and_orientation_on_fixtures():
    for shape in (Shape.CROSS, Shape.L):
        labeled = generate(StructureSpec(shape=shape, seed=1))
        for region in labeled.true_regions:
            cluster = labeled.cloud.points[labeled.true_label == region.region_id]
            b = estimate_boundary(cluster)
            assert signed_area(b.polygon.vertices) > 0
            assert np.mean(points_in_polygon(cluster, b.polygon)) >= 0.95
            # centroid of a star-shaped cluster sits inside its own boundary
            assert points_in_polygon(b.center.as_array()[None, :], b.polygon)[0]


# ---------------------------------------------------------------------------
# cluster_center / border_midpoint
# ---------------------------------------------------------------------------

def test_center_of_square():
    assert cluster_center([(0, 0), (2, 0), (2, 2), (0, 2)]) == Point2(1.0, 1.0)


def test_center_of_single_point():
    assert cluster_center([(3.5, -1.0)]) == Point2(3.5, -1.0)


def test_center_of_pair():
    assert cluster_center([(0, 0), (3, 0)]) == Point2(1.5, 0.0)


def test_midpoint_straight_border():
    assert border_midpoint([(0, 0), (0, 2)]) == Point2(0.0, 1.0)


def test_midpoint_single_point():
    assert border_midpoint([(4, 2)]) == Point2(4.0, 2.0)


def test_midpoint_right_angle_polyline():
    assert border_midpoint([(0, 0), (1, 0), (1, 1)]) == Point2(1.0, 0.0)
