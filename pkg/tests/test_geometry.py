import math

import numpy as np
import pytest

from glens.geometry import (
    BBox,
    PixelDims,
    Point,
    box_to_box_gap,
    contains,
    from_pixels,
    pixel_index,
    point_to_box_distance,
    to_pixels,
)


class TestTypes:
    def test_point_validates_range(self):
        Point(0.0, 1.0)
        with pytest.raises(ValueError):
            Point(-0.01, 0.5)
        with pytest.raises(ValueError):
            Point(0.5, 1.01)

    def test_bbox_requires_ordered_corners(self):
        BBox(0.1, 0.1, 0.2, 0.2)
        with pytest.raises(ValueError):
            BBox(0.2, 0.1, 0.2, 0.3)  # x1 == x2
        with pytest.raises(ValueError):
            BBox(0.3, 0.1, 0.2, 0.3)  # x1 > x2
        with pytest.raises(ValueError):
            BBox(0.1, 0.1, 1.2, 0.3)  # out of range

    def test_dims_positive(self):
        PixelDims(1, 1)
        with pytest.raises(ValueError):
            PixelDims(0, 10)


class TestContains:
    def test_center_inside(self):
        assert contains(Point(0.5, 0.5), BBox(0.4, 0.4, 0.6, 0.6))

    def test_boundary_excluded(self):
        # strict inequalities: a point exactly on the edge is not contained
        assert not contains(Point(0.4, 0.5), BBox(0.4, 0.4, 0.6, 0.6))

    def test_far_outside(self):
        assert not contains(Point(0.9, 0.9), BBox(0.4, 0.4, 0.6, 0.6))


class TestPointToBoxDistance:
    def test_interior_zero(self):
        assert point_to_box_distance(Point(0.5, 0.5), BBox(0.4, 0.4, 0.6, 0.6)) == 0.0

    def test_left_of_box(self):
        d = point_to_box_distance(Point(0.1, 0.5), BBox(0.3, 0.4, 0.6, 0.6))
        assert d == pytest.approx(0.2, abs=1e-15)

    def test_corner_distance(self):
        d = point_to_box_distance(Point(0.0, 0.0), BBox(0.3, 0.4, 0.6, 0.6))
        assert d == pytest.approx(0.5, abs=1e-15)

    def test_boundary_zero(self):
        b = BBox(0.4, 0.4, 0.6, 0.6)
        assert point_to_box_distance(Point(0.4, 0.5), b) == 0.0

    def test_contained_implies_zero_distance(self):
        rng = np.random.Generator(np.random.PCG64(11))
        for _ in range(2000):
            x1, x2 = sorted(rng.uniform(0, 1, 2))
            y1, y2 = sorted(rng.uniform(0, 1, 2))
            if x2 - x1 < 1e-6 or y2 - y1 < 1e-6:
                continue
            b = BBox(x1, y1, x2, y2)
            p = Point(float(rng.uniform(0, 1)), float(rng.uniform(0, 1)))
            d = point_to_box_distance(p, b)
            assert d >= 0.0
            if contains(p, b):
                assert d == 0.0

    def test_reflection_symmetry(self):
        rng = np.random.Generator(np.random.PCG64(12))
        for _ in range(500):
            x1, x2 = sorted(rng.uniform(0.01, 0.99, 2))
            y1, y2 = sorted(rng.uniform(0.01, 0.99, 2))
            if x2 - x1 < 1e-6 or y2 - y1 < 1e-6:
                continue
            p = Point(float(rng.uniform(0, 1)), float(rng.uniform(0, 1)))
            b = BBox(x1, y1, x2, y2)
            mirrored_p = Point(1.0 - p.x, p.y)
            mirrored_b = BBox(1.0 - x2, y1, 1.0 - x1, y2)
            assert point_to_box_distance(p, b) == pytest.approx(
                point_to_box_distance(mirrored_p, mirrored_b), abs=1e-12
            )

    def test_monotone_approach_along_axis(self):
        b = BBox(0.4, 0.4, 0.6, 0.6)
        xs = np.linspace(0.0, 0.5, 60)
        dists = [point_to_box_distance(Point(float(x), 0.2), b) for x in xs]
        assert all(d1 >= d2 - 1e-15 for d1, d2 in zip(dists, dists[1:]))


class TestPixelConversion:
    def test_center(self):
        assert to_pixels(Point(0.5, 0.5), PixelDims(1000, 800)) == (500, 400)

    def test_origin(self):
        assert to_pixels(Point(0.0, 0.0), PixelDims(123, 456)) == (0, 0)

    def test_fractional(self):
        assert to_pixels(Point(0.711, 0.23), PixelDims(1000, 800)) == (711, 184)

    def test_roundtrip_error_bound(self):
        dims = PixelDims(1000, 800)
        rng = np.random.Generator(np.random.PCG64(13))
        for _ in range(1000):
            p = Point(float(rng.uniform(0, 1)), float(rng.uniform(0, 1)))
            px, py = to_pixels(p, dims)
            q = from_pixels(px, py, dims)
            assert abs(q.x - p.x) <= 0.5 / dims.width + 1e-12
            assert abs(q.y - p.y) <= 0.5 / dims.height + 1e-12

    def test_pixel_index_clamps_far_edge(self):
        dims = PixelDims(100, 100)
        assert pixel_index(Point(1.0, 1.0), dims) == (99, 99)
        assert pixel_index(Point(0.0, 0.0), dims) == (0, 0)
        assert pixel_index(Point(0.5, 0.5), dims) == (50, 50)


class TestBoxGap:
    def test_overlapping_zero(self):
        assert box_to_box_gap(BBox(0.1, 0.1, 0.5, 0.5), BBox(0.4, 0.4, 0.6, 0.6)) == 0.0

    def test_horizontal_gap(self):
        g = box_to_box_gap(BBox(0.1, 0.1, 0.2, 0.2), BBox(0.5, 0.1, 0.6, 0.2))
        assert g == pytest.approx(0.3, abs=1e-15)

    def test_diagonal_gap(self):
        g = box_to_box_gap(BBox(0.1, 0.1, 0.2, 0.2), BBox(0.5, 0.6, 0.7, 0.8))
        assert g == pytest.approx(math.hypot(0.3, 0.4), abs=1e-15)
