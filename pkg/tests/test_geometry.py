import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from loonmesh.geometry import (
    TWO_PI,
    CartesianPoint,
    DegenerateInput,
    Direction,
    PolarPosition,
    angular_direction,
    compute_convex_hull,
    cross,
    partition_sectors,
    sector_angle,
    to_cartesian,
)
from oracles import hull_oracle, inside_polygon


def pts(pairs):
    return {f"p{i}": CartesianPoint(x, y) for i, (x, y) in enumerate(pairs)}


def disk_points(rng, n, radius=1.0):
    out = {}
    for i in range(n):
        r = radius * math.sqrt(rng.random())
        a = rng.uniform(0, TWO_PI)
        out[f"p{i:02d}"] = CartesianPoint(r * math.cos(a), r * math.sin(a))
    return out


class TestPolar:
    @pytest.mark.parametrize("angle", [-0.5, 7.0, TWO_PI, -TWO_PI, 3 * TWO_PI + 1.0, -1e-300])
    def test_angle_normalized(self, angle):
        p = PolarPosition(1.0, angle)
        assert 0.0 <= p.angle < TWO_PI

    def test_rejects_negative_radius_and_altitude(self):
        with pytest.raises(ValueError):
            PolarPosition(-1.0, 0.0)
        with pytest.raises(ValueError):
            PolarPosition(1.0, 0.0, -0.1)

    def test_cartesian_rejects_nan(self):
        with pytest.raises(ValueError):
            CartesianPoint(float("nan"), 0.0)

    def test_to_cartesian_examples(self):
        assert to_cartesian(PolarPosition(0.0, 1.234)) == CartesianPoint(0.0, 0.0)
        assert to_cartesian(PolarPosition(1.0, 0.0)) == CartesianPoint(1.0, 0.0)
        q = to_cartesian(PolarPosition(2.0, math.pi / 2, altitude=20.0))
        assert q.x == pytest.approx(0.0, abs=1e-15)
        assert q.y == pytest.approx(2.0)

    @given(st.floats(0, 1e4), st.floats(-100, 100))
    def test_roundtrip_through_cartesian(self, r, a):
        p = PolarPosition(r, a)
        c = to_cartesian(p)
        assert math.hypot(c.x, c.y) == pytest.approx(r, rel=1e-12, abs=1e-9)


class TestHull:
    def test_square_with_center(self):
        h = compute_convex_hull(pts([(0, 0), (1, 0), (1, 1), (0, 1), (0.5, 0.5)]))
        assert h.vertex_set == {"p0", "p1", "p2", "p3"}
        assert h.centroid == CartesianPoint(0.5, 0.5)

    def test_triangle(self):
        h = compute_convex_hull(pts([(0, 0), (2, 0), (1, 3)]))
        assert h.vertex_set == {"p0", "p1", "p2"}

    def test_collinear_edge_point_excluded(self):
        h = compute_convex_hull(pts([(0, 0), (1, 0), (2, 0), (2, 2), (0, 2)]))
        assert "p1" not in h.vertex_set
        assert len(h.vertices) == 4

    def test_coincident_points_keep_smallest_id(self):
        p = {"b": CartesianPoint(0, 0), "a": CartesianPoint(0, 0), "c": CartesianPoint(4, 0), "d": CartesianPoint(0, 4)}
        h = compute_convex_hull(p)
        assert h.vertex_set == {"a", "c", "d"}
        assert h.vertex_set == hull_oracle({k: (v.x, v.y) for k, v in p.items()})
        with pytest.raises(DegenerateInput):
            compute_convex_hull({"a": CartesianPoint(1, 1), "b": CartesianPoint(1, 1), "c": CartesianPoint(2, 0)})

    @pytest.mark.parametrize("pairs", [[(0, 0), (1, 1)], [(0, 0), (1, 1), (2, 2), (3, 3)], []])
    def test_degenerate(self, pairs):
        with pytest.raises(DegenerateInput):
            compute_convex_hull(pts(pairs))

    def test_ten_points_match_oracle(self):
        rng = random.Random(10)
        p = disk_points(rng, 10)
        h = compute_convex_hull(p)
        assert h.vertex_set == hull_oracle({k: (v.x, v.y) for k, v in p.items()})

    def test_counterclockwise_strict(self):
        rng = random.Random(3)
        for _ in range(200):
            p = disk_points(rng, rng.randint(3, 50), radius=50)
            poly = compute_convex_hull(p).polygon
            n = len(poly)
            for i in range(n):
                assert cross(poly[i], poly[(i + 1) % n], poly[(i + 2) % n]) > 0

    def test_containment_1000_instances(self):
        rng = random.Random(7)
        for _ in range(1000):
            p = disk_points(rng, rng.randint(3, 50), radius=40)
            h = compute_convex_hull(p)
            poly = [(q.x, q.y) for q in h.polygon]
            for q in p.values():
                assert inside_polygon(poly, (q.x, q.y), 1e-9)
                assert h.contains(q)

    def test_oracle_equivalence_500_instances(self):
        rng = random.Random(11)
        for _ in range(500):
            p = disk_points(rng, rng.randint(3, 12))
            assert compute_convex_hull(p).vertex_set == hull_oracle({k: (v.x, v.y) for k, v in p.items()})

    def test_centroid_is_vertex_mean(self):
        h = compute_convex_hull(pts([(0, 0), (4, 0), (4, 2), (0, 2), (1, 1)]))
        assert h.centroid.x == pytest.approx(2.0)
        assert h.centroid.y == pytest.approx(1.0)

    def test_classify(self):
        h = compute_convex_hull(pts([(0, 0), (1, 0), (1, 1), (0, 1)]))
        assert h.classify(CartesianPoint(0.5, 0.5)) == "inside"
        assert h.classify(CartesianPoint(0.5, 0.0)) == "boundary"
        assert h.classify(CartesianPoint(1.0, 1.0)) == "boundary"
        assert h.classify(CartesianPoint(1.5, 0.5)) == "outside"

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.tuples(st.integers(-50, 50), st.integers(-50, 50)), min_size=3, max_size=25, unique=True))
    def test_lattice_points_match_oracle(self, pairs):
        # integer lattice stresses collinear boundaries
        p = pts([(float(x), float(y)) for x, y in pairs])
        expected = hull_oracle({k: (v.x, v.y) for k, v in p.items()})
        try:
            got = compute_convex_hull(p).vertex_set
        except DegenerateInput:
            q = list(p.values())
            assert all(cross(q[0], q[1], r) == 0 for r in q[2:])
            return
        assert got == expected


class TestSectorAngle:
    @pytest.mark.parametrize(
        "args,S",
        [((12, 3, 4, 3), 3), ((1, 0, 8, 3), 1), ((20, 9, 8, 3), 3), ((64, 3, 8, 3), 8), ((5, 10, 8, 3), 4)],
    )
    def test_examples(self, args, S):
        s, theta = sector_angle(*args)
        assert s == S
        assert theta == pytest.approx(TWO_PI / S)

    @given(st.integers(1, 500), st.integers(0, 100), st.integers(1, 20), st.integers(1, 20))
    def test_angle_covers_circle(self, n, h, t, hm):
        s, theta = sector_angle(n, h, t, hm)
        assert abs(s * theta - TWO_PI) < 1e-12
        assert s >= 1 and s * t >= n and s * hm >= h

    def test_invalid(self):
        with pytest.raises(ValueError):
            sector_angle(0, 0, 8, 3)


class TestPartition:
    def origin_hull(self):
        return compute_convex_hull(pts([(-1, -1), (1, -1), (1, 1), (-1, 1)]))

    def test_one_per_quadrant(self):
        h = self.origin_hull()
        nodes = {}
        for k, deg in enumerate([10, 100, 190, 280]):
            a = math.radians(deg)
            nodes[f"q{k}"] = CartesianPoint(0.5 * math.cos(a), 0.5 * math.sin(a))
        part = partition_sectors(nodes, h, 4)
        assert [part.sector_of(f"q{k}") for k in range(4)] == [0, 1, 2, 3]

    def test_boundary_angle_goes_up(self):
        part = partition_sectors({"b": CartesianPoint(0.0, 0.5)}, self.origin_hull(), 4)
        assert part.sector_of("b") == 1

    def test_centroid_node_in_sector_zero(self):
        part = partition_sectors({"c": CartesianPoint(0.0, 0.0)}, self.origin_hull(), 5)
        assert part.sector_of("c") == 0

    def test_twenty_random_nodes_totality(self):
        rng = random.Random(20)
        p = disk_points(rng, 20, radius=30)
        part = partition_sectors(p, compute_convex_hull(p), 6)
        sizes = [len(s.members) for s in part.sectors]
        assert sum(sizes) == 20
        seen = [m for s in part.sectors for m in s.members]
        assert sorted(seen) == sorted(p)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2**32), st.integers(3, 40), st.integers(1, 12))
    def test_partition_is_exact_cover(self, seed, n, S):
        rng = random.Random(seed)
        p = disk_points(rng, n, radius=30)
        try:
            h = compute_convex_hull(p)
        except DegenerateInput:
            return
        part = partition_sectors(p, h, S)
        assert abs(part.sector_count * part.sector_angle - TWO_PI) < 1e-12
        members = [m for s in part.sectors for m in s.members]
        assert len(members) == len(set(members)) == n
        for s in part.sectors:
            for m in s.members:
                dx, dy = p[m].x - h.centroid.x, p[m].y - h.centroid.y
                phi = math.atan2(dy, dx) % TWO_PI
                assert s.index * part.sector_angle - 1e-12 <= phi < (s.index + 1) * part.sector_angle + 1e-12


class TestDirection:
    @pytest.mark.parametrize(
        "src,dst,S,expected",
        [(1, 2, 6, Direction.CCW), (1, 5, 6, Direction.CW), (0, 2, 4, Direction.CCW), (3, 3, 6, Direction.NONE)],
    )
    def test_examples(self, src, dst, S, expected):
        assert angular_direction(src, dst, S) is expected

    @given(st.integers(1, 40).flatmap(lambda S: st.tuples(st.just(S), st.integers(0, S - 1), st.integers(0, S - 1))))
    def test_antisymmetry_and_optimality(self, t):
        S, a, b = t
        d = angular_direction(a, b, S)
        d_ccw, d_cw = (b - a) % S, (a - b) % S
        if a == b:
            assert d is Direction.NONE
            return
        chosen = d_ccw if d is Direction.CCW else d_cw
        other = d_cw if d is Direction.CCW else d_ccw
        assert chosen <= other
        if d_ccw != d_cw:
            back = angular_direction(b, a, S)
            assert {d, back} == {Direction.CW, Direction.CCW}

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            angular_direction(0, 6, 6)
