import random

import pytest

from urbansense.model import (NO_FIX, GeoPosition, GeometryError, NodeIdentity,
                              SimTime, SquareDefinition, parse_rfc3339,
                              point_in_square, rfc3339)


def square(coords, sid="T"):
    return SquareDefinition(sid, "test", tuple(
        GeoPosition(lat, lon, accuracy_dm=0) for lat, lon in coords))


UNIT = square([(0, 0), (0, 10_000_000), (10_000_000, 10_000_000),
               (10_000_000, 0)])
# concave "arrowhead" polygon for the oracle comparison
CONCAVE = square([(0, 0), (0, 12_000_000), (6_000_000, 4_000_000),
                  (12_000_000, 12_000_000), (12_000_000, 0)])


def winding_number(p, sq):
    """Independent containment oracle (winding number, exact integers)."""
    px, py = p.lon_e7, p.lat_e7
    verts = sq.vertices_xy()
    n = len(verts)

    def is_left(a, b):
        return (b[0] - a[0]) * (py - a[1]) - (px - a[0]) * (b[1] - a[1])

    for i in range(n):
        ax, ay = verts[i]
        bx, by = verts[(i + 1) % n]
        cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
        if cross == 0 and min(ax, bx) <= px <= max(ax, bx) \
                and min(ay, by) <= py <= max(ay, by):
            return True
    wn = 0
    for i in range(n):
        a = verts[i]
        b = verts[(i + 1) % n]
        if a[1] <= py:
            if b[1] > py and is_left(a, b) > 0:
                wn += 1
        elif b[1] <= py and is_left(a, b) < 0:
            wn -= 1
    return wn != 0


class TestGeoPosition:
    def test_valid_ranges(self):
        GeoPosition(900_000_000, -1_800_000_000, 0, 0)
        with pytest.raises(GeometryError):
            GeoPosition(900_000_001, 0, 0, 0)
        with pytest.raises(GeometryError):
            GeoPosition(0, -1_800_000_001, 0, 0)

    def test_no_fix_forces_zero_coords(self):
        assert not GeoPosition.no_fix().has_fix
        with pytest.raises(GeometryError):
            GeoPosition(1, 0, NO_FIX, 0)

    def test_degrees_round_trip(self):
        p = GeoPosition.from_degrees(47.3661230, 8.5517310)
        assert (p.lat_e7, p.lon_e7) == (473661230, 85517310)
        assert p.lat == pytest.approx(47.3661230)


class TestNodeIdentity:
    def test_normalizes_case(self):
        assert NodeIdentity("70B3D57ED0000001").dev_eui == "70b3d57ed0000001"

    def test_rejects_bad_eui(self):
        with pytest.raises(ValueError):
            NodeIdentity("xyz")


class TestSimTime:
    def test_weekday_and_seconds(self):
        epoch = parse_rfc3339("2022-06-06T00:00:00Z")  # Monday
        t = SimTime(0, epoch)
        assert t.weekday == 0
        later = t.plus(6 * 86400 + 3600)
        assert later.weekday == 6
        assert later.second_of_day == 3600

    def test_requires_utc(self):
        with pytest.raises(ValueError):
            SimTime(0, parse_rfc3339("2022-06-06T00:00:00Z").replace(tzinfo=None))


class TestPolygonValidation:
    def test_too_few_vertices(self):
        with pytest.raises(GeometryError):
            square([(0, 0), (0, 1_000_000)])

    def test_collinear(self):
        with pytest.raises(GeometryError):
            square([(0, 0), (0, 1_000_000), (0, 2_000_000)])

    def test_self_intersecting(self):
        with pytest.raises(GeometryError):
            square([(0, 0), (10_000_000, 10_000_000),
                    (10_000_000, 0), (0, 10_000_000)])


class TestPointInSquare:
    def test_centroid_inside(self):
        assert point_in_square(GeoPosition(5_000_000, 5_000_000, 0), UNIT)

    def test_far_outside(self):
        assert not point_in_square(GeoPosition(15_000_000, 5_000_000, 0), UNIT)

    def test_vertex_counts_as_inside(self):
        p = GeoPosition(0, 0, 0)
        assert point_in_square(p, UNIT)
        assert winding_number(p, UNIT)

    def test_edge_counts_as_inside(self):
        assert point_in_square(GeoPosition(0, 5_000_000, 0), UNIT)

    def test_requires_fix(self):
        with pytest.raises(GeometryError):
            point_in_square(GeoPosition.no_fix(), UNIT)

    def test_concave_notch_outside(self):
        # in the notch (high lon, mid lat): outside the arrowhead
        assert not point_in_square(GeoPosition(6_000_000, 10_000_000, 0), CONCAVE)
        assert point_in_square(GeoPosition(2_000_000, 3_000_000, 0), CONCAVE)

    @pytest.mark.parametrize("poly", [UNIT, CONCAVE])
    def test_matches_winding_oracle_on_random_points(self, poly):
        rng = random.Random(1234)
        for _ in range(1000):
            p = GeoPosition(rng.randint(-2_000_000, 14_000_000),
                            rng.randint(-2_000_000, 14_000_000), 0)
            assert point_in_square(p, poly) == winding_number(p, poly)

    def test_invariant_under_vertex_rotation(self):
        rng = random.Random(99)
        coords = [(0, 0), (0, 12_000_000), (6_000_000, 4_000_000),
                  (12_000_000, 12_000_000), (12_000_000, 0)]
        rotations = [square(coords[i:] + coords[:i], sid=f"r{i}")
                     for i in range(len(coords))]
        for _ in range(300):
            p = GeoPosition(rng.randint(-1_000_000, 13_000_000),
                            rng.randint(-1_000_000, 13_000_000), 0)
            results = {point_in_square(p, sq) for sq in rotations}
            assert len(results) == 1


class TestTimestamps:
    def test_rfc3339_round_trip(self):
        ts = parse_rfc3339("2022-06-06T12:34:56Z")
        assert rfc3339(ts) == "2022-06-06T12:34:56Z"

    def test_rejects_naive(self):
        with pytest.raises(ValueError):
            parse_rfc3339("2022-06-06T12:34:56")
