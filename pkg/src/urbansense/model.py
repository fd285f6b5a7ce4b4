"""Shared domain types: fixed-point geo positions, squares, identities, sim time.

Coordinates are stored as integers in units of 1e-7 degree so they survive
the 4-byte wire fields without loss. All geometry runs on exact integer
arithmetic; no floats are involved in containment decisions.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta, timezone

LAT_E7_MAX = 900_000_000
LON_E7_MAX = 1_800_000_000

# accuracy_dm sentinel: the receiver never obtained a position
NO_FIX = 0xFFFF


class GeometryError(ValueError):
    """Invalid geometry (bad polygon, out-of-range coordinate, missing fix)."""


@dataclass(frozen=True)
class GeoPosition:
    """A position in fixed-point 1e-7 degrees plus fix metadata.

    ``accuracy_dm`` is the horizontal accuracy in decimeters; ``NO_FIX``
    marks a position that was never obtained (lat/lon forced to zero).
    ``fix_time_s`` is seconds since the Unix epoch.
    """

    lat_e7: int
    lon_e7: int
    accuracy_dm: int = NO_FIX
    fix_time_s: int = 0

    def __post_init__(self):
        if not -LAT_E7_MAX <= self.lat_e7 <= LAT_E7_MAX:
            raise GeometryError(f"lat_e7 out of range: {self.lat_e7}")
        if not -LON_E7_MAX <= self.lon_e7 <= LON_E7_MAX:
            raise GeometryError(f"lon_e7 out of range: {self.lon_e7}")
        if not 0 <= self.accuracy_dm <= NO_FIX:
            raise GeometryError(f"accuracy_dm out of range: {self.accuracy_dm}")
        if self.fix_time_s < 0:
            raise GeometryError(f"fix_time_s negative: {self.fix_time_s}")
        if self.accuracy_dm == NO_FIX and (self.lat_e7 != 0 or self.lon_e7 != 0):
            raise GeometryError("no-fix position must have zero coordinates")

    @classmethod
    def from_degrees(cls, lat: float, lon: float, accuracy_dm: int = 0,
                     fix_time_s: int = 0) -> GeoPosition:
        return cls(round(lat * 1e7), round(lon * 1e7), accuracy_dm, fix_time_s)

    @classmethod
    def no_fix(cls) -> GeoPosition:
        return cls(0, 0, NO_FIX, 0)

    @property
    def has_fix(self) -> bool:
        return self.accuracy_dm != NO_FIX

    @property
    def lat(self) -> float:
        return self.lat_e7 / 1e7

    @property
    def lon(self) -> float:
        return self.lon_e7 / 1e7


@dataclass(frozen=True)
class NodeIdentity:
    """Device EUI (16 lowercase hex chars) plus a human label."""

    dev_eui: str
    label: str = ""

    def __post_init__(self):
        eui = self.dev_eui.lower()
        if len(eui) != 16 or any(c not in "0123456789abcdef" for c in eui):
            raise ValueError(f"dev_eui must be 16 hex chars: {self.dev_eui!r}")
        object.__setattr__(self, "dev_eui", eui)


@dataclass(frozen=True)
class SimTime:
    """Seconds from a fixed UTC calendar anchor.

    Everything downstream (weekday buckets, hour-of-day profiles) derives
    from this one anchor, so results are timezone-stable by construction.
    """

    t_s: int
    epoch_utc: datetime

    def __post_init__(self):
        if self.t_s < 0:
            raise ValueError("t_s must be non-negative")
        if self.epoch_utc.tzinfo is None or self.epoch_utc.utcoffset() != timedelta(0):
            raise ValueError("epoch_utc must be timezone-aware UTC")

    def utc(self) -> datetime:
        return self.epoch_utc + timedelta(seconds=self.t_s)

    def plus(self, seconds: int) -> SimTime:
        return SimTime(self.t_s + seconds, self.epoch_utc)

    @property
    def weekday(self) -> int:
        """0 = Monday ... 6 = Sunday."""
        return self.utc().weekday()

    @property
    def second_of_day(self) -> int:
        dt = self.utc()
        return dt.hour * 3600 + dt.minute * 60 + dt.second

    def unix_s(self) -> int:
        return int(self.utc().timestamp())


def _on_segment(ax, ay, bx, by, px, py) -> bool:
    cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
    if cross != 0:
        return False
    return min(ax, bx) <= px <= max(ax, bx) and min(ay, by) <= py <= max(ay, by)


def _orient(ax, ay, bx, by, cx, cy) -> int:
    v = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    return (v > 0) - (v < 0)


def _segments_intersect(p1, p2, p3, p4) -> bool:
    """Proper or improper intersection of segments p1p2 and p3p4."""
    o1 = _orient(*p1, *p2, *p3)
    o2 = _orient(*p1, *p2, *p4)
    o3 = _orient(*p3, *p4, *p1)
    o4 = _orient(*p3, *p4, *p2)
    if o1 != o2 and o3 != o4:
        return True
    if o1 == 0 and _on_segment(*p1, *p2, *p3):
        return True
    if o2 == 0 and _on_segment(*p1, *p2, *p4):
        return True
    if o3 == 0 and _on_segment(*p3, *p4, *p1):
        return True
    if o4 == 0 and _on_segment(*p3, *p4, *p2):
        return True
    return False


@dataclass(frozen=True)
class SquareDefinition:
    """A named public square bounded by a simple polygon of >= 3 vertices."""

    id: str
    name: str
    boundary: tuple[GeoPosition, ...]

    def __post_init__(self):
        object.__setattr__(self, "boundary", tuple(self.boundary))
        if not self.id:
            raise GeometryError("square id must be non-empty")
        verts = [(v.lon_e7, v.lat_e7) for v in self.boundary]
        _validate_simple_polygon(verts)

    def vertices_xy(self) -> list[tuple[int, int]]:
        return [(v.lon_e7, v.lat_e7) for v in self.boundary]


def _validate_simple_polygon(verts: list[tuple[int, int]]) -> None:
    n = len(verts)
    if n < 3:
        raise GeometryError(f"polygon needs >= 3 vertices, got {n}")
    if len(set(verts)) != n:
        raise GeometryError("polygon has repeated vertices")
    # twice the signed area; zero means all vertices collinear
    area2 = 0
    for i in range(n):
        x1, y1 = verts[i]
        x2, y2 = verts[(i + 1) % n]
        area2 += x1 * y2 - x2 * y1
    if area2 == 0:
        raise GeometryError("polygon vertices are collinear (zero area)")
    for i in range(n):
        a, b = verts[i], verts[(i + 1) % n]
        for j in range(i + 1, n):
            c, d = verts[j], verts[(j + 1) % n]
            adjacent = j == i + 1 or (i == 0 and j == n - 1)
            if adjacent:
                continue
            if _segments_intersect(a, b, c, d):
                raise GeometryError(
                    f"polygon is self-intersecting (edges {i} and {j})")


def point_in_square(p: GeoPosition, sq: SquareDefinition) -> bool:
    """Ray-casting containment with boundary points counted as inside.

    Exact integer arithmetic throughout; requires ``p`` to carry a fix.
    """
    if not p.has_fix:
        raise GeometryError("position has no fix")
    px, py = p.lon_e7, p.lat_e7
    verts = sq.vertices_xy()
    n = len(verts)
    for i in range(n):
        ax, ay = verts[i]
        bx, by = verts[(i + 1) % n]
        if _on_segment(ax, ay, bx, by, px, py):
            return True
    inside = False
    for i in range(n):
        ax, ay = verts[i]
        bx, by = verts[(i + 1) % n]
        if (ay > py) != (by > py):
            # p strictly left of edge, evaluated without division
            cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
            if (cross > 0) == (by > ay):
                inside = not inside
    return inside


def rfc3339(dt: datetime) -> str:
    """Canonical UTC timestamp string, second resolution, trailing Z."""
    if dt.tzinfo is None:
        raise ValueError("naive datetime")
    dt = dt.astimezone(timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%SZ")


def parse_rfc3339(text: str) -> datetime:
    dt = datetime.fromisoformat(text.replace("Z", "+00:00"))
    if dt.tzinfo is None:
        raise ValueError(f"timestamp lacks timezone: {text!r}")
    return dt.astimezone(timezone.utc)
