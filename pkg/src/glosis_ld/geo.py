"""WKT points and polygons with the simple-features intersects predicate.

Coordinates are planar (lon, lat) pairs in CRS84 axis order; no geodesic
correction is applied.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Union

TOLERANCE = 1e-9

Coord = tuple[float, float]


class WKTError(ValueError):
    """Raised for WKT text that is not a supported 2-D POINT or POLYGON."""


@dataclass(frozen=True)
class Point:
    lon: float
    lat: float

    def wkt(self) -> str:
        return f"POINT({_num(self.lon)} {_num(self.lat)})"


@dataclass(frozen=True)
class Polygon:
    outer: tuple[Coord, ...]
    inner: tuple[tuple[Coord, ...], ...] = ()

    def __post_init__(self) -> None:
        for ring in (self.outer, *self.inner):
            _check_ring(ring)

    def rings(self) -> tuple[tuple[Coord, ...], ...]:
        return (self.outer, *self.inner)

    def vertices(self) -> list[Coord]:
        return [c for ring in self.rings() for c in ring]

    def edges(self) -> Iterable[tuple[Coord, Coord]]:
        for ring in self.rings():
            for i in range(len(ring) - 1):
                yield ring[i], ring[i + 1]

    def wkt(self) -> str:
        body = ", ".join("(" + ", ".join(f"{_num(x)} {_num(y)}" for x, y in ring) + ")" for ring in self.rings())
        return f"POLYGON({body})"


Geometry = Union[Point, Polygon]


@dataclass(frozen=True)
class BBox:
    min_lon: float
    min_lat: float
    max_lon: float
    max_lat: float

    def __post_init__(self) -> None:
        if self.min_lon > self.max_lon or self.min_lat > self.max_lat:
            raise ValueError(f"inverted bounding box {self}")

    def intersects(self, other: BBox) -> bool:
        return not (
            other.min_lon > self.max_lon + TOLERANCE
            or other.max_lon < self.min_lon - TOLERANCE
            or other.min_lat > self.max_lat + TOLERANCE
            or other.max_lat < self.min_lat - TOLERANCE
        )

    def contains(self, lon: float, lat: float) -> bool:
        return self.min_lon <= lon <= self.max_lon and self.min_lat <= lat <= self.max_lat


def _num(v: float) -> str:
    return repr(float(v)).removesuffix(".0") if float(v).is_integer() else repr(float(v))


def _check_ring(ring: tuple[Coord, ...]) -> None:
    if len(ring) < 4:
        raise WKTError(f"ring needs at least 4 vertices, got {len(ring)}")
    if ring[0] != ring[-1]:
        raise WKTError("ring is not closed (first vertex differs from last)")


# -- parsing -----------------------------------------------------------------

_NUMBER = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_HEAD = re.compile(r"^\s*([A-Za-z]+)\s*(.*?)\s*$", re.S)
_COORD = re.compile(rf"^\s*({_NUMBER})\s+({_NUMBER})\s*$")
_CRS_PREFIX = re.compile(r"^\s*<[^>]*>\s*")


def _coords(text: str) -> tuple[Coord, ...]:
    out = []
    for chunk in text.split(","):
        m = _COORD.match(chunk)
        if not m:
            if len(chunk.split()) > 2:
                raise WKTError(f"only 2-D coordinates are supported: {chunk.strip()!r}")
            raise WKTError(f"malformed coordinate {chunk.strip()!r}")
        x, y = float(m.group(1)), float(m.group(2))
        if not (math.isfinite(x) and math.isfinite(y)):
            raise WKTError(f"non-finite coordinate {chunk.strip()!r}")
        out.append((x, y))
    return tuple(out)


def _strip_parens(body: str, what: str) -> str:
    if not (body.startswith("(") and body.endswith(")")):
        raise WKTError(f"{what} body must be parenthesised: {body!r}")
    return body[1:-1].strip()


def parse_wkt(text: str, validate_range: bool = False) -> Geometry:
    """Parse a 2-D ``POINT`` or ``POLYGON``; a leading ``<crs>`` IRI is ignored.

    >>> parse_wkt("POINT (107.67 35.22)")
    Point(lon=107.67, lat=35.22)
    """
    text = _CRS_PREFIX.sub("", text)
    m = _HEAD.match(text)
    if not m:
        raise WKTError(f"not WKT: {text!r}")
    kind, body = m.group(1).upper(), m.group(2)
    if kind == "POINT":
        inner = _strip_parens(body, "POINT")
        if "(" in inner or ")" in inner:
            raise WKTError(f"malformed POINT {text!r}")
        coords = _coords(inner)
        if len(coords) != 1:
            raise WKTError(f"POINT takes exactly one coordinate: {text!r}")
        geom: Geometry = Point(*coords[0])
    elif kind == "POLYGON":
        inner = _strip_parens(body, "POLYGON")
        rings = re.findall(r"\(([^()]*)\)", inner)
        leftover = re.sub(r"\([^()]*\)", "", inner).replace(",", "").strip()
        if not rings or leftover:
            raise WKTError(f"malformed POLYGON ring list: {text!r}")
        parsed = [_coords(r) for r in rings]
        geom = Polygon(parsed[0], tuple(parsed[1:]))
    else:
        raise WKTError(f"unsupported geometry type {kind}")
    if validate_range:
        _check_range(geom)
    return geom


def _check_range(geom: Geometry) -> None:
    coords = [(geom.lon, geom.lat)] if isinstance(geom, Point) else geom.vertices()
    for lon, lat in coords:
        if not (-180 <= lon <= 180 and -90 <= lat <= 90):
            raise WKTError(f"coordinate out of range: ({lon}, {lat})")


# -- predicates --------------------------------------------------------------

def bbox(geom: Geometry) -> BBox:
    if isinstance(geom, Point):
        return BBox(geom.lon, geom.lat, geom.lon, geom.lat)
    xs = [x for x, _ in geom.outer]
    ys = [y for _, y in geom.outer]
    return BBox(min(xs), min(ys), max(xs), max(ys))


def _on_segment(p: Coord, a: Coord, b: Coord) -> bool:
    (px, py), (ax, ay), (bx, by) = p, a, b
    cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
    length = math.hypot(bx - ax, by - ay)
    if abs(cross) > TOLERANCE * max(length, 1.0):
        return False
    return (min(ax, bx) - TOLERANCE <= px <= max(ax, bx) + TOLERANCE
            and min(ay, by) - TOLERANCE <= py <= max(ay, by) + TOLERANCE)


def _even_odd(p: Coord, ring: tuple[Coord, ...]) -> bool:
    x, y = p
    inside = False
    for (x1, y1), (x2, y2) in zip(ring, ring[1:]):
        if (y1 > y) != (y2 > y):
            xcross = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x < xcross:
                inside = not inside
    return inside


def point_in_polygon(p: Coord, poly: Polygon) -> bool:
    """Even-odd containment over all rings; points on any edge count as inside."""
    if any(_on_segment(p, a, b) for a, b in poly.edges()):
        return True
    crossings = sum(_even_odd(p, ring) for ring in poly.rings())
    return crossings % 2 == 1


def _orient(a: Coord, b: Coord, c: Coord) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def segments_intersect(a: Coord, b: Coord, c: Coord, d: Coord) -> bool:
    d1, d2 = _orient(c, d, a), _orient(c, d, b)
    d3, d4 = _orient(a, b, c), _orient(a, b, d)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and ((d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)):
        return True
    return _on_segment(a, c, d) or _on_segment(b, c, d) or _on_segment(c, a, b) or _on_segment(d, a, b)


def sf_intersects(a: Geometry, b: Geometry) -> bool:
    """True when the two geometries share at least one point (boundaries included)."""
    if not bbox(a).intersects(bbox(b)):
        return False
    if isinstance(a, Point) and isinstance(b, Point):
        return abs(a.lon - b.lon) <= TOLERANCE and abs(a.lat - b.lat) <= TOLERANCE
    if isinstance(a, Point):
        return point_in_polygon((a.lon, a.lat), b)
    if isinstance(b, Point):
        return point_in_polygon((b.lon, b.lat), a)
    for e1 in a.edges():
        for e2 in b.edges():
            if segments_intersect(*e1, *e2):
                return True
    return point_in_polygon(a.outer[0], b) or point_in_polygon(b.outer[0], a)
