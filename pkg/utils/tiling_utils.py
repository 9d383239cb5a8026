"""
Triangle groups (p, q, r): classification into the three geometries, canonical
triangles, reflections in their sides and breadth-first tilings.

Euclidean and hyperbolic models are the complex plane and the unit disc;
the spherical model is the unit sphere in R³.
"""

import enum
import logging
import math
from dataclasses import dataclass

import numpy as np
from sympy import Rational
from tqdm import tqdm

from config.constants import DEDUP_GRID, MAX_TILES
from utils.errors import GeometryError, ResourceLimitError
from utils.moebius_utils import CircleOrLine, circle_through, invert_points
from utils.word_utils import FingerprintIndex

logger = logging.getLogger(__name__)


class Geometry(str, enum.Enum):
    EUCLIDEAN = "euclidean"
    SPHERICAL = "spherical"
    HYPERBOLIC = "hyperbolic"


@dataclass(frozen=True)
class TriangleSpec:
    p: int
    q: int
    r: int

    def __post_init__(self):
        for name in ("p", "q", "r"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 2:
                raise GeometryError(f"Triangle parameter {name} must be an integer ≥ 2, got {value!r}")

    @property
    def angles(self):
        return (math.pi / self.p, math.pi / self.q, math.pi / self.r)

    def __str__(self):
        return f"({self.p},{self.q},{self.r})"


def classify_spec(spec):
    """Compare 1/p + 1/q + 1/r with 1 in exact arithmetic."""
    total = Rational(1, spec.p) + Rational(1, spec.q) + Rational(1, spec.r)
    if total == 1:
        return Geometry.EUCLIDEAN
    if total > 1:
        return Geometry.SPHERICAL
    return Geometry.HYPERBOLIC


@dataclass
class GeodesicTriangle:
    geometry: Geometry
    vertices: np.ndarray
    depth: int = 0

    @property
    def sides(self):
        """Geodesics opposite vertices 0, 1, 2."""
        v = self.vertices
        return [side_through(self.geometry, v[(k + 1) % 3], v[(k + 2) % 3]) for k in range(3)]

    def to_json(self):
        if self.geometry == Geometry.SPHERICAL:
            verts = [[float(x) for x in row] for row in self.vertices]
        else:
            verts = [[float(z.real), float(z.imag)] for z in self.vertices]
        return {"geometry": self.geometry.value, "depth": self.depth, "vertices": verts}


def side_through(geometry, a, b):
    """Geodesic through two model points: a line, a circle, or a great-circle normal."""
    if geometry == Geometry.SPHERICAL:
        n = np.cross(a, b)
        return n / np.linalg.norm(n)
    if geometry == Geometry.EUCLIDEAN:
        return CircleOrLine.line_through(a, b)
    # hyperbolic: diameters are lines, everything else a circle orthogonal to |z| = 1
    if abs((np.conj(a) * b).imag) < 1e-12:
        return CircleOrLine.line_through(a, b) if abs(a - b) > 0 else None
    anchor = a if abs(a) > abs(b) else b
    return circle_through(complex(a), complex(b), complex(1 / np.conj(anchor)))


def build_triangle(spec):
    """Canonical triangle: vertex 0 at the origin (north pole), side 01 along the positive real axis."""
    alpha, beta, gamma = spec.angles
    geometry = classify_spec(spec)
    if geometry == Geometry.EUCLIDEAN:
        ac = math.sin(beta) / math.sin(gamma)
        verts = np.array([0j, 1 + 0j, ac * complex(math.cos(alpha), math.sin(alpha))])
    elif geometry == Geometry.HYPERBOLIC:
        cosh_c = (math.cos(gamma) + math.cos(alpha) * math.cos(beta)) / (math.sin(alpha) * math.sin(beta))
        cosh_b = (math.cos(beta) + math.cos(alpha) * math.cos(gamma)) / (math.sin(alpha) * math.sin(gamma))
        rb = math.tanh(math.acosh(cosh_c) / 2)
        rc = math.tanh(math.acosh(cosh_b) / 2)
        verts = np.array([0j, complex(rb, 0), rc * complex(math.cos(alpha), math.sin(alpha))])
    else:
        cos_c = (math.cos(gamma) + math.cos(alpha) * math.cos(beta)) / (math.sin(alpha) * math.sin(beta))
        cos_b = (math.cos(beta) + math.cos(alpha) * math.cos(gamma)) / (math.sin(alpha) * math.sin(gamma))
        c = math.acos(max(-1.0, min(1.0, cos_c)))
        b = math.acos(max(-1.0, min(1.0, cos_b)))
        verts = np.array(
            [
                [0.0, 0.0, 1.0],
                [math.sin(c), 0.0, math.cos(c)],
                [math.sin(b) * math.cos(alpha), math.sin(b) * math.sin(alpha), math.cos(b)],
            ]
        )
    return GeodesicTriangle(geometry, verts)


@dataclass(frozen=True)
class Reflection:
    """Reflection in a side: an anti-conformal inversion, or an O(3) matrix on the sphere."""

    geometry: Geometry
    mirror: object

    def apply(self, points):
        if self.geometry == Geometry.SPHERICAL:
            return np.asarray(points, dtype=float) @ self.matrix.T
        return invert_points(self.mirror, points)

    @property
    def matrix(self):
        if self.geometry != Geometry.SPHERICAL:
            raise GeometryError("Only spherical reflections are linear maps")
        return sphere_reflection(self.mirror)


def sphere_reflection(normal):
    n = np.asarray(normal, dtype=float)
    n = n / np.linalg.norm(n)
    return np.eye(3) - 2 * np.outer(n, n)


def reflection_generators(t):
    return [Reflection(t.geometry, side) for side in t.sides]


def _fingerprint(geometry, vertices):
    if geometry == Geometry.SPHERICAL:
        rows = [tuple(v) for v in np.asarray(vertices, dtype=float)]
    else:
        rows = [(z.real, z.imag) for z in np.asarray(vertices, dtype=complex)]
    rows.sort(key=lambda r: tuple(round(x, 5) for x in r))
    return np.array(rows).ravel()


def enumerate_tiles(t, depth, max_tiles=MAX_TILES, progress=False):
    """Orbit of a triangle under reflection words of length ≤ depth, deduplicated by vertex set."""
    if depth < 0:
        raise GeometryError("depth must be non-negative")
    gens = reflection_generators(t)
    index = FingerprintIndex(grid=DEDUP_GRID, limit=max_tiles)
    index.add(_fingerprint(t.geometry, t.vertices))
    tiles = [GeodesicTriangle(t.geometry, np.array(t.vertices), 0)]
    frontier = [tiles[0]]
    for level in tqdm(range(1, depth + 1), desc="tiles", disable=not progress):
        nxt = []
        for tile in frontier:
            for g in gens:
                verts = g.apply(tile.vertices)
                if t.geometry == Geometry.HYPERBOLIC and np.max(np.abs(verts)) >= 1:
                    continue
                try:
                    _, inserted = index.add(_fingerprint(t.geometry, verts))
                except ResourceLimitError:
                    logger.warning("tile index saturated at level %d", level)
                    raise
                if inserted:
                    child = GeodesicTriangle(t.geometry, verts, level)
                    tiles.append(child)
                    nxt.append(child)
        logger.debug("tiling level %d: %d new tiles", level, len(nxt))
        if not nxt:
            break
        frontier = nxt
    logger.info("enumerated %d tiles of %s geometry", len(tiles), t.geometry.value)
    return tiles


def _hyperbolic_tangent(a, b):
    side = side_through(Geometry.HYPERBOLIC, a, b)
    if not side.is_circle:
        return b - a
    t = 1j * (a - side.center)
    return t if (np.conj(t) * (b - a)).real > 0 else -t


def triangle_angles(t):
    """Measured interior angles at vertices 0, 1, 2."""
    v = t.vertices
    angles = []
    for k in range(3):
        a, b, c = v[k], v[(k + 1) % 3], v[(k + 2) % 3]
        if t.geometry == Geometry.SPHERICAL:
            tb = b - np.dot(a, b) * a
            tc = c - np.dot(a, c) * a
            cos = np.dot(tb, tc) / (np.linalg.norm(tb) * np.linalg.norm(tc))
            angles.append(float(np.arccos(np.clip(cos, -1, 1))))
            continue
        if t.geometry == Geometry.EUCLIDEAN:
            tb, tc = b - a, c - a
        else:
            tb, tc = _hyperbolic_tangent(a, b), _hyperbolic_tangent(a, c)
        angles.append(float(abs(np.angle(tc / tb))))
    return angles


def triangle_area(t):
    """Euclidean area, spherical solid angle, or hyperbolic defect."""
    v = t.vertices
    if t.geometry == Geometry.EUCLIDEAN:
        a, b, c = v
        return float(abs(((b - a).conjugate() * (c - a)).imag) / 2)
    if t.geometry == Geometry.SPHERICAL:
        a, b, c = v
        num = abs(np.dot(a, np.cross(b, c)))
        den = 1 + np.dot(a, b) + np.dot(b, c) + np.dot(c, a)
        return float(2 * np.arctan2(num, den))
    return float(math.pi - sum(triangle_angles(t)))


def _barycentric_inside(p, a, b, c, tol):
    m = np.array([[a.real - c.real, b.real - c.real], [a.imag - c.imag, b.imag - c.imag]])
    l1, l2 = np.linalg.solve(m, np.array([p.real - c.real, p.imag - c.imag]))
    return min(l1, l2, 1 - l1 - l2) > tol


def to_klein(z):
    """Poincaré disc to Klein disc; geodesics become chords."""
    z = np.asarray(z, dtype=complex)
    return 2 * z / (1 + np.abs(z) ** 2)


def tile_contains(tile, point, tol=1e-7):
    """Strict interior membership (boundary within tol is excluded)."""
    v = tile.vertices
    if tile.geometry == Geometry.SPHERICAL:
        point = np.asarray(point, dtype=float)
        signs = []
        for k in range(3):
            n = np.cross(v[(k + 1) % 3], v[(k + 2) % 3])
            signs.append(np.dot(n, point) * np.dot(n, v[k]))
        return min(signs) > tol
    if tile.geometry == Geometry.HYPERBOLIC:
        v = to_klein(v)
        point = complex(to_klein(np.array([point]))[0])
    return _barycentric_inside(complex(point), v[0], v[1], v[2], tol)


def tile_centroid(tile):
    v = tile.vertices
    if tile.geometry == Geometry.SPHERICAL:
        c = v.sum(axis=0)
        return c / np.linalg.norm(c)
    if tile.geometry == Geometry.HYPERBOLIC:
        k = to_klein(v).mean()
        # Klein to Poincaré
        return k / (1 + math.sqrt(max(0.0, 1 - abs(k) ** 2)))
    return v.mean()


def _slerp(a, b, s):
    omega = math.acos(max(-1.0, min(1.0, float(np.dot(a, b)))))
    if omega < 1e-12:
        return np.tile(a, (len(s), 1))
    return (np.sin((1 - s) * omega)[:, None] * a + np.sin(s * omega)[:, None] * b) / math.sin(omega)


def _arc_points(geometry, a, b, s):
    if geometry == Geometry.EUCLIDEAN:
        return a + (b - a) * s
    side = side_through(geometry, a, b)
    if not side.is_circle:
        return a + (b - a) * s
    c = side.center
    t0, t1 = np.angle(a - c), np.angle(b - c)
    dt = (t1 - t0 + np.pi) % (2 * np.pi) - np.pi
    return c + side.radius * np.exp(1j * (t0 + dt * s))


def tiles_to_polygons(tiles, samples_per_side=8):
    """Closed boundary polylines in the plane (spherical tiles via stereographic projection)."""
    s = np.linspace(0.0, 1.0, samples_per_side, endpoint=False)
    polygons = []
    for tile in tiles:
        v = tile.vertices
        parts = []
        for k in range(3):
            a, b = v[k], v[(k + 1) % 3]
            if tile.geometry == Geometry.SPHERICAL:
                pts = _slerp(a, b, s)
                den = 1 + pts[:, 2]
                if np.any(den < 1e-9):
                    parts = None
                    break
                parts.append((pts[:, 0] + 1j * pts[:, 1]) / den)
            else:
                parts.append(_arc_points(tile.geometry, a, b, s))
        if parts is not None:
            polygons.append(np.concatenate(parts))
    return polygons
