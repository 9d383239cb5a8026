"""
Möbius maps of the Riemann sphere: classification, inversions in circles and
lines, composition of reflections, and the extension to upper half-space.

The extended plane is carried as P¹ pairs (z₁, z₂) with z = z₁/z₂; ∞ is (1, 0).
"""

import cmath
import enum
import logging
import math
from dataclasses import dataclass

import numpy as np

from config.constants import DET_TOL, INVOLUTION_TOL, TRACE_SQ_TOL
from utils.errors import DegenerateConfigurationError, GeometryError
from utils.projective_utils import ProjMap, ProjPoint, fixed_points

logger = logging.getLogger(__name__)

INF = complex("inf")


class MoebiusKind(str, enum.Enum):
    IDENTITY = "identity"
    PARABOLIC = "parabolic"
    ELLIPTIC = "elliptic"
    LOXODROMIC = "loxodromic"


@dataclass(frozen=True)
class Moebius:
    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if abs(det) < 1e-300:
            raise GeometryError("Möbius map has zero determinant")
        if abs(det - 1) > DET_TOL:
            s = cmath.sqrt(det)
            for name in "abcd":
                object.__setattr__(self, name, complex(getattr(self, name)) / s)
        else:
            for name in "abcd":
                object.__setattr__(self, name, complex(getattr(self, name)))

    @classmethod
    def from_matrix(cls, m):
        m = np.asarray(m.matrix if isinstance(m, ProjMap) else m, dtype=complex)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    @classmethod
    def identity(cls):
        return cls(1, 0, 0, 1)

    @property
    def matrix(self):
        return np.array([[self.a, self.b], [self.c, self.d]])

    @property
    def trace(self):
        return self.a + self.d

    def to_projmap(self):
        return ProjMap(self.matrix)

    def __matmul__(self, other):
        return Moebius.from_matrix(self.matrix @ other.matrix)

    def inverse(self):
        return Moebius(self.d, -self.b, -self.c, self.a)

    def __call__(self, z):
        return from_p1(self.matrix @ to_p1(z))

    def apply_array(self, zs):
        """Vectorized action on finite points; poles map to inf."""
        zs = np.asarray(zs, dtype=complex)
        den = self.c * zs + self.d
        with np.errstate(divide="ignore", invalid="ignore"):
            out = (self.a * zs + self.b) / den
        out[np.abs(den) == 0] = INF
        return out

    def conjugate_entries(self):
        return Moebius(self.a.conjugate(), self.b.conjugate(), self.c.conjugate(), self.d.conjugate())


@dataclass(frozen=True)
class AntiMoebius:
    """z ↦ m(z̄) when conjugate is set, else z ↦ m(z)."""

    moebius: Moebius
    conjugate: bool = True

    def __call__(self, z):
        if self.conjugate:
            z = z.conjugate() if not _is_inf(z) else z
        return self.moebius(z)

    def __matmul__(self, other):
        inner = other.moebius.conjugate_entries() if self.conjugate else other.moebius
        return AntiMoebius(self.moebius @ inner, self.conjugate != other.conjugate)

    @property
    def holomorphic(self):
        return not self.conjugate


def compose_anti(a, b):
    """a ∘ b for Möbius or anti-Möbius maps; the result is anti-holomorphic iff exactly one factor is."""
    a = a if isinstance(a, AntiMoebius) else AntiMoebius(a, False)
    b = b if isinstance(b, AntiMoebius) else AntiMoebius(b, False)
    return a @ b


def _is_inf(z):
    return isinstance(z, complex) and (math.isinf(z.real) or math.isinf(z.imag)) or z == INF


def to_p1(z):
    if _is_inf(complex(z)):
        return np.array([1.0, 0.0], dtype=complex)
    return np.array([complex(z), 1.0], dtype=complex)


def from_p1(v):
    z1, z2 = complex(v[0]), complex(v[1])
    if abs(z2) <= 1e-300 or abs(z2) < 1e-15 * abs(z1):
        return INF
    return z1 / z2


def classify(m):
    """Conjugacy class of a Möbius map from its trace."""
    if isinstance(m, ProjMap):
        m = Moebius.from_matrix(m)
    mat = m.matrix
    for sign in (1, -1):
        if np.max(np.abs(mat - sign * np.eye(2))) < TRACE_SQ_TOL:
            return MoebiusKind.IDENTITY
    tr2 = m.trace ** 2
    if abs(tr2 - 4) < TRACE_SQ_TOL:
        return MoebiusKind.PARABOLIC
    if abs(tr2.imag) < TRACE_SQ_TOL and -TRACE_SQ_TOL < tr2.real < 4:
        return MoebiusKind.ELLIPTIC
    return MoebiusKind.LOXODROMIC


def multiplier(m):
    """k such that m is conjugate to z ↦ k z with |k| ≥ 1; 1 for parabolic maps."""
    if classify(m) in (MoebiusKind.PARABOLIC, MoebiusKind.IDENTITY):
        return 1 + 0j
    lam = np.linalg.eigvals(m.matrix)
    lam = sorted(lam, key=abs)
    return complex(lam[1] / lam[0])


def moebius_fixed_points(m):
    """Fixed points of m on the extended plane (one for parabolic maps)."""
    result = fixed_points(m.to_projmap())
    return [from_p1(p.coords) for p in result.points]


def attracting_fixed_point(m):
    """Fixed point of the eigenvalue of largest modulus, as a P¹ point."""
    values, vectors = np.linalg.eig(m.matrix if isinstance(m, Moebius) else m)
    return ProjPoint(vectors[:, int(np.argmax(np.abs(values)))])


@dataclass(frozen=True)
class CircleOrLine:
    """A circle (center, radius) or a line {z : Re(conj(normal)·z) = offset}."""

    kind: str
    center: complex = 0j
    radius: float = 0.0
    normal: complex = 1j
    offset: float = 0.0

    def __post_init__(self):
        if self.kind == "circle":
            if not self.radius > 0:
                raise GeometryError(f"Circle radius must be positive, got {self.radius}")
        elif self.kind == "line":
            n = complex(self.normal)
            if abs(n) == 0:
                raise GeometryError("Line normal must be nonzero")
            object.__setattr__(self, "normal", n / abs(n))
            object.__setattr__(self, "offset", float(self.offset) / abs(n))
        else:
            raise GeometryError(f"Unknown CircleOrLine kind {self.kind!r}")

    @classmethod
    def circle(cls, center, radius):
        return cls("circle", center=complex(center), radius=float(radius))

    @classmethod
    def line(cls, normal, offset=0.0):
        return cls("line", normal=complex(normal), offset=float(offset))

    @classmethod
    def line_through(cls, z0, z1):
        direction = complex(z1) - complex(z0)
        if direction == 0:
            raise DegenerateConfigurationError("Coincident points do not determine a line")
        normal = 1j * direction / abs(direction)
        return cls.line(normal, (normal.conjugate() * complex(z0)).real)

    @property
    def is_circle(self):
        return self.kind == "circle"

    def inversion(self):
        """The reflection in this circle or line as an anti-Möbius map."""
        if self.is_circle:
            c, r = self.center, self.radius
            return AntiMoebius(Moebius(c, r * r - abs(c) ** 2, 1, -c.conjugate()), True)
        n, t = self.normal, self.offset
        return AntiMoebius(Moebius(-n * n, 2 * t * n, 0, 1), True)

    def contains(self, z):
        """Open disc interior, or the side the normal points into."""
        if _is_inf(z):
            return False
        if self.is_circle:
            return abs(complex(z) - self.center) < self.radius
        return (self.normal.conjugate() * complex(z)).real > self.offset

    def signed_distance(self, z):
        if self.is_circle:
            return abs(complex(z) - self.center) - self.radius
        return self.offset - (self.normal.conjugate() * complex(z)).real

    def sample(self, count, phase=0.0):
        """Points on the curve (lines sampled on a symmetric window)."""
        s = np.arange(count) / count
        if self.is_circle:
            return self.center + self.radius * np.exp(2j * np.pi * s + 1j * phase)
        foot = self.offset * self.normal
        direction = 1j * self.normal
        return foot + direction * np.tan(np.pi * (s - 0.5) * 0.98 + phase)

    def to_json(self):
        if self.is_circle:
            return {"kind": "circle", "center": [self.center.real, self.center.imag], "radius": self.radius}
        return {"kind": "line", "normal": [self.normal.real, self.normal.imag], "offset": self.offset}

    @classmethod
    def from_json(cls, data):
        if data["kind"] == "circle":
            return cls.circle(complex(*data["center"]), data["radius"])
        return cls.line(complex(*data["normal"]), data.get("offset", 0.0))


def invert(c, p):
    """Inversion of an extended-plane point in a circle or line."""
    return c.inversion()(p)


def invert_points(c, zs):
    """Vectorized inversion of finite points."""
    zs = np.asarray(zs, dtype=complex)
    if c.is_circle:
        with np.errstate(divide="ignore", invalid="ignore"):
            out = c.center + c.radius ** 2 / np.conj(zs - c.center)
        out[zs == c.center] = INF
        return out
    n, t = c.normal, c.offset
    return 2 * t * n - n * n * np.conj(zs)


@dataclass
class InversionComposition:
    map: Moebius
    kind: MoebiusKind
    rotation_angle: float = None
    rotation_center: complex = None
    translation: complex = None


def compose_inversions(c1, c2):
    """Reflect in c1, then in c2; the result is holomorphic."""
    composed = compose_anti(c2.inversion(), c1.inversion())
    assert composed.holomorphic
    m = composed.moebius
    kind = classify(m)
    report = InversionComposition(map=m, kind=kind)
    if not c1.is_circle and not c2.is_circle:
        cross = (c1.normal.conjugate() * c2.normal).imag
        if abs(cross) < TRACE_SQ_TOL:
            # parallel lines: translation by twice the gap along the normal
            report.translation = m(0j) if not _is_inf(m(0j)) else None
        else:
            center = _line_meet(c1, c2)
            report.rotation_center = center
            # line reflections compose to an affine map z ↦ k z + b
            report.rotation_angle = float(np.angle(m.a / m.d))
    return report


def _line_meet(l1, l2):
    a = np.array([[l1.normal.real, l1.normal.imag], [l2.normal.real, l2.normal.imag]])
    x, y = np.linalg.solve(a, np.array([l1.offset, l2.offset]))
    return complex(x, y)


def cross_ratio(z1, z2, z3, z4):
    return ((z1 - z3) * (z2 - z4)) / ((z1 - z4) * (z2 - z3))


def concircular(z1, z2, z3, z4, tol=1e-9):
    """Four finite points lie on one circle or line iff their cross-ratio is real."""
    cr = cross_ratio(z1, z2, z3, z4)
    return abs(cr.imag) < tol * max(1.0, abs(cr))


def circle_through(z1, z2, z3, tol=1e-12):
    """Circle (or line) through three distinct finite points."""
    w = (z3 - z1) / (z2 - z1)
    if abs(w.imag) < tol * max(1.0, abs(w)):
        return CircleOrLine.line_through(z1, z2)
    # circumcenter in complex form
    c = (z2 - z1) * (w - abs(w) ** 2) / (2j * w.imag) + z1
    return CircleOrLine.circle(c, abs(z1 - c))


def image_circle(m, circle):
    """Image of a circle or line under a Möbius map."""
    for phase in (0.1, 0.7, 1.9):
        pts = [m(z) for z in circle.sample(3, phase)]
        if not any(_is_inf(z) for z in pts):
            return circle_through(*pts)
    raise DegenerateConfigurationError("Could not sample finite image points of the circle")


@dataclass(frozen=True)
class Quaternion:
    x: float
    y: float
    t: float
    u: float = 0.0

    @classmethod
    def from_complex(cls, z):
        z = complex(z)
        return cls(z.real, z.imag, 0.0, 0.0)

    def __add__(self, o):
        return Quaternion(self.x + o.x, self.y + o.y, self.t + o.t, self.u + o.u)

    def __mul__(self, o):
        a1, b1, c1, d1 = self.x, self.y, self.t, self.u
        a2, b2, c2, d2 = o.x, o.y, o.t, o.u
        return Quaternion(
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        )

    def norm_sq(self):
        return self.x ** 2 + self.y ** 2 + self.t ** 2 + self.u ** 2

    def inverse(self):
        n = self.norm_sq()
        assert n > 0, "quaternion inverse of zero"
        return Quaternion(self.x / n, -self.y / n, -self.t / n, -self.u / n)

    @property
    def z(self):
        return complex(self.x, self.y)


def poincare_extend(m, w):
    """Action of m on upper half-space: (a w + b)(c w + d)^{-1}."""
    if not (w.t > 0 and abs(w.u) < INVOLUTION_TOL):
        raise GeometryError("Half-space points need t > 0 and u = 0")
    q = Quaternion.from_complex
    num = q(m.a) * w + q(m.b)
    den = q(m.c) * w + q(m.d)
    result = num * den.inverse()
    return Quaternion(result.x, result.y, result.t, 0.0)


def hyperbolic_distance_h3(w1, w2):
    """Distance in the half-space model."""
    delta = (w1.x - w2.x) ** 2 + (w1.y - w2.y) ** 2 + (w1.t - w2.t) ** 2
    return float(np.arccosh(1 + delta / (2 * w1.t * w2.t)))
