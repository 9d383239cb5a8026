"""
Exact Gaussian-rational arithmetic for projective incidence in P².

Scalars are elements of sympy's ``QQ_I`` domain; rationals are the special
case with zero imaginary part. Vectors are tuples of scalars.
"""

import logging
import re

import sympy
from sympy.polys.domains import QQ, QQ_I
from sympy.polys.matrices import DomainMatrix

from utils.errors import ConfigSchemaError, DegenerateConfigurationError

logger = logging.getLogger(__name__)

ZERO = QQ_I.zero
ONE = QQ_I.one

_BARE_I = re.compile(r"(?<![0-9./)])i")


def to_scalar(value):
    """Coerce an int, (num, den) pair, string or QQ_I element into QQ_I."""
    if isinstance(value, str):
        return parse_scalar(value)
    if isinstance(value, int):
        return QQ_I(value, 0)
    if isinstance(value, tuple) and len(value) == 2:
        return QQ_I(QQ(*value), 0)
    if isinstance(value, complex):
        raise ConfigSchemaError(f"Floating complex value {value!r} is not exact")
    try:
        return QQ_I.convert(value)
    except Exception as e:
        raise ConfigSchemaError(f"Cannot read {value!r} as an exact scalar: {e}")


def parse_scalar(text):
    """Parse "3/4", "-2", "1/2+3/4i", "i" or "1-i" into a Gaussian rational."""
    cleaned = text.strip().replace(" ", "")
    if not cleaned:
        raise ConfigSchemaError("Empty scalar string")
    cleaned = _BARE_I.sub("1i", cleaned).replace("i", "*I")
    try:
        expr = sympy.sympify(cleaned, rational=True)
        return QQ_I.from_sympy(sympy.expand(expr))
    except Exception as e:
        raise ConfigSchemaError(f"Cannot parse exact scalar {text!r}: {e}")


def _format_rational(q):
    num, den = int(QQ.numer(q)), int(QQ.denom(q))
    return str(num) if den == 1 else f"{num}/{den}"


def format_scalar(z):
    """Canonical string form: "num/den" for rationals, "a+bi" otherwise."""
    z = QQ_I.convert(z)
    re_part, im_part = z.x, z.y
    if im_part == QQ.zero:
        return _format_rational(re_part)
    im_text = _format_rational(abs(im_part))
    sign = "-" if im_part < QQ.zero else "+"
    if re_part == QQ.zero:
        return f"{'-' if sign == '-' else ''}{im_text}i"
    return f"{_format_rational(re_part)}{sign}{im_text}i"


def to_complex(z):
    z = QQ_I.convert(z)
    real = int(QQ.numer(z.x)) / int(QQ.denom(z.x))
    imag = int(QQ.numer(z.y)) / int(QQ.denom(z.y))
    return complex(real, imag)


def is_real(z):
    return QQ_I.convert(z).y == QQ.zero


def conj(z):
    z = QQ_I.convert(z)
    return QQ_I(z.x, -z.y)


def vector(values):
    return tuple(to_scalar(v) for v in values)


def is_zero_vector(v):
    return all(c == ZERO for c in v)


def normalize(v):
    """Projective representative whose first nonzero coordinate is 1."""
    for c in v:
        if c != ZERO:
            return tuple(x / c for x in v)
    raise DegenerateConfigurationError("Zero vector has no projective class")


def cross(u, v):
    """Cross product: the line through two points, or the meet of two lines."""
    return (
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    )


def dot(u, v):
    """Bilinear pairing (no conjugation); zero iff incidence."""
    total = ZERO
    for a, b in zip(u, v):
        total += a * b
    return total


def same_point(u, v):
    return is_zero_vector(cross(u, v))


def join(u, v):
    """Line through two distinct points of P²."""
    line = cross(u, v)
    if is_zero_vector(line):
        raise DegenerateConfigurationError("Points coincide; no unique line through them")
    return normalize(line)


def meet(l1, l2):
    """Intersection point of two distinct lines of P²."""
    point = cross(l1, l2)
    if is_zero_vector(point):
        raise DegenerateConfigurationError("Lines coincide; no unique intersection")
    return normalize(point)


def matrix(rows):
    rows = [[to_scalar(x) for x in row] for row in rows]
    return DomainMatrix(rows, (len(rows), len(rows[0])), QQ_I)


def entries(m):
    """Nested list of QQ_I entries of a DomainMatrix."""
    return [list(row) for row in m.rep.to_ddm()]


def from_columns(columns):
    n = len(columns)
    return DomainMatrix(
        [[columns[j][i] for j in range(n)] for i in range(len(columns[0]))],
        (len(columns[0]), n),
        QQ_I,
    )


def det(m):
    return m.det()


def det3(u, v, w):
    """Determinant of the 3×3 matrix with columns u, v, w."""
    return dot(u, cross(v, w))


def mat_vec(m, v):
    rows = entries(m)
    return tuple(dot(row, v) for row in rows)


def frame_map(points):
    """Matrix sending e₁, e₂, e₃ and e₁+e₂+e₃ to four points in general position."""
    if len(points) != 4:
        raise DegenerateConfigurationError("A projective frame needs four points")
    base = from_columns([tuple(p) for p in points[:3]])
    if base.det() == ZERO:
        raise DegenerateConfigurationError("Frame points are collinear")
    scales = mat_vec(base.inv(), tuple(points[3]))
    if any(s == ZERO for s in scales):
        raise DegenerateConfigurationError("Fourth frame point lies on a side of the frame triangle")
    cols = [tuple(s * c for c in p) for s, p in zip(scales, points[:3])]
    return from_columns(cols)


def map_from_correspondence(source, target):
    """Unique projective map of P² sending four source points to four target points."""
    forward = frame_map(target)
    backward = frame_map(source).inv()
    return forward.matmul(backward)


def is_scalar_matrix(m):
    rows = entries(m)
    diag = rows[0][0]
    if diag == ZERO:
        return False
    for i, row in enumerate(rows):
        for j, x in enumerate(row):
            if (i == j and x != diag) or (i != j and x != ZERO):
                return False
    return True


def projective_equal(m1, m2):
    """Exact equality of two matrices up to a nonzero scalar."""
    a, b = entries(m1), entries(m2)
    ratio = None
    for row_a, row_b in zip(a, b):
        for x, y in zip(row_a, row_b):
            if (x == ZERO) != (y == ZERO):
                return False
            if x == ZERO:
                continue
            r = y / x
            if ratio is None:
                ratio = r
            elif r != ratio:
                return False
    return ratio is not None


def dual_image(m, line):
    """Image of a line under m: l ↦ m^{-T} l."""
    inv_t = m.inv().transpose()
    return normalize(mat_vec(inv_t, line))


def format_vector(v):
    return [format_scalar(c) for c in v]


def vector_key(v):
    """Hashable canonical key of a projective class."""
    return tuple(format_scalar(c) for c in normalize(v))
