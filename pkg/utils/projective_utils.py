"""
Homogeneous-coordinate geometry of P^n (n ≤ 3): points, lines, maps,
the Fubini–Study metric and eigen-structure.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space

from config.constants import (
    CHART_DROP_TOL,
    EIGEN_RESIDUAL_TOL,
    PROJ_EQ_TOL,
)
from utils.errors import DegenerateConfigurationError, DimensionMismatchError, GeometryError

logger = logging.getLogger(__name__)

MAX_DIM = 3


def normalize_vector(v):
    """Unit-norm representative with the first nonzero coordinate positive real."""
    v = np.asarray(v, dtype=complex).ravel()
    norm = np.linalg.norm(v)
    if not np.isfinite(norm) or norm == 0:
        raise GeometryError("Zero or non-finite vector has no projective class")
    v = v / norm
    significant = np.flatnonzero(np.abs(v) > 1e-12)
    pivot = v[significant[0]]
    return v * (abs(pivot) / pivot)


def _phase_canonical(v):
    """Unit-norm representative with the first large coordinate positive real."""
    v = np.asarray(v, dtype=complex).ravel()
    v = v / np.linalg.norm(v)
    mags = np.abs(v)
    pivot = v[np.flatnonzero(mags > 0.5 * mags.max())[0]]
    return v * (abs(pivot) / pivot)


def _check_dim(n):
    if n < 1 or n > MAX_DIM:
        raise DimensionMismatchError(f"Only P^1..P^{MAX_DIM} are supported, got P^{n}")


@dataclass(frozen=True, eq=False)
class ProjPoint:
    coords: np.ndarray

    def __post_init__(self):
        coords = normalize_vector(self.coords)
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)
        _check_dim(self.dim)

    @property
    def dim(self):
        return len(self.coords) - 1

    def __repr__(self):
        inner = ":".join(f"{c:.4g}" for c in self.coords)
        return f"ProjPoint[{inner}]"

    def __eq__(self, other):
        if not isinstance(other, ProjPoint):
            return NotImplemented
        return self.dim == other.dim and fs_distance(self, other) < PROJ_EQ_TOL

    __hash__ = None

    def to_json(self):
        return [[float(c.real), float(c.imag)] for c in self.coords]


@dataclass(frozen=True, eq=False)
class ProjLine:
    """A line of P² (one linear form) or of P³ (two independent forms).

    forms has shape (n-1, n+1); rows are orthonormal so point-line distances
    reduce to the norm of forms @ p.
    """

    forms: np.ndarray

    def __post_init__(self):
        forms = np.atleast_2d(np.asarray(self.forms, dtype=complex))
        n = forms.shape[1] - 1
        if n not in (2, 3) or forms.shape[0] != n - 1:
            raise DimensionMismatchError(f"Lines need {n - 1} forms in P^{n}, got {forms.shape[0]}")
        if forms.shape[0] == 1:
            forms = normalize_vector(forms[0])[None, :]
        else:
            q, r = np.linalg.qr(forms.conj().T)
            if abs(r[-1, -1]) < 1e-12 * max(1.0, np.abs(r).max()):
                raise DegenerateConfigurationError("Dual forms of a P^3 line are dependent")
            forms = q.conj().T
        forms.setflags(write=False)
        object.__setattr__(self, "forms", forms)

    @property
    def dim(self):
        return self.forms.shape[1] - 1

    @property
    def dual_coords(self):
        return self.forms[0] if self.dim == 2 else self.forms

    def __repr__(self):
        if self.dim == 2:
            return "ProjLine[" + ":".join(f"{c:.4g}" for c in self.forms[0]) + "]"
        return f"ProjLine(P^3, forms={np.round(self.forms, 4).tolist()})"

    def __eq__(self, other):
        if not isinstance(other, ProjLine):
            return NotImplemented
        if self.dim != other.dim:
            return False
        a, b = self.forms, other.forms
        # equal spans: projector difference vanishes
        pa = a.conj().T @ a
        pb = b.conj().T @ b
        return np.linalg.norm(pa - pb) < PROJ_EQ_TOL

    __hash__ = None

    def spanning_points(self):
        basis = null_space(self.forms)
        return [ProjPoint(basis[:, k]) for k in range(basis.shape[1])]

    def to_json(self):
        return [[[float(c.real), float(c.imag)] for c in row] for row in self.forms]


@dataclass(frozen=True, eq=False)
class ProjMap:
    """An element of PSL(n+1, C), stored with determinant 1.

    ``exact`` optionally keeps a Gaussian-rational DomainMatrix alongside the
    floating matrix; equality then compares exactly.
    """

    matrix: np.ndarray
    exact: object = field(default=None, compare=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise GeometryError(f"Projective maps need a square matrix, got shape {m.shape}")
        _check_dim(m.shape[0] - 1)
        d = np.linalg.det(m)
        if abs(d) < 1e-300 or not np.isfinite(d):
            raise GeometryError("Singular matrix is not a projective map")
        m = m / _principal_root(d, m.shape[0])
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self):
        return self.matrix.shape[0] - 1

    @classmethod
    def identity(cls, n):
        return cls(np.eye(n + 1))

    @classmethod
    def diagonal(cls, values):
        return cls(np.diag(np.asarray(values, dtype=complex)))

    @classmethod
    def from_exact(cls, domain_matrix):
        from utils.exact_utils import entries, to_complex

        rows = [[to_complex(x) for x in row] for row in entries(domain_matrix)]
        return cls(np.array(rows), exact=domain_matrix)

    def __repr__(self):
        return f"ProjMap(P^{self.dim}, {np.round(self.matrix, 4).tolist()})"

    def __eq__(self, other):
        if not isinstance(other, ProjMap):
            return NotImplemented
        return maps_equal(self, other)

    __hash__ = None

    def __matmul__(self, other):
        return compose(self, other)

    def fingerprint(self):
        """Phase-canonical flattened matrix, comparable across root-of-unity scalings."""
        return _phase_canonical(self.matrix)

    def to_json(self):
        if self.exact is not None:
            from utils.exact_utils import entries, format_scalar

            return [[format_scalar(x) for x in row] for row in entries(self.exact)]
        return [[[float(c.real), float(c.imag)] for c in row] for row in self.matrix]


def _principal_root(d, k):
    """k-th root of d with argument in (−π/k, π/k]."""
    return abs(d) ** (1.0 / k) * np.exp(1j * np.angle(d) / k)


def _same_dim(*objs):
    dims = {o.dim for o in objs}
    if len(dims) != 1:
        raise DimensionMismatchError(f"Dimension mismatch: {sorted(dims)}")


def apply(m, p):
    """Image of a point under a projective map."""
    _same_dim(m, p)
    return ProjPoint(m.matrix @ p.coords)


def apply_to_line(m, line):
    """Image of a line: forms transform by the inverse transpose."""
    _same_dim(m, line)
    return ProjLine(line.forms @ np.linalg.inv(m.matrix))


def _unchecked(matrix, exact=None):
    """ProjMap from a product of determinant-1 factors, skipping renormalization.

    Deep words are too ill-conditioned for a numerically meaningful determinant.
    """
    m = object.__new__(ProjMap)
    matrix = np.array(matrix, dtype=complex)
    matrix.setflags(write=False)
    object.__setattr__(m, "matrix", matrix)
    object.__setattr__(m, "exact", exact)
    return m


def compose(m1, m2):
    """m1 ∘ m2."""
    _same_dim(m1, m2)
    exact = None
    if m1.exact is not None and m2.exact is not None:
        exact = m1.exact.matmul(m2.exact)
    return _unchecked(m1.matrix @ m2.matrix, exact)


def inverse(m):
    exact = m.exact.inv() if m.exact is not None else None
    return _unchecked(np.linalg.inv(m.matrix), exact)


def power(m, k):
    if k < 0:
        return power(inverse(m), -k)
    result = np.linalg.matrix_power(m.matrix, k)
    exact = None
    if m.exact is not None:
        exact = m.exact ** k
    return _unchecked(result, exact)


def maps_equal(m1, m2, tol=PROJ_EQ_TOL):
    """Equality up to an (n+1)-th root of unity (exactly, when both are exact)."""
    if m1.dim != m2.dim:
        return False
    if m1.exact is not None and m2.exact is not None:
        from utils.exact_utils import projective_equal

        return projective_equal(m1.exact, m2.exact)
    a, b = m1.matrix, m2.matrix
    scale = max(np.linalg.norm(a), np.linalg.norm(b))
    k = m1.dim + 1
    roots = np.exp(2j * np.pi * np.arange(k) / k)
    return min(np.linalg.norm(a - w * b) for w in roots) < tol * scale


def is_identity(m, tol=PROJ_EQ_TOL):
    return maps_equal(m, ProjMap.identity(m.dim), tol)


def fs_distance(p, q):
    """Fubini–Study distance arccos|⟨p,q⟩| in [0, π/2]."""
    _same_dim(p, q)
    overlap = np.vdot(q.coords, p.coords)
    # atan2 form keeps full precision near 0
    residual = np.linalg.norm(p.coords - overlap * q.coords)
    return float(np.arctan2(residual, abs(overlap)))


def fs_distance_array(points, q):
    """Vectorized distances from rows of a unit-normalized array to a unit vector q."""
    q = np.asarray(q, dtype=complex)
    overlap = points @ q.conj()
    residual = np.linalg.norm(points - overlap[:, None] * q[None, :], axis=1)
    return np.arctan2(residual, np.abs(overlap))


def point_line_distance(p, line):
    """arcsin of the norm of the forms evaluated at p; 0 iff incident."""
    _same_dim(p, line)
    value = np.linalg.norm(line.forms @ p.coords)
    return float(np.arcsin(np.clip(value, 0.0, 1.0)))


def line_contains(line, p, tol=PROJ_EQ_TOL):
    return point_line_distance(p, line) < tol


def line_through(p, q):
    """Line through two distinct points (P² or P³)."""
    _same_dim(p, q)
    if fs_distance(p, q) < PROJ_EQ_TOL:
        raise DegenerateConfigurationError("Coincident points do not determine a line")
    if p.dim == 2:
        return ProjLine(np.cross(p.coords, q.coords))
    if p.dim == 3:
        return ProjLine(null_space(np.vstack([p.coords, q.coords])).T)
    raise DimensionMismatchError("Lines are defined in P^2 and P^3 only")


def intersect_lines(l1, l2):
    """Meet of two distinct lines of P²."""
    _same_dim(l1, l2)
    if l1.dim != 2:
        raise DimensionMismatchError("intersect_lines is defined on P^2")
    point = np.cross(l1.forms[0], l2.forms[0])
    if np.linalg.norm(point) < PROJ_EQ_TOL:
        raise DegenerateConfigurationError("Coincident lines do not meet in a single point")
    return ProjPoint(point)


def lines_disjoint(l1, l2, tol=1e-9):
    """P³ lines are disjoint iff their four stacked forms have full rank."""
    stacked = np.vstack([l1.forms, l2.forms])
    sv = np.linalg.svd(stacked, compute_uv=False)
    return sv[-1] > tol


def sample_line(line, count, rng):
    """Random points on a line, uniform in the spanning-basis sphere."""
    basis = null_space(line.forms)
    coeffs = rng.normal(size=(count, 2)) + 1j * rng.normal(size=(count, 2))
    return [ProjPoint(basis @ c) for c in coeffs]


def line_grid(line, count):
    """Deterministic, roughly Fubini–Study-uniform sample of a line (Fibonacci sphere)."""
    basis = null_space(line.forms)
    i = np.arange(count) + 0.5
    theta = np.arccos(1 - 2 * i / count)
    phi = np.pi * (3 - np.sqrt(5)) * i
    coeffs = np.column_stack([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])
    return coeffs @ basis.T


def distance_to_lines(coords, lines):
    """fs distance from each row of a unit-normalized array to the nearest line."""
    coords = np.atleast_2d(coords)
    if not lines:
        return np.full(len(coords), np.pi / 2)
    values = np.stack([np.linalg.norm(coords @ line.forms.T, axis=1) for line in lines])
    return np.arcsin(np.clip(values.min(axis=0), 0.0, 1.0))


@dataclass
class FixedPointResult:
    points: list
    eigenvalues: np.ndarray
    defective: bool = False
    generalized: list = field(default_factory=list)

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)


def fixed_points(m):
    """Projectivized eigenvectors; defective maps are flagged with generalized vectors."""
    values, vectors = np.linalg.eig(m.matrix)
    points = []
    for k in range(vectors.shape[1]):
        candidate = ProjPoint(vectors[:, k])
        if all(fs_distance(candidate, q) > EIGEN_RESIDUAL_TOL for q in points):
            points.append(candidate)
    n1 = m.dim + 1
    residual = np.linalg.norm(m.matrix @ vectors - vectors * values) / max(1.0, np.linalg.norm(m.matrix))
    cond = np.linalg.cond(vectors)
    defective = len(points) < n1 or cond > 1.0 / EIGEN_RESIDUAL_TOL or residual > EIGEN_RESIDUAL_TOL
    generalized = []
    if defective:
        logger.debug("Defective eigen-structure (cond %.3g); collecting generalized vectors", cond)
        for lam in _cluster_values(values):
            shifted = np.linalg.matrix_power(m.matrix - lam * np.eye(n1), n1)
            basis = null_space(shifted, rcond=EIGEN_RESIDUAL_TOL)
            for k in range(basis.shape[1]):
                candidate = ProjPoint(basis[:, k])
                if all(fs_distance(candidate, q) > EIGEN_RESIDUAL_TOL for q in points + generalized):
                    generalized.append(candidate)
    return FixedPointResult(points=points, eigenvalues=values, defective=defective, generalized=generalized)


def _cluster_values(values, tol=1e-6):
    clusters = []
    for v in values:
        if all(abs(v - c) > tol * max(1.0, abs(c)) for c in clusters):
            clusters.append(v)
    return clusters


def to_chart(points, chart):
    """Affine coordinates in the chart z_chart = 1; near-infinite points are dropped."""
    arr = np.array([p.coords if isinstance(p, ProjPoint) else p for p in points], dtype=complex)
    if arr.size == 0:
        return np.zeros((0, 0), dtype=complex), 0
    arr = arr / np.linalg.norm(arr, axis=1, keepdims=True)
    denom = arr[:, chart]
    keep = np.abs(denom) >= CHART_DROP_TOL
    affine = np.delete(arr[keep] / denom[keep, None], chart, axis=1)
    return affine, int((~keep).sum())


def random_unitary(n, rng):
    """Haar-random (n+1)×(n+1) unitary via QR of a complex Gaussian matrix."""
    z = rng.normal(size=(n + 1, n + 1)) + 1j * rng.normal(size=(n + 1, n + 1))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_projmap(n, rng, spread=1.0):
    return ProjMap(np.eye(n + 1) + spread * (rng.normal(size=(n + 1, n + 1)) + 1j * rng.normal(size=(n + 1, n + 1))) / 2)


def point_from_json(data):
    arr = np.array([complex(re, im) for re, im in data])
    return ProjPoint(arr)


def line_from_json(data):
    rows = data if isinstance(data[0][0], list) else [data]
    return ProjLine(np.array([[complex(re, im) for re, im in row] for row in rows]))


def map_from_json(data):
    """Matrix from [[re, im], ...] rows, plain numbers, or exact strings."""
    first = data[0][0]
    if isinstance(first, str):
        from utils.exact_utils import matrix

        return ProjMap.from_exact(matrix(data))
    if isinstance(first, list):
        return ProjMap(np.array([[complex(re, im) for re, im in row] for row in data]))
    return ProjMap(np.array(data, dtype=complex))


def coordinate_point(n, k):
    """The coordinate point e_{k+1} of P^n."""
    v = np.zeros(n + 1, dtype=complex)
    v[k] = 1
    return ProjPoint(v)
