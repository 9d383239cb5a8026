"""
Kulkarni limit sets of groups acting on P^n.

Two views of the same object: closed forms for the families where the limit
set is known (diagonal cyclic groups, translations, suspensions, toral and
Inoue groups), and numerical L0/L1/L2 layers for any finitely generated
group, approximated from truncated orbits.
"""

import logging
import math
from dataclasses import dataclass, field
from itertools import combinations, product

import numpy as np
from scipy.linalg import null_space

from config.constants import (
    CLUSTER_EPS,
    CLUSTER_K,
    INCIDENCE_TOL,
    L0_ORDER_PROBE,
    L1_OFFSET,
    M_MAX,
    MAX_EXACT_LINES,
    MAX_WORDS,
)
from utils.cluster_utils import (
    PointCloud,
    cluster_mask,
    directed_distances,
    embed,
    embed_planes,
    normalize_rows,
    thin,
)
from utils.errors import (
    DegenerateConfigurationError,
    DimensionMismatchError,
    ResourceLimitError,
    UnsupportedCaseError,
)
from utils.moebius_utils import MoebiusKind, classify
from utils.projective_utils import (
    ProjLine,
    ProjMap,
    ProjPoint,
    _cluster_values,
    coordinate_point,
    distance_to_lines,
    fixed_points,
    fs_distance_array,
    line_grid,
    line_through,
    power,
)
from utils.word_utils import GeneratorSet, WordTree, enumerate_group, order_probe

logger = logging.getLogger(__name__)

LAYERS = ("L0", "L1", "L2")
INFINITE = math.inf

__all__ = [
    "ClosedFormLimitSet",
    "KulkarniParams",
    "LimitSetApprox",
    "OmegaDescriptor",
    "approx_kulkarni",
    "closed_form_cyclic_diag",
    "closed_form_toral",
    "closed_form_translation",
    "count_lines",
    "cross_check",
    "cyclic_regions",
    "describe_shape",
    "discontinuity_return_count",
    "enumerate_group",
    "hausdorff_to_closed_form",
    "inoue_family",
    "suspension",
    "toral_family",
]


# Closed-form limit sets


def _check_tags(tags):
    tags = set(tags)
    if not tags or not tags <= set(LAYERS):
        raise DegenerateConfigurationError(f"Layer tags must be a nonempty subset of {LAYERS}", tags=sorted(tags))
    return tags


@dataclass
class ClosedFormLimitSet:
    """Finite union of points and lines, each tagged with the layers it belongs to.

    ``parametrized`` marks sets whose lines come from an infinite family (only a
    sample is stored); ``partial`` marks sets whose construction lacked input.
    """

    dim: int = 2
    points: list = field(default_factory=list)
    lines: list = field(default_factory=list)
    point_tags: list = field(default_factory=list)
    line_tags: list = field(default_factory=list)
    parametrized: bool = False
    partial: bool = False
    description: str = ""

    def __post_init__(self):
        if len(self.point_tags) != len(self.points) or len(self.line_tags) != len(self.lines):
            raise DegenerateConfigurationError("Every element of a closed-form set needs tags")
        self.point_tags = [_check_tags(t) for t in self.point_tags]
        self.line_tags = [_check_tags(t) for t in self.line_tags]
        for a, b in combinations(self.points, 2):
            if a == b:
                raise DegenerateConfigurationError("Duplicate point in closed-form set", point=a.to_json())
        for a, b in combinations(self.lines, 2):
            if a == b:
                raise DegenerateConfigurationError("Duplicate line in closed-form set", line=a.to_json())

    def add_line(self, line, tags):
        if any(line == other for other in self.lines):
            return False
        self.lines.append(line)
        self.line_tags.append(_check_tags(tags))
        return True

    def is_empty(self):
        return not self.points and not self.lines

    def sample(self, per_line=2000):
        """Points of the set as rows: the marked points plus a grid on every line."""
        parts = [np.array([p.coords for p in self.points])] if self.points else []
        parts += [line_grid(line, per_line) for line in self.lines]
        if not parts:
            return np.zeros((0, self.dim + 1), dtype=complex)
        return normalize_rows(np.vstack(parts))

    def distance(self, coords):
        """fs distance from rows to the set (analytic on lines)."""
        coords = normalize_rows(coords)
        best = distance_to_lines(coords, self.lines)
        for p in self.points:
            best = np.minimum(best, fs_distance_array(coords, p.coords))
        return best

    def to_json(self):
        lin, ling = count_lines(self) if len(self.lines) <= MAX_EXACT_LINES else (None, None)
        return {
            "dim": self.dim,
            "points": [{"coords": p.to_json(), "tags": sorted(t)} for p, t in zip(self.points, self.point_tags)],
            "lines": [{"forms": l.to_json(), "tags": sorted(t)} for l, t in zip(self.lines, self.line_tags)],
            "parametrized": self.parametrized,
            "partial": self.partial,
            "description": self.description,
            "shape": describe_shape(self),
            "lin": _count_json(lin),
            "ling": _count_json(ling),
        }


def _count_json(value):
    if value is None:
        return None
    return "inf" if value == INFINITE else int(value)


def _coordinate_points(n=2):
    return [coordinate_point(n, k) for k in range(n + 1)]


def closed_form_cyclic_diag(eigs):
    """Limit set of ⟨diag(λ₁, λ₂, λ₃)⟩ with three distinct moduli.

    The three coordinate points form L0 = L1; L2 adds the two invariant lines
    through the point of middle modulus.
    """
    eigs = np.asarray(eigs, dtype=complex).ravel()
    if eigs.size != 3:
        raise DimensionMismatchError(f"A diagonal map of P^2 has 3 eigenvalues, got {eigs.size}")
    if np.any(np.abs(eigs) == 0):
        raise DegenerateConfigurationError("Eigenvalues must be nonzero", eigenvalues=eigs)
    mods = np.abs(eigs)
    order = np.argsort(mods)
    gaps = np.diff(mods[order]) / mods[order][1:]
    if gaps.min() < 1e-9:
        raise UnsupportedCaseError(
            "Closed form needs three distinct eigenvalue moduli",
            diagnostic={"moduli": mods.tolist()},
        )
    e = _coordinate_points()
    lo, mid, hi = (e[k] for k in order)
    return ClosedFormLimitSet(
        points=list(e),
        point_tags=[{"L0", "L1"}] * 3,
        lines=[line_through(lo, mid), line_through(mid, hi)],
        line_tags=[{"L2"}, {"L2"}],
        description="cyclic diagonal group with distinct moduli",
    )


def closed_form_translation():
    """Translation groups of C²: the line at infinity z₃ = 0."""
    return ClosedFormLimitSet(
        lines=[ProjLine(np.array([0, 0, 1]))],
        line_tags=[{"L2"}],
        description="translation group of C^2",
    )


def closed_form_toral():
    """Coordinate square w₁=0, w₁=w₃, w₂=0, w₂=w₃: four lines in general position."""
    forms = [(1, 0, 0), (1, 0, -1), (0, 1, 0), (0, 1, -1)]
    return ClosedFormLimitSet(
        lines=[ProjLine(np.array(f)) for f in forms],
        line_tags=[{"L2"}] * 4,
        description="toral square",
    )


# Discontinuity regions


@dataclass
class OmegaDescriptor:
    """Expected discontinuity region given by signs of imaginary parts.

    ``transform`` maps affine coordinates (z₁/z₃, z₂/z₃) to the coordinates
    whose imaginary parts select the component; a point with a vanishing
    imaginary part lies outside the region.
    """

    name: str
    description: str
    transform: np.ndarray
    components: int

    def signs(self, coords):
        coords = np.atleast_2d(np.asarray(coords, dtype=complex))
        affine = coords[:, :2] / coords[:, 2:3]
        return np.sign(np.round((affine @ np.asarray(self.transform).T).imag, 12)).astype(int)

    def contains(self, coords):
        return np.all(self.signs(coords) != 0, axis=1)

    def to_json(self):
        t = np.asarray(self.transform, dtype=complex)
        return {
            "name": self.name,
            "description": self.description,
            "components": self.components,
            "transform": [[[float(x.real), float(x.imag)] for x in row] for row in t],
        }


@dataclass
class RegionDescriptor:
    """P² minus finitely many lines and points."""

    name: str
    lines: list
    points: list

    def contains(self, p, tol=INCIDENCE_TOL):
        coords = normalize_rows(p.coords if isinstance(p, ProjPoint) else p)
        dist = distance_to_lines(coords, self.lines)
        for q in self.points:
            dist = np.minimum(dist, fs_distance_array(coords, q.coords))
        return dist > tol

    def describe(self):
        parts = [f"{len(self.lines)} line(s)"] + ([f"{len(self.points)} point(s)"] if self.points else [])
        return f"{self.name} = P^2 minus " + " and ".join(parts)


def cyclic_regions(eigs):
    """The three regions on which ⟨diag(eigs)⟩ acts discontinuously."""
    cf = closed_form_cyclic_diag(eigs)
    order = np.argsort(np.abs(np.asarray(eigs, dtype=complex)))
    e = _coordinate_points()
    lo, hi = e[order[0]], e[order[2]]
    low_line, high_line = cf.lines
    return {
        "omega0": RegionDescriptor("omega0", [low_line, high_line], []),
        "omega1": RegionDescriptor("omega1", [low_line], [hi]),
        "omega2": RegionDescriptor("omega2", [high_line], [lo]),
    }


def sample_ball(center, radius, samples, rng):
    """Points within fs distance ``radius`` of ``center``."""
    c = center.coords
    w = rng.normal(size=(samples, c.size)) + 1j * rng.normal(size=(samples, c.size))
    w -= (w @ c.conj())[:, None] * c[None, :]
    w /= np.linalg.norm(w, axis=1, keepdims=True)
    t = np.tan(radius * np.sqrt(rng.random(samples)))
    return normalize_rows(c[None, :] + t[:, None] * w)


def discontinuity_return_count(m, center, radius, k_max=60, samples=2000, rng=None):
    """Number of k ≠ 0, |k| ≤ k_max, with γ^k(B) ∩ B ≠ ∅ on a sampled fs-ball B."""
    rng = rng if rng is not None else np.random.default_rng(0)
    ball = sample_ball(center, radius, samples, rng)
    returns = []
    for k in [j for j in range(-k_max, k_max + 1) if j != 0]:
        image = normalize_rows(ball @ power(m, k).matrix.T)
        if np.any(fs_distance_array(image, center.coords) <= radius):
            returns.append(k)
    logger.debug("ball returns at powers %s", returns)
    return len(returns)


# Line counting


def _concurrent(a, b, c, tol=1e-9):
    if a.dim == 2:
        return abs(np.linalg.det(np.vstack([a.forms, b.forms, c.forms]))) < tol
    stacked = np.vstack([a.forms, b.forms, c.forms])
    return np.linalg.svd(stacked, compute_uv=False)[3] < tol


def max_general_position(lines):
    """Largest sub-collection with no three concurrent lines (exact search)."""
    n = len(lines)
    bad = {t for t in combinations(range(n), 3) if _concurrent(*(lines[i] for i in t))}
    best = 0

    def extend(i, chosen):
        nonlocal best
        if len(chosen) + (n - i) <= best:
            return
        if i == n:
            best = len(chosen)
            return
        if all((a, b, i) not in bad for a, b in combinations(chosen, 2)):
            extend(i + 1, chosen + [i])
        extend(i + 1, chosen)

    extend(0, [])
    return best


def count_lines(s):
    """(Lin, Ling) of a closed-form set; ∞ for parametrized families."""
    if s.parametrized:
        return INFINITE, INFINITE
    if len(s.lines) > MAX_EXACT_LINES:
        raise ResourceLimitError(
            f"{len(s.lines)} lines exceed the exact-search bound {MAX_EXACT_LINES}",
            lines=len(s.lines),
            bound=MAX_EXACT_LINES,
        )
    return len(s.lines), max_general_position(s.lines)


def describe_shape(s):
    if s.parametrized:
        return "infinite family of lines"
    isolated = [p for p in s.points if not s.lines or distance_to_lines(p.coords[None, :], s.lines)[0] > INCIDENCE_TOL]
    n_lines = len(s.lines)
    if n_lines == 0:
        if not isolated:
            return "empty"
        return "point" if len(isolated) == 1 else f"{len(isolated)} points"
    if n_lines == 1:
        return "line and point" if isolated else "one line"
    if n_lines == 2:
        return "two lines"
    if n_lines == 3:
        return "three concurrent lines" if _concurrent(*s.lines) else "three lines in general position"
    return f"{n_lines} lines"


# Families with known discontinuity regions


def _letters(count, start=0):
    return [chr(ord("a") + start + k) for k in range(count)]


def _limit_points_p1(sigma):
    """Limit points of an elementary cyclic Σ; None when they are not available."""
    if sigma.rank != 1:
        return None
    g = sigma.generators[0]
    kind = classify(g)
    if kind in (MoebiusKind.IDENTITY, MoebiusKind.ELLIPTIC):
        return []
    return fixed_points(g).points


def _is_infinite_scalar(g):
    if abs(abs(g) - 1) > 1e-12:
        return True
    order, _ = order_probe(ProjMap.diagonal([g, g, g ** -2]), L0_ORDER_PROBE)
    return order is None


def suspension(sigma, G, limit_points=None):
    """Suspension of a group Σ of P¹ by scalars G: generators and closed form.

    Σ acts on the line z₃ = 0 through blocks [[h, 0], [0, 1]]; each g ∈ G acts
    as diag(g, g, g⁻²). The limit set is the cone over Λ(Σ) with vertex e₃,
    plus the line e₁e₂ when G is infinite.
    """
    if sigma.dim != 1:
        raise DimensionMismatchError(f"Suspension takes a group of P^1, got P^{sigma.dim}")
    G = [complex(g) for g in G]
    if any(g == 0 for g in G):
        raise DegenerateConfigurationError("Suspension scalars must be nonzero")

    generators = []
    for h in sigma.generators:
        block = np.eye(3, dtype=complex)
        block[:2, :2] = h.matrix
        generators.append(ProjMap(block))
    # diag(g, g, g⁻²) is projectively trivial exactly when g³ = 1
    scalars = [g for g in G if abs(g ** 3 - 1) > 1e-12]
    generators += [ProjMap.diagonal([g, g, g ** -2]) for g in scalars]
    labels = list(sigma.labels) + _letters(len(scalars), start=len(sigma.labels))
    gens = GeneratorSet(2, generators, labels)

    if limit_points is None:
        limit_points = _limit_points_p1(sigma)
    elif isinstance(limit_points, PointCloud):
        limit_points = limit_points.points()
    g_infinite = any(_is_infinite_scalar(g) for g in scalars)
    e3 = coordinate_point(2, 2)
    cf = ClosedFormLimitSet(description="suspension")
    if limit_points is None:
        logger.warning("limit set of a non-elementary factor is not available; closed form is partial")
        cf.partial = True
    else:
        for p in limit_points:
            cf.add_line(line_through(ProjPoint([p.coords[0], p.coords[1], 0]), e3), {"L2"})
        if len(limit_points) > MAX_EXACT_LINES:
            cf.parametrized = True
    if g_infinite:
        cf.add_line(line_through(coordinate_point(2, 0), coordinate_point(2, 1)), {"L2"})
    return gens, cf


def _integer_matrix(a, shape):
    arr = np.asarray(a, dtype=float)
    if arr.shape != shape or not np.allclose(arr, np.round(arr)):
        raise UnsupportedCaseError(f"Expected an integer {shape[0]}x{shape[1]} matrix", diagnostic={"matrix": arr.tolist()})
    return np.round(arr).astype(int)


def toral_family(a, k_range=(-1, 0, 1), b_range=None):
    """Affine maps z ↦ A^k z + b of C² for a hyperbolic A ∈ SL(2, Z) with trace > 2.

    The expected discontinuity region is the union of the four products of
    half-planes in the eigen-coordinates of A.
    """
    a = _integer_matrix(a, (2, 2))
    det = int(round(np.linalg.det(a)))
    trace = int(np.trace(a))
    if abs(det) != 1:
        raise UnsupportedCaseError("Toral automorphism must be unimodular", diagnostic={"det": det})
    if abs(trace) <= 2:
        raise UnsupportedCaseError("Toral automorphism must be hyperbolic (|trace| > 2)", diagnostic={"trace": trace})
    # the half-plane region needs both eigenvalues positive
    if det != 1 or trace < 0:
        raise UnsupportedCaseError(
            "Toral automorphism must have positive eigenvalues (det 1, trace > 2)",
            diagnostic={"det": det, "trace": trace, "eigenvalues": np.linalg.eigvals(a).tolist()},
        )
    if b_range is None:
        b_range = list(product((0, 1), repeat=2))

    generators = []
    for k, b in product(k_range, b_range):
        if k == 0 and not any(b):
            continue
        m = np.eye(3)
        m[:2, :2] = np.linalg.matrix_power(a, k) if k >= 0 else np.round(np.linalg.inv(np.linalg.matrix_power(a, -k)))
        m[:2, 2] = b
        candidate = ProjMap(m)
        if all(candidate != g for g in generators):
            generators.append(candidate)
    gens = GeneratorSet(2, generators, _letters(len(generators)))

    _, vectors = np.linalg.eig(a.astype(float))
    omega = OmegaDescriptor(
        name="toral",
        description="union of H^± × H^± in the eigen-coordinates of A",
        transform=np.linalg.inv(vectors.real),
        components=4,
    )
    logger.info("toral family: %d generators, eigenvalues %s", len(generators), np.linalg.eigvals(a))
    return gens, omega


def inoue_family(m):
    """Inoue group of an integer matrix with one real eigenvalue α > 1.

    γ₀ = diag(α, β, 1) and γᵢ translate (z₁, z₂) by the i-th coordinates of the
    eigenvectors for α and β. The expected region is (H⁺ ∪ H⁻) × C.
    """
    m = _integer_matrix(m, (3, 3))
    det = int(round(np.linalg.det(m)))
    values, vectors = np.linalg.eig(m.astype(float))
    real = np.abs(values.imag) < 1e-9
    diagnostic = {"det": det, "eigenvalues": values.tolist()}
    if abs(det) != 1 or real.sum() != 1:
        raise UnsupportedCaseError("Inoue matrix needs det ±1 and one real eigenvalue", diagnostic=diagnostic)
    alpha = float(values[real][0].real)
    if alpha <= 1:
        raise UnsupportedCaseError("Real eigenvalue of an Inoue matrix must exceed 1", diagnostic=diagnostic)
    k_beta = int(np.flatnonzero((~real) & (values.imag > 0))[0])
    beta = values[k_beta]
    a_vec = vectors[:, int(np.flatnonzero(real)[0])]
    a_vec = (a_vec / a_vec[np.argmax(np.abs(a_vec))]).real
    b_vec = vectors[:, k_beta]

    generators = [ProjMap.diagonal([alpha, beta, 1.0])]
    for ai, bi in zip(a_vec, b_vec):
        t = np.eye(3, dtype=complex)
        t[0, 2], t[1, 2] = ai, bi
        generators.append(ProjMap(t))
    gens = GeneratorSet(2, generators, _letters(4))
    omega = OmegaDescriptor(
        name="inoue",
        description="(H+ ∪ H-) × C in the affine chart z3 = 1",
        transform=np.array([[1.0, 0.0]]),
        components=2,
    )
    logger.info("Inoue family: alpha=%.6f beta=%s", alpha, beta)
    return gens, omega


# Numerical layers


@dataclass
class KulkarniParams:
    depth: int = 60
    grid: int = 10_000
    eps: float = CLUSTER_EPS
    k: int = CLUSTER_K
    m_max: int = M_MAX
    l0_depth: int = 4
    order_bound: int = L0_ORDER_PROBE
    escape_ratio: float = 0.1
    line_samples: int = 2000
    max_orbit_points: int = 4_000_000
    max_words: int = MAX_WORDS
    seed: int = 0

    def to_json(self):
        return dict(self.__dict__)


@dataclass
class LimitSetApprox:
    """Tagged cloud of the three layers plus the L2 lines it was sampled from."""

    cloud: PointCloud
    params: dict
    lines: list = field(default_factory=list)

    def layer(self, name):
        tags = self.cloud.tags or []
        return self.cloud.select(np.array([t == name for t in tags], dtype=bool))

    def is_empty(self):
        return len(self.cloud) == 0

    def counts(self):
        return {name: len(self.layer(name)) for name in LAYERS}

    def distance(self, coords):
        """fs distance from rows to the approximation (cloud points and lines)."""
        coords = normalize_rows(coords)
        best = directed_distances(coords, self.cloud.coords)
        if self.lines:
            best = np.minimum(best, distance_to_lines(coords, self.lines))
        return best

    def to_json(self):
        return {
            "params": self.params,
            "counts": self.counts(),
            "lines": [l.to_json() for l in self.lines],
            "cloud": self.cloud.to_json(),
        }


def _subspace_samples(basis, count, rng):
    if basis.shape[1] == 1:
        return basis.T
    if basis.shape[1] == 2:
        return line_grid(ProjLine(_null_forms(basis)), count)
    coeffs = rng.normal(size=(count, basis.shape[1])) + 1j * rng.normal(size=(count, basis.shape[1]))
    return coeffs @ basis.T


def _null_forms(basis):
    return null_space(basis.T).T


def fixed_subspaces(m, rcond=1e-6):
    """Projectivized eigenspaces of m, as orthonormal column bases."""
    n1 = m.dim + 1
    out = []
    for lam in _cluster_values(np.linalg.eigvals(m.matrix)):
        basis = null_space(m.matrix - lam * np.eye(n1), rcond=rcond)
        if basis.shape[1]:
            out.append(basis)
    return out


def _dedup_subspaces(bases, eps):
    kept = []
    for dim in sorted({b.shape[1] for b in bases}):
        group = [b for b in bases if b.shape[1] == dim]
        keep = thin(None, eps / 4, features=embed_planes(np.array(group)))
        kept += [b for b, k in zip(group, keep) if k]
    return kept


def _l0_layer(gens, params, rng):
    elements = enumerate_group(gens, min(params.l0_depth, params.depth), max_words=params.max_words)
    bases, probe_hits = [], 0
    for m in elements:
        order, hit = order_probe(m, params.order_bound)
        probe_hits += hit
        if order is None:
            bases += fixed_subspaces(m)
    if probe_hits:
        logger.warning("%d elements reached the order probe bound %d; treated as infinite order", probe_hits, params.order_bound)
    bases = _dedup_subspaces(bases, params.eps) if bases else []
    parts = [_subspace_samples(b, params.line_samples, rng) for b in bases]
    coords = normalize_rows(np.vstack(parts)) if parts else np.zeros((0, gens.dim + 1), dtype=complex)
    return coords[thin(coords, params.eps / 4)] if len(coords) else coords


def _random_points(n, count, rng):
    return normalize_rows(rng.normal(size=(count, n + 1)) + 1j * rng.normal(size=(count, n + 1)))


def _orbit_points(mats, seeds):
    pts = np.einsum("wij,sj->wsi", mats, seeds)
    return normalize_rows(pts.reshape(-1, seeds.shape[1]))


def _escaping_subspaces(mats, known, seeds, params):
    """Dominant image subspaces of escaping elements whose contracted region meets K_m.

    For γ = U Σ V*, γ(K) accumulates on span(u₁..u_r) at the last singular gap r
    whenever K reaches the 1/(2m)-neighbourhood of span(v_r..v_{n+1}).
    """
    u, s, vh = np.linalg.svd(mats)
    gaps = s[:, 1:] / s[:, :-1] < params.escape_ratio
    escaping = gaps.any(axis=1)
    rank = np.where(escaping, gaps.shape[1] - np.argmax(gaps[:, ::-1], axis=1), 0)
    dist = directed_distances(seeds, known) if len(known) else np.full(len(seeds), np.pi / 2)
    admitted = rank == 1
    shells = []
    for m in range(1, params.m_max + 1):
        net = seeds[dist >= 1.0 / m]
        ok = np.zeros(len(mats), dtype=bool)
        for r in range(2, gaps.shape[1] + 1):
            rows = np.flatnonzero(rank == r)
            if rows.size == 0 or len(net) == 0:
                continue
            step = max(1, 2_000_000 // (len(net) * (r - 1)))
            for start in range(0, rows.size, step):
                chunk = rows[start : start + step]
                c = np.linalg.norm(np.einsum("wij,sj->wsi", vh[chunk, : r - 1, :], net), axis=2)
                ok[chunk] = c.min(axis=1) < 1.0 / (2 * m)
        admitted |= ok
        shells.append({"m": m, "net": int(len(net)), "admitted": int(admitted.sum())})
    return u, rank, admitted, shells


def approx_kulkarni(gens, params=None, progress=False):
    """Numerical L0, L1, L2 layers of the group generated by ``gens``."""
    params = params or KulkarniParams()
    n = gens.dim
    if n not in (1, 2, 3):
        raise DimensionMismatchError(f"Kulkarni layers are computed on P^1..P^3, got P^{n}")
    rng = np.random.default_rng(params.seed)
    record = params.to_json()

    l0 = _l0_layer(gens, params, rng)

    seeds = _random_points(n, params.grid, rng)
    if len(l0):
        seeds_off = seeds[directed_distances(seeds, l0) > L1_OFFSET]
    else:
        seeds_off = seeds

    tree = WordTree.build(gens, params.depth, max_words=params.max_words, progress=progress)
    idx = tree.distinct()
    mats = np.array([tree.maps[i].matrix for i in idx])
    lengths = np.array(tree.lengths)[idx]
    min_len = max(1, params.depth // 2)
    tail = lengths >= min_len
    tail_mats, tail_lengths = mats[tail], lengths[tail]
    record.update(distinct_elements=int(len(idx)), tail_elements=int(tail.sum()))

    l1 = np.zeros((0, n + 1), dtype=complex)
    if tail.any() and len(seeds_off):
        n_seeds = min(len(seeds_off), max(1, params.max_orbit_points // int(tail.sum())))
        if n_seeds < len(seeds_off):
            logger.warning("orbit budget: using %d of %d sample points", n_seeds, len(seeds_off))
        pts = _orbit_points(tail_mats, seeds_off[:n_seeds])
        mask = cluster_mask(pts, np.full(len(pts), min_len), min_len, k=params.k, eps=params.eps)
        l1 = pts[mask]
        l1 = l1[thin(l1, params.eps / 4)] if len(l1) else l1
        record["orbit_points"] = int(len(pts))

    l2_points, lines = np.zeros((0, n + 1), dtype=complex), []
    if n >= 2 and tail.any():
        known = np.vstack([l0, l1])
        u, rank, admitted, shells = _escaping_subspaces(tail_mats, known, seeds, params)
        record["shells"] = shells
        parts = []
        for r in sorted(set(rank[admitted].tolist())):
            rows = np.flatnonzero(admitted & (rank == r))
            bases = u[rows, :, :r]
            features = embed(bases[:, :, 0]) if r == 1 else embed_planes(bases)
            mask = cluster_mask(None, tail_lengths[rows], min_len, k=params.k, eps=params.eps, features=features)
            rows, features = rows[mask], features[mask]
            if rows.size == 0:
                continue
            keep = thin(None, params.eps / 4, features=features)
            for b in u[rows[keep], :, :r]:
                if r == 2:
                    lines.append(ProjLine(_null_forms(b)))
                parts.append(_subspace_samples(b, params.line_samples, rng))
        if parts:
            l2_points = normalize_rows(np.vstack(parts))

    coords = np.vstack([l0, l1, l2_points])
    tags = ["L0"] * len(l0) + ["L1"] * len(l1) + ["L2"] * len(l2_points)
    cloud = PointCloud(coords, n, depth=params.depth, tolerance=params.eps, tags=tags, provenance={"source": "approx_kulkarni"})
    approx = LimitSetApprox(cloud, record, lines)
    logger.info("Kulkarni approximation: %s, %d L2 lines", approx.counts(), len(lines))
    return approx


def hausdorff_to_closed_form(approx, s, per_line=2000):
    """fs Hausdorff distance between an approximation (or cloud) and a closed-form set."""
    if isinstance(approx, PointCloud):
        approx = LimitSetApprox(approx, {})
    if approx.is_empty() and s.is_empty():
        return 0.0
    if approx.is_empty() or s.is_empty():
        return float(np.pi / 2)
    forward = s.distance(approx.cloud.coords).max()
    backward = approx.distance(s.sample(per_line)).max()
    return float(max(forward, backward))


def cross_check(gens, s, params=None, progress=False):
    """Numerical approximation of Λ and its Hausdorff distance to a closed form."""
    approx = approx_kulkarni(gens, params, progress=progress)
    distance = hausdorff_to_closed_form(approx, s)
    logger.info("cross-check Hausdorff distance %.3g", distance)
    return approx, distance
