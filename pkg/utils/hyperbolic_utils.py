"""
Complex hyperbolic plane in the ball model of P²: PU(2,1) membership,
Chen–Greenberg limit sets by orbit accumulation, and their tangent lines.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from config.constants import CLUSTER_EPS, CLUSTER_K, MAX_WORDS, NULL_TOL
from utils.cluster_utils import PointCloud, cluster_mask, cluster_representatives, normalize_rows
from utils.errors import GroupMembershipError
from utils.projective_utils import ProjLine, ProjMap, ProjPoint
from utils.word_utils import GeneratorSet, WordTree

logger = logging.getLogger(__name__)

J = np.diag([1.0, 1.0, -1.0]).astype(complex)


def hermitian_value(z):
    """|z₁|² + |z₂|² − |z₃|² of a representative (rows accepted)."""
    z = np.asarray(z.coords if isinstance(z, ProjPoint) else z, dtype=complex)
    sq = np.abs(z) ** 2
    return sq[..., 0] + sq[..., 1] - sq[..., 2]


def in_ball(p):
    """Sign test on any representative; the boundary is not in the ball."""
    return bool(hermitian_value(p) < -NULL_TOL * np.linalg.norm(p.coords) ** 2)


def is_null(p, tol=NULL_TOL):
    return abs(float(hermitian_value(p))) < tol


def is_pu21(m, tol=1e-9):
    """m* J m = s·J for a positive real s."""
    a = m.matrix if isinstance(m, ProjMap) else np.asarray(m, dtype=complex)
    form = a.conj().T @ J @ a
    s = form[0, 0].real
    if s <= 0:
        return False
    return bool(np.linalg.norm(form - s * J) < tol * max(1.0, s))


def loxodromic_pu21(t):
    """Hyperbolic rotation in the (z₁, z₃) plane."""
    c, s = np.cosh(t), np.sinh(t)
    return ProjMap(np.array([[c, 0, s], [0, 1, 0], [s, 0, c]]))


def elliptic_pu21(theta):
    return ProjMap(np.diag([np.exp(1j * theta), 1.0, 1.0]))


def unitary_pu21(u):
    """Block diag(U, 1) for a unitary 2×2 U."""
    m = np.eye(3, dtype=complex)
    m[:2, :2] = u
    return ProjMap(m)


def null_eigenvectors(m):
    """Attracting and repelling null fixed points of a loxodromic element."""
    values, vectors = np.linalg.eig(m.matrix)
    order = np.argsort(np.abs(values))
    return ProjPoint(vectors[:, order[-1]]), ProjPoint(vectors[:, order[0]])


@dataclass
class CGLimitApprox:
    points: PointCloud
    base_point: ProjPoint
    depth: int
    eps: float = CLUSTER_EPS
    k: int = CLUSTER_K
    generators: list = field(default_factory=list)

    def to_json(self):
        return {
            "base_point": self.base_point.to_json(),
            "depth": self.depth,
            "eps": self.eps,
            "k": self.k,
            "generators": self.generators,
            "points": self.points.to_json()["points"],
        }


def orbit(gens, base, depth, max_words=MAX_WORDS):
    """Orbit points w·base for reduced words |w| ≤ depth, with word lengths."""
    tree = WordTree.build(gens, depth, max_words=max_words)
    mats = np.array([m.matrix for m in tree.maps])
    coords = normalize_rows(mats @ base.coords)
    return coords, np.array(tree.lengths)


def cg_limit(gens, base, depth, eps=CLUSTER_EPS, k=CLUSTER_K, max_words=MAX_WORDS):
    """Cluster points of the orbit of a ball point, one per accumulation region."""
    if not in_ball(base):
        raise GroupMembershipError("Base point must lie inside the ball", base=base.to_json())
    for label, g in zip(gens.labels, gens.generators):
        if not is_pu21(g):
            raise GroupMembershipError(f"Generator {label} does not preserve the form diag(1,1,-1)", label=label)
    coords, lengths = orbit(gens, base, depth, max_words=max_words)
    mask = cluster_mask(coords, lengths, min_len=max(1, depth // 2), k=k, eps=eps)
    reps = cluster_representatives(coords[mask], lengths[mask], eps=eps)
    if len(reps):
        null = np.abs(hermitian_value(reps)) < NULL_TOL
        if not null.all():
            logger.warning(
                "dropping %d cluster points off the null cone: elliptic elements give no cluster points",
                int((~null).sum()),
            )
        reps = reps[null]
    logger.info("Chen-Greenberg approximation: %d cluster points from %d orbit points", len(reps), len(coords))
    cloud = PointCloud(reps, 2, depth=depth, tolerance=eps, provenance={"k": k, "eps": eps})
    return CGLimitApprox(cloud, base, depth, eps, k, [g.to_json() for g in gens.generators])


def tangent_line(z, tol=NULL_TOL):
    """Line tangent to the sphere at a null point: the J-orthogonal complement of z."""
    if not is_null(z, tol):
        raise GroupMembershipError("Tangent lines exist only at null points", point=z.to_json())
    return ProjLine(J @ np.conj(z.coords))


def tangency_residual(line, z):
    """Distance from the restricted form on the line being PSD with kernel z.

    Every point of the line is J-orthogonal to z, so on span(z, w) the form
    is diag(value(z), value(w)); the residual is |value(z)| plus the
    negative part of value(w).
    """
    w = next(p for p in line.spanning_points() if abs(np.vdot(p.coords, z.coords)) < 0.999)
    zc = z.coords
    w_perp = w.coords - np.vdot(zc, w.coords) * zc
    vw = float(np.vdot(w_perp, J @ w_perp).real) / np.vdot(w_perp, w_perp).real
    return abs(float(hermitian_value(z))) + max(0.0, -vw)


def kulkarni_from_cg(cg):
    """One tangent line per Chen–Greenberg point."""
    points = cg.points.points() if isinstance(cg, CGLimitApprox) else list(cg)
    return [tangent_line(z) for z in points]


def generator_set_pu21(matrices, labels=None):
    gens = [m if isinstance(m, ProjMap) else ProjMap(m) for m in matrices]
    return GeneratorSet(2, gens, labels)
