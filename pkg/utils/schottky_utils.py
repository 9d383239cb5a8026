"""
Schottky groups: classical ping-pong groups on the Riemann sphere and
mirror groups around disjoint lines of P³.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space

from config.constants import CLUSTER_EPS, CLUSTER_K, KISSING_TOL, MAX_WORDS, SLOW_CONTRACTION_LAMBDA
from utils.cluster_utils import PointCloud, cluster_mask, normalize_rows
from utils.errors import DegenerateConfigurationError, GeometryError, ResourceLimitError
from utils.moebius_utils import CircleOrLine, Moebius, attracting_fixed_point, image_circle
from utils.projective_utils import ProjLine, ProjMap, lines_disjoint
from utils.word_utils import GeneratorSet, WordTree, reduced_word_count

logger = logging.getLogger(__name__)


@dataclass
class SchottkyConfigP1:
    """Discs R_j, S_j and maps with γ_j(R_j) = Ĉ ∖ S̄_j."""

    R: list
    S: list
    maps: list

    def __post_init__(self):
        if not (len(self.R) == len(self.S) == len(self.maps)):
            raise GeometryError("R, S and maps must have one entry per generator")
        for disc in self.R + self.S:
            if not disc.is_circle:
                raise GeometryError("Schottky discs must be round circles")

    @property
    def genus(self):
        return len(self.maps)

    def discs(self):
        """Named discs in order R1, S1, R2, S2, ..."""
        out = []
        for j in range(self.genus):
            out.append((f"R{j + 1}", self.R[j]))
            out.append((f"S{j + 1}", self.S[j]))
        return out

    def generator_set(self):
        return GeneratorSet(1, [m.to_projmap() for m in self.maps])

    def letter_discs(self):
        """Disc containing the attracting fixed point of each letter a, A, b, B, ..."""
        out = []
        for j in range(self.genus):
            out.append(self.S[j])
            out.append(self.R[j])
        return out

    def to_json(self):
        return {
            "R": [d.to_json() for d in self.R],
            "S": [d.to_json() for d in self.S],
            "maps": [[[m.a.real, m.a.imag], [m.b.real, m.b.imag], [m.c.real, m.c.imag], [m.d.real, m.d.imag]] for m in self.maps],
        }

    @classmethod
    def from_json(cls, data):
        R = [CircleOrLine.from_json(d) for d in data["R"]]
        S = [CircleOrLine.from_json(d) for d in data["S"]]
        if "maps" in data:
            maps = [Moebius(*[complex(*e) for e in m]) for m in data["maps"]]
        else:
            maps = [standard_pairing(r, s) for r, s in zip(R, S)]
        return cls(R, S, maps)


@dataclass
class SchottkyReport:
    verdict: str
    failures: list = field(default_factory=list)

    @property
    def valid(self):
        return self.verdict == "valid"

    @property
    def usable(self):
        return self.verdict in ("valid", "kissing")


def disc_gap(d1, d2):
    """Distance between two closed discs' boundaries (negative when they overlap)."""
    return abs(d1.center - d2.center) - d1.radius - d2.radius


def standard_pairing(R, S):
    """z ↦ c_S + r_R r_S / (z − c_R): ∂R → ∂S and the exterior of R into S."""
    if disc_gap(R, S) <= 0:
        raise DegenerateConfigurationError("Pairing discs must be disjoint", pair=(R.to_json(), S.to_json()))
    cR, cS = R.center, S.center
    return Moebius(cS, R.radius * S.radius - cS * cR, 1, -cR)


def standard_config(g=2, radius=0.25):
    """2g discs of one radius centered on the 2g-th roots of unity; R_j opposite S_j."""
    centers = np.exp(2j * np.pi * np.arange(2 * g) / (2 * g))
    R = [CircleOrLine.circle(centers[j], radius) for j in range(g)]
    S = [CircleOrLine.circle(centers[j + g], radius) for j in range(g)]
    return SchottkyConfigP1(R, S, [standard_pairing(r, s) for r, s in zip(R, S)])


def kissing_radius(g):
    """Radius at which neighbouring discs of standard_config become tangent."""
    return float(np.sin(np.pi / (2 * g)))


def validate_schottky_p1(cfg):
    """Disjointness of the 2g discs and the pairing condition for each map."""
    failures = []
    kissing = False
    named = cfg.discs()
    for i in range(len(named)):
        for j in range(i + 1, len(named)):
            (n1, d1), (n2, d2) = named[i], named[j]
            gap = disc_gap(d1, d2)
            if abs(gap) <= KISSING_TOL:
                kissing = True
                failures.append({"pair": [n1, n2], "reason": "tangent", "gap": gap})
            elif gap < 0:
                failures.append({"pair": [n1, n2], "reason": "overlap", "gap": gap})
    for j, (R, S, m) in enumerate(zip(cfg.R, cfg.S, cfg.maps)):
        name = [f"R{j + 1}", f"S{j + 1}"]
        image = image_circle(m, R)
        scale = max(1.0, S.radius, abs(S.center))
        if not image.is_circle or abs(image.center - S.center) > 1e-9 * scale or abs(image.radius - S.radius) > 1e-9 * scale:
            failures.append({"pair": name, "reason": "boundary image differs from target circle"})
            continue
        inner = R.center + 0.5 * R.radius
        out = m(inner)
        if S.contains(out) or (np.isfinite(out) and abs(abs(out - S.center) - S.radius) < 1e-12):
            failures.append({"pair": name, "reason": "orientation: interior of R lands inside S"})
    if any(f["reason"] != "tangent" for f in failures):
        verdict = "invalid"
    elif kissing:
        verdict = "kissing"
    else:
        verdict = "valid"
    if verdict != "valid":
        logger.info("Schottky configuration verdict %s: %s", verdict, failures)
    return SchottkyReport(verdict, failures)


def free_group_count(g, max_len):
    return reduced_word_count(g, max_len)


def word_disc(cfg, tree_word):
    """Nested disc l₁⋯l_{n−1}(D_{l_n}) of a reduced word, with the radii of its prefix chain."""
    letters = [m for _, m in _moebius_letters(cfg)]
    discs = cfg.letter_discs()
    circle = discs[tree_word[-1]]
    radii = [circle.radius]
    for letter in reversed(tree_word[:-1]):
        circle = image_circle(letters[letter], circle)
        radii.append(circle.radius)
    return circle, radii


def _moebius_letters(cfg):
    out = []
    for j, m in enumerate(cfg.maps):
        out.append((f"g{j + 1}", m))
        out.append((f"G{j + 1}", m.inverse()))
    return out


def limit_points_p1(cfg, depth, count=None, max_words=MAX_WORDS):
    """Attracting fixed points of all reduced words of length 1..depth."""
    report = validate_schottky_p1(cfg)
    if not report.valid:
        raise DegenerateConfigurationError(f"Schottky configuration is {report.verdict}", failures=report.failures)
    tree = WordTree.build(cfg.generator_set(), depth, max_words=max_words)
    points, words = [], []
    for word, m in zip(tree.words, tree.maps):
        if not word:
            continue
        points.append(attracting_fixed_point(m.matrix).coords)
        words.append(tree.label(word))
    if count is not None and len(points) > count:
        points, words = points[-count:], words[-count:]
    logger.info("collected %d limit points at depth %d", len(points), depth)
    return PointCloud(np.array(points), 1, depth=depth, tolerance=0.0, provenance={"words": words, "genus": cfg.genus})


def ping_pong_check(cfg, samples, rng, window=4.0):
    """Failures of γ_j(outside R_j) ⊂ S̄_j and γ_j⁻¹(outside S_j) ⊂ R̄_j on random samples."""
    failures = []
    zs = rng.uniform(-window, window, samples) + 1j * rng.uniform(-window, window, samples)
    for j, (R, S, m) in enumerate(zip(cfg.R, cfg.S, cfg.maps)):
        for source, target, f, tag in ((R, S, m, f"g{j + 1}"), (S, R, m.inverse(), f"G{j + 1}")):
            outside = zs[np.abs(zs - source.center) > source.radius]
            images = f.apply_array(outside)
            bad = np.abs(images - target.center) > target.radius * (1 + 1e-9)
            if bad.any():
                failures.append({"generator": tag, "count": int(bad.sum())})
    return failures


@dataclass
class MirrorConfigP3:
    line_pairs: list
    strengths: list
    maps: list
    frames: list

    @property
    def genus(self):
        return len(self.maps)

    def generator_set(self):
        gens = [ProjMap(m.matrix) for m in self.maps]
        return GeneratorSet(3, gens, inverses=list(gens))

    def ratio(self, j, coords):
        """‖(u₃,u₄)‖ / ‖(u₁,u₂)‖ in the adapted frame of pair j."""
        u = np.linalg.solve(self.frames[j], np.atleast_2d(coords).T).T
        return np.linalg.norm(u[:, 2:], axis=1) / np.maximum(np.linalg.norm(u[:, :2], axis=1), 1e-300)

    def in_tube(self, j, coords):
        """Membership in the tube around ℓ_j that γ_j swaps with its exterior."""
        return self.ratio(j, coords) < 1.0 / self.strengths[j]

    def to_json(self):
        return {
            "line_pairs": [[l1.to_json(), l2.to_json()] for l1, l2 in self.line_pairs],
            "strengths": list(self.strengths),
            "maps": [m.to_json() for m in self.maps],
        }


def _line_basis(line):
    return null_space(line.forms)


def build_mirror_group(line_pairs, strengths, twists=None):
    """γ_j = F_j [[0, λU],[λ⁻¹U⁻¹, 0]] F_j⁻¹ with F_j adapted to (ℓ_j, ℓ′_j)."""
    if len(line_pairs) != len(strengths):
        raise GeometryError("One strength per line pair is required")
    lines = [l for pair in line_pairs for l in pair]
    for i in range(len(lines)):
        for j in range(i + 1, len(lines)):
            if not lines_disjoint(lines[i], lines[j]):
                raise DegenerateConfigurationError(
                    f"Lines {i} and {j} intersect", pair=[i, j]
                )
    maps, frames = [], []
    for k, ((l1, l2), lam) in enumerate(zip(line_pairs, strengths)):
        if lam < 1:
            raise GeometryError(f"Strength must be ≥ 1, got {lam}")
        if lam < SLOW_CONTRACTION_LAMBDA:
            logger.warning("strength %.4f close to 1: slow contraction, cluster detection unreliable", lam)
        u = np.eye(2) if twists is None else np.asarray(twists[k], dtype=complex)
        if not np.allclose(u.conj().T @ u, np.eye(2), atol=1e-9):
            raise GeometryError("Twists must be unitary 2×2 matrices")
        # block² = I for every λ, so each generator is an involution
        block = np.zeros((4, 4), dtype=complex)
        block[:2, 2:] = lam * u
        block[2:, :2] = np.linalg.inv(u) / lam
        frame = np.hstack([_line_basis(l1), _line_basis(l2)])
        frames.append(frame)
        maps.append(ProjMap(frame @ block @ np.linalg.inv(frame)))
    return MirrorConfigP3(list(line_pairs), list(strengths), maps, frames)


def standard_mirror_lines():
    """Four pairwise disjoint lines: span(e₁,e₂), span(e₃,e₄) and their diagonal tilts."""
    e = np.eye(4)
    l1 = ProjLine(null_space(np.vstack([e[0], e[1]])).T)
    l1p = ProjLine(null_space(np.vstack([e[2], e[3]])).T)
    l2 = ProjLine(null_space(np.vstack([e[0] + e[2], e[1] + e[3]])).T)
    l2p = ProjLine(null_space(np.vstack([e[0] - e[2], e[1] - e[3]])).T)
    return [(l1, l1p), (l2, l2p)]


def mirror_words(g, depth):
    """Words in g involutions without repeated consecutive letters, by length."""
    level = [()]
    yield ()
    for _ in range(depth):
        nxt = [w + (k,) for w in level for k in range(g) if not w or w[-1] != k]
        yield from nxt
        level = nxt


def orbit_cloud_p3(cfg, depth, samples, rng, k=CLUSTER_K, eps=CLUSTER_EPS, max_points=5_000_000):
    """Cluster points of random seed orbits under words of length ≤ depth."""
    seeds = normalize_rows(rng.normal(size=(samples, 4)) + 1j * rng.normal(size=(samples, 4)))
    if depth == 0:
        return PointCloud(seeds, 3, depth=0, tolerance=0.0, provenance={"seeds": samples})
    n_words = 1 + sum(cfg.genus * (cfg.genus - 1) ** (n - 1) for n in range(1, depth + 1))
    if n_words * samples > max_points:
        raise ResourceLimitError(f"{n_words * samples} orbit points exceed {max_points}", bound=max_points)
    mats = [m.matrix for m in cfg.maps]
    cache = {(): np.eye(4, dtype=complex)}
    blocks, lengths = [], []
    for word in mirror_words(cfg.genus, depth):
        if word:
            cache[word] = cache[word[:-1]] @ mats[word[-1]]
            cache[word] /= np.linalg.norm(cache[word])
        blocks.append(seeds @ cache[word].T)
        lengths.extend([len(word)] * samples)
    coords = normalize_rows(np.vstack(blocks))
    mask = cluster_mask(coords, lengths, min_len=max(1, depth // 2), k=k, eps=eps)
    cluster = coords[mask]
    excess = 0.0
    for p in cluster:
        gaps = [np.arctan(cfg.ratio(j, p)[0]) - np.arctan(1.0 / cfg.strengths[j]) for j in range(cfg.genus)]
        excess = max(excess, max(0.0, min(gaps)))
    logger.info("mirror orbit: %d cluster points of %d, tube excess %.3g", len(cluster), len(coords), excess)
    return PointCloud(cluster, 3, depth=depth, tolerance=float(excess), provenance={"seeds": samples, "eps": eps, "k": k})
