"""
Point clouds in P^n and the cluster-point rule used to approximate limit sets.

Clouds are embedded in a real vector space through p ↦ p p*; the Euclidean
distance there is √2·sin(d_FS), so KD-tree radius queries answer
Fubini–Study questions directly.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy.spatial import cKDTree

from config.constants import CLUSTER_EPS, CLUSTER_K
from utils.projective_utils import ProjPoint

logger = logging.getLogger(__name__)


def normalize_rows(arr):
    """Unit rows with the first significant coordinate positive real."""
    arr = np.atleast_2d(np.asarray(arr, dtype=complex))
    if arr.size == 0:
        return arr
    arr = arr / np.linalg.norm(arr, axis=1, keepdims=True)
    mags = np.abs(arr)
    pivot_idx = np.argmax(mags > 1e-12, axis=1)
    pivots = arr[np.arange(len(arr)), pivot_idx]
    return arr * (np.abs(pivots) / pivots)[:, None]


def embed_hermitian(h):
    """Real coordinates of Hermitian matrices whose Euclidean norm is the Frobenius norm."""
    h = np.asarray(h, dtype=complex)
    n1 = h.shape[-1]
    iu = np.triu_indices(n1, k=1)
    diag = np.real(np.einsum("kii->ki", h))
    upper = h[:, iu[0], iu[1]] * np.sqrt(2)
    return np.hstack([diag, upper.real, upper.imag])


def embed(arr):
    """Embedding of points through their rank-one projectors p p*."""
    arr = np.atleast_2d(arr)
    return embed_hermitian(arr[:, :, None] * arr[:, None, :].conj())


def embed_planes(bases):
    """Embedding of subspaces (orthonormal column bases) through their projectors."""
    bases = np.asarray(bases, dtype=complex)
    return embed_hermitian(bases @ np.conj(np.swapaxes(bases, 1, 2)))


def chord(angle):
    """Embedding distance for a Fubini–Study angle."""
    return np.sqrt(2) * np.sin(angle)


def angle_from_chord(c):
    return np.arcsin(np.clip(np.asarray(c) / np.sqrt(2), 0.0, 1.0))


@dataclass
class PointCloud:
    """Approximated subset of P^n with provenance (depth, tolerance, source)."""

    coords: np.ndarray
    dim: int
    depth: int = 0
    tolerance: float = CLUSTER_EPS
    tags: list = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        arr = np.asarray(self.coords, dtype=complex)
        if arr.size == 0:
            arr = np.zeros((0, self.dim + 1), dtype=complex)
        self.coords = normalize_rows(arr)
        if self.tags is not None and len(self.tags) != len(self.coords):
            raise ValueError("tags must match the number of points")

    @classmethod
    def from_points(cls, points, dim=None, **kwargs):
        points = list(points)
        if dim is None:
            dim = points[0].dim if points else 2
        arr = np.array([p.coords for p in points]) if points else np.zeros((0, dim + 1))
        return cls(arr, dim, **kwargs)

    def __len__(self):
        return len(self.coords)

    def points(self):
        return [ProjPoint(c) for c in self.coords]

    def select(self, mask):
        tags = None if self.tags is None else [t for t, keep in zip(self.tags, mask) if keep]
        return PointCloud(self.coords[mask], self.dim, self.depth, self.tolerance, tags, dict(self.provenance))

    def with_tag(self, tag):
        return PointCloud(self.coords, self.dim, self.depth, self.tolerance, [tag] * len(self), dict(self.provenance))

    def merge(self, other):
        tags = None
        if self.tags is not None or other.tags is not None:
            tags = (self.tags or [""] * len(self)) + (other.tags or [""] * len(other))
        return PointCloud(
            np.vstack([self.coords, other.coords]),
            self.dim,
            max(self.depth, other.depth),
            max(self.tolerance, other.tolerance),
            tags,
            {**other.provenance, **self.provenance},
        )

    def to_frame(self):
        """DataFrame with re/im columns per homogeneous coordinate."""
        data = {}
        for k in range(self.dim + 1):
            data[f"z{k + 1}_re"] = self.coords[:, k].real
            data[f"z{k + 1}_im"] = self.coords[:, k].imag
        frame = pd.DataFrame(data)
        if self.tags is not None:
            frame["layer"] = self.tags
        return frame

    @classmethod
    def from_frame(cls, frame, **kwargs):
        n1 = sum(1 for c in frame.columns if c.endswith("_re"))
        arr = np.column_stack(
            [frame[f"z{k + 1}_re"].to_numpy() + 1j * frame[f"z{k + 1}_im"].to_numpy() for k in range(n1)]
        ) if len(frame) else np.zeros((0, n1))
        tags = list(frame["layer"]) if "layer" in frame.columns else None
        return cls(arr, n1 - 1, tags=tags, **kwargs)

    def to_json(self):
        return {
            "dim": self.dim,
            "depth": self.depth,
            "tolerance": self.tolerance,
            "provenance": self.provenance,
            "points": [[[float(c.real), float(c.imag)] for c in row] for row in self.coords],
            "tags": self.tags,
        }


def _cells(features, size):
    keys = np.floor(features / size).astype(np.int64)
    _, first, inverse, counts = np.unique(keys, axis=0, return_index=True, return_inverse=True, return_counts=True)
    return first, inverse.ravel(), counts


def cluster_mask(coords, lengths, min_len, k=CLUSTER_K, eps=CLUSTER_EPS, features=None):
    """Points with at least k points of word length ≥ min_len within fs-radius eps.

    Tail points are bucketed into cells of diameter eps/4 with multiplicities,
    so dense accumulations cost one KD-tree entry per cell. A point counts
    itself when it belongs to the tail.
    """
    if features is None:
        features = embed(normalize_rows(coords))
    lengths = np.asarray(lengths)
    tail = lengths >= min_len
    if len(features) == 0 or tail.sum() < k:
        return np.zeros(len(features), dtype=bool)
    size = chord(eps) / (4 * np.sqrt(features.shape[1]))
    tail_first, _, tail_counts = _cells(features[tail], size)
    tree = cKDTree(features[tail][tail_first])
    cand_first, cand_inverse, _ = _cells(features, size)
    hits = tree.query_ball_point(features[cand_first], r=chord(eps))
    weights = np.array([tail_counts[idx].sum() for idx in hits])
    return (weights >= k)[cand_inverse]


def thin(coords, radius, order=None, features=None):
    """Grid net of a cloud: one point per cell of diameter ≤ radius.

    Within a cell the first point in ``order`` (default: input order) is kept.
    """
    if features is None:
        features = embed(normalize_rows(coords))
    n = len(features)
    if n == 0:
        return np.zeros(0, dtype=bool)
    order = np.arange(n) if order is None else np.asarray(order)
    cell = chord(radius) / np.sqrt(features.shape[1])
    keys = np.floor(features[order] / cell).astype(np.int64)
    _, first = np.unique(keys, axis=0, return_index=True)
    keep = np.zeros(n, dtype=bool)
    keep[order[first]] = True
    return keep


def cluster_representatives(coords, lengths, eps=CLUSTER_EPS, features=None):
    """One point per eps-linked component: the member of largest word length."""
    if features is None:
        coords = normalize_rows(coords)
        features = embed(coords)
    if len(features) == 0:
        return np.asarray(coords)[:0]
    lengths = np.asarray(lengths)
    order = np.lexsort((np.arange(len(lengths)), -lengths))
    kept = np.flatnonzero(thin(None, eps / 4, order=order, features=features))
    kept = kept[np.lexsort((kept, -lengths[kept]))]
    sub = features[kept]
    pairs = cKDTree(sub).query_pairs(r=chord(eps), output_type="ndarray")
    parent = np.arange(len(kept))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in pairs:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    roots = np.array([find(i) for i in range(len(kept))])
    # kept is sorted deepest-first, so each root is its component's deepest member
    reps = [kept[r] for r in np.unique(roots)]
    return np.asarray(coords)[reps]


def directed_distances(source, target):
    """fs distance from each source point to the nearest target point."""
    if len(target) == 0:
        return np.full(len(source), np.pi / 2)
    dist, _ = cKDTree(embed(normalize_rows(target))).query(embed(normalize_rows(source)))
    return angle_from_chord(dist)


def hausdorff(a, b):
    """Fubini–Study Hausdorff distance between two clouds (arrays or PointClouds)."""
    a = a.coords if isinstance(a, PointCloud) else np.asarray(a)
    b = b.coords if isinstance(b, PointCloud) else np.asarray(b)
    if len(a) == 0 and len(b) == 0:
        return 0.0
    if len(a) == 0 or len(b) == 0:
        return float(np.pi / 2)
    return float(max(directed_distances(a, b).max(), directed_distances(b, a).max()))


def min_pairwise_distance(coords):
    coords = normalize_rows(coords)
    if len(coords) < 2:
        return float(np.pi / 2)
    dist, _ = cKDTree(embed(coords)).query(embed(coords), k=2)
    return float(angle_from_chord(dist[:, 1].min()))
