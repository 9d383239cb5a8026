"""
Finitely generated groups of projective maps: generator sets, reduced-word
enumeration and deduplication of group elements.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from tqdm import tqdm

from config.constants import DEDUP_GRID, MAX_WORDS
from utils.errors import ConfigSchemaError, DimensionMismatchError, ResourceLimitError
from utils.projective_utils import ProjMap, compose, inverse, map_from_json

logger = logging.getLogger(__name__)


def inverse_label(label):
    """Inverse letters use the swapped case: a ↔ A."""
    return label.swapcase() if label.swapcase() != label else label + "^-1"


@dataclass
class GeneratorSet:
    dim: int
    generators: list
    labels: list = None
    inverses: list = field(default=None, repr=False)

    def __post_init__(self):
        if not self.generators:
            raise ConfigSchemaError("A generator set needs at least one generator")
        for g in self.generators:
            if g.dim != self.dim:
                raise DimensionMismatchError(f"Generator of P^{g.dim} in a P^{self.dim} set")
        if self.labels is None:
            self.labels = [chr(ord("a") + k) for k in range(len(self.generators))]
        if len(self.labels) != len(self.generators) or len(set(self.labels)) != len(self.labels):
            raise ConfigSchemaError("Labels must be unique, one per generator")
        if self.inverses is None:
            self.inverses = [inverse(g) for g in self.generators]

    @property
    def rank(self):
        return len(self.generators)

    def letters(self):
        """Letters in enumeration order: a, A, b, B, ..."""
        out = []
        for label, g, g_inv in zip(self.labels, self.generators, self.inverses):
            out.append((label, g))
            out.append((inverse_label(label), g_inv))
        return out

    def conjugate(self, g):
        """The generator set g·Γ·g⁻¹."""
        g_inv = inverse(g)
        return GeneratorSet(
            self.dim,
            [compose(compose(g, x), g_inv) for x in self.generators],
            list(self.labels),
        )

    def to_json(self):
        return {"dim": self.dim, "generators": [g.to_json() for g in self.generators], "labels": list(self.labels)}

    @classmethod
    def from_json(cls, data):
        try:
            gens = [map_from_json(m) for m in data["generators"]]
            dim = int(data.get("dim", gens[0].dim))
        except (KeyError, IndexError, TypeError, ValueError) as e:
            raise ConfigSchemaError(f"Malformed generator set: {e}")
        return cls(dim, gens, data.get("labels"))


def reduced_word_count(rank, max_len):
    """1 + Σ_{n ≤ L} 2g(2g−1)^{n−1}: the ball of radius L in the free group."""
    total = 1
    for n in range(1, max_len + 1):
        total += 2 * rank * (2 * rank - 1) ** (n - 1)
    return total


def iter_reduced_words(n_letters, max_len):
    """Reduced words over letters 0..n-1 where 2k and 2k+1 are mutually inverse, by length."""
    level = [()]
    yield ()
    for _ in range(max_len):
        nxt = []
        for word in level:
            for letter in range(n_letters):
                if word and (letter ^ 1) == word[-1]:
                    continue
                nxt.append(word + (letter,))
        for word in nxt:
            yield word
        level = nxt


class FingerprintIndex:
    """Approximate-equality index on real vectors using two staggered grids.

    Two vectors closer than ``grid`` in every coordinate share a cell on at
    least one grid unless they straddle boundaries on both.
    """

    def __init__(self, grid=DEDUP_GRID, limit=None):
        self.grid = grid
        self.limit = limit
        self._cells = ({}, {})
        self._vectors = []

    def __len__(self):
        return len(self._vectors)

    def _keys(self, v):
        scaled = np.asarray(v, dtype=float) / self.grid
        return tuple(np.floor(scaled).astype(np.int64)), tuple(np.floor(scaled + 0.5).astype(np.int64))

    def find(self, v):
        v = np.asarray(v, dtype=float)
        for cells, key in zip(self._cells, self._keys(v)):
            for idx in cells.get(key, ()):
                if np.max(np.abs(self._vectors[idx] - v)) < self.grid:
                    return idx
        return None

    def add(self, v):
        """Insert unless an equal vector exists; returns (index, inserted)."""
        v = np.asarray(v, dtype=float)
        found = self.find(v)
        if found is not None:
            return found, False
        if self.limit is not None and len(self._vectors) >= self.limit:
            raise ResourceLimitError(f"Deduplication index saturated at {self.limit} entries", limit=self.limit)
        idx = len(self._vectors)
        self._vectors.append(v)
        for cells, key in zip(self._cells, self._keys(v)):
            cells.setdefault(key, []).append(idx)
        return idx, True


def map_key_vector(m):
    """Real embedding of a map's phase-canonical fingerprint plus the log-norm
    of its det-1 representative (deep powers share a fingerprint to 1e-9)."""
    f = m.fingerprint()
    return np.concatenate([f.real, f.imag, [np.log(np.linalg.norm(m.matrix))]])


def exact_map_key(m):
    from utils.exact_utils import ZERO, entries, format_scalar

    flat = [x for row in entries(m.exact) for x in row]
    pivot = next(x for x in flat if x != ZERO)
    return tuple(format_scalar(x / pivot) for x in flat)


@dataclass
class WordTree:
    """Reduced words up to a length with cached matrix products."""

    gens: GeneratorSet
    max_len: int
    words: list = field(default_factory=list)
    maps: list = field(default_factory=list)
    lengths: list = field(default_factory=list)

    @classmethod
    def build(cls, gens, max_len, max_words=MAX_WORDS, progress=False):
        n_letters = 2 * gens.rank
        expected = reduced_word_count(gens.rank, max_len)
        if expected > max_words:
            raise ResourceLimitError(
                f"{expected} reduced words up to length {max_len} exceed the bound {max_words}",
                expected=expected,
                bound=max_words,
            )
        letters = [m for _, m in gens.letters()]
        tree = cls(gens, max_len)
        tree.words.append(())
        tree.maps.append(ProjMap.identity(gens.dim))
        tree.lengths.append(0)
        frontier = [(0, ())]
        for length in tqdm(range(1, max_len + 1), desc="words", disable=not progress):
            nxt = []
            for parent_idx, word in frontier:
                parent = tree.maps[parent_idx]
                for letter in range(n_letters):
                    if word and (letter ^ 1) == word[-1]:
                        continue
                    child = word + (letter,)
                    tree.words.append(child)
                    tree.maps.append(compose(parent, letters[letter]))
                    tree.lengths.append(length)
                    nxt.append((len(tree.maps) - 1, child))
            frontier = nxt
            logger.debug("word level %d: %d words", length, len(frontier))
        return tree

    def __len__(self):
        return len(self.words)

    def label(self, word):
        names = [name for name, _ in self.gens.letters()]
        return "".join(names[k] for k in word) or "e"

    def stacked(self, min_len=0):
        """Array of matrices (k, n+1, n+1) for words of length ≥ min_len."""
        chosen = [m.matrix for m, n in zip(self.maps, self.lengths) if n >= min_len]
        return np.array(chosen) if chosen else np.zeros((0, self.gens.dim + 1, self.gens.dim + 1), dtype=complex)

    def distinct(self, grid=DEDUP_GRID, exact=False):
        """Indices of first occurrences of each group element (BFS order, so shortest words)."""
        keep = []
        if exact and all(g.exact is not None for g in self.gens.generators):
            seen = set()
            for idx, m in enumerate(self.maps):
                key = exact_map_key(m)
                if key not in seen:
                    seen.add(key)
                    keep.append(idx)
        else:
            index = FingerprintIndex(grid=grid, limit=len(self.maps))
            for idx, m in enumerate(self.maps):
                if index.add(map_key_vector(m))[1]:
                    keep.append(idx)
        return np.array(keep, dtype=int)


def enumerate_group(gens, max_len, exact=False, grid=DEDUP_GRID, max_words=MAX_WORDS, progress=False):
    """Distinct group elements given by reduced words of length ≤ max_len, in BFS order."""
    tree = WordTree.build(gens, max_len, max_words=max_words, progress=progress)
    unique = [tree.maps[idx] for idx in tree.distinct(grid=grid, exact=exact)]
    logger.info("enumerated %d distinct elements from %d words (max_len %d)", len(unique), len(tree), max_len)
    return unique


def order_probe(m, bound, tol=DEDUP_GRID):
    """Projective order of m if it is at most ``bound``.

    Returns (order, probe_hit): order is None for infinite order; probe_hit
    is set when m is unitary-like and no order ≤ bound was found.
    """
    from utils.projective_utils import fixed_points

    values = np.linalg.eigvals(m.matrix)
    mods = np.abs(values)
    if mods.max() > mods.min() * (1 + tol):
        return None, False
    if fixed_points(m).defective:
        return None, False
    ratios = values / values[0]
    ks = np.arange(1, bound + 1)
    powers = ratios[None, :] ** ks[:, None]
    hits = np.flatnonzero(np.all(np.abs(powers - 1) < tol * 10, axis=1))
    if hits.size:
        return int(ks[hits[0]]), False
    return None, True
