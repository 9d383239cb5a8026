"""
Exact Pappus configurations and the orbit of lines they generate.

Configurations live in P² over the Gaussian rationals. Each configuration
yields its Pappus line; rewriting a configuration into two children and
recursing produces the set of lines whose dual points trace a curve in the
dual plane.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from tqdm import tqdm

from config.constants import PAPPUS_MAX_DEPTH
from utils.errors import DegenerateConfigurationError, ResourceLimitError, UnsupportedCaseError
from utils.exact_utils import (
    ONE,
    ZERO,
    det3,
    dot,
    format_scalar,
    format_vector,
    from_columns,
    is_real,
    join,
    map_from_correspondence,
    mat_vec,
    meet,
    normalize,
    parse_scalar,
    projective_equal,
    same_point,
    to_complex,
    to_scalar,
    vector,
    vector_key,
)
from utils.projective_utils import ProjMap

logger = logging.getLogger(__name__)

__all__ = [
    "PappusConfig",
    "complex_pappus_experiment",
    "config_from_affine",
    "dual_points_to_float",
    "format_scalar",
    "iterate_configs",
    "pappus_line",
    "parse_scalar",
    "schwartz_generators",
]


@dataclass(frozen=True)
class PappusConfig:
    """Marked points (p, b, q) on a line L1 and (r, t, s) on a line L2."""

    p: tuple
    b: tuple
    q: tuple
    r: tuple
    t: tuple
    s: tuple

    def __post_init__(self):
        for name in ("p", "b", "q", "r", "t", "s"):
            object.__setattr__(self, name, normalize(vector(getattr(self, name))))
        self.validate()

    @property
    def first(self):
        return self.p, self.b, self.q

    @property
    def second(self):
        return self.r, self.t, self.s

    @property
    def l1(self):
        return join(self.p, self.b)

    @property
    def l2(self):
        return join(self.r, self.t)

    def validate(self):
        points = self.first + self.second
        for i in range(6):
            for j in range(i + 1, 6):
                if same_point(points[i], points[j]):
                    raise DegenerateConfigurationError("Marked points must be distinct", points=format_vector(points[i]))
        if det3(*self.first) != ZERO:
            raise DegenerateConfigurationError("p, b, q are not collinear")
        if det3(*self.second) != ZERO:
            raise DegenerateConfigurationError("r, t, s are not collinear")
        l1, l2 = self.l1, self.l2
        if same_point(l1, l2):
            raise DegenerateConfigurationError("The two carrier lines coincide")
        if any(dot(l2, x) == ZERO for x in self.first) or any(dot(l1, x) == ZERO for x in self.second):
            raise DegenerateConfigurationError("A marked point lies on both carrier lines")

    def swapped(self):
        return PappusConfig(self.r, self.t, self.s, self.p, self.b, self.q)

    def transform(self, m):
        """Image under an exact projective map."""
        return PappusConfig(*(mat_vec(m, x) for x in self.first + self.second))

    def is_real(self):
        return all(is_real(c) for x in self.first + self.second for c in x)

    def to_json(self):
        return {name: format_vector(getattr(self, name)) for name in ("p", "b", "q", "r", "t", "s")}

    @classmethod
    def from_json(cls, data):
        return cls(*(data[name] for name in ("p", "b", "q", "r", "t", "s")))


def config_from_affine(p, b, q, r, t, s):
    """Configuration from affine (x, y) pairs; entries may be strings like "2/3" or "1+i"."""
    return PappusConfig(*((to_scalar(x), to_scalar(y), ONE) for x, y in (p, b, q, r, t, s)))


def pappus_line(c):
    """The Pappus line and its three marked points pt∩rb, ps∩rq, bs∩tq."""
    try:
        x1 = meet(join(c.p, c.t), join(c.r, c.b))
        x2 = meet(join(c.p, c.s), join(c.r, c.q))
        x3 = meet(join(c.b, c.s), join(c.t, c.q))
    except DegenerateConfigurationError as e:
        raise DegenerateConfigurationError(f"Pappus construction degenerates: {e}")
    if same_point(x1, x2) or same_point(x2, x3) or same_point(x1, x3):
        raise DegenerateConfigurationError("Pappus points coincide")
    if det3(x1, x2, x3) != ZERO:
        # over a field this cannot happen; it would mean broken arithmetic
        raise DegenerateConfigurationError("Pappus points are not collinear")
    return join(x1, x2), (x1, x2, x3)


def children(c):
    """The Pappus line of c and the two configurations it spawns."""
    line, xs = pappus_line(c)
    return line, PappusConfig(*c.first, *xs), PappusConfig(*xs, *c.second)


@dataclass
class IterationResult:
    """Dual points in first-emission order, with their addresses and any failing nodes."""

    dual_points: list = field(default_factory=list)
    addresses: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    nodes: int = 0
    max_bits: int = 0

    def __len__(self):
        return len(self.dual_points)

    def keys(self):
        return {vector_key(v) for v in self.dual_points}

    def to_frame(self):
        arr = dual_points_to_float(self.dual_points)
        frame = pd.DataFrame({f"u{k + 1}_{part}": getattr(arr[:, k], part) for k in range(3) for part in ("real", "imag")})
        frame.insert(0, "address", self.addresses)
        return frame

    def to_json(self):
        return {
            "dual_points": [format_vector(v) for v in self.dual_points],
            "addresses": self.addresses,
            "failures": [{"address": a, "message": m} for a, m in self.failures],
            "nodes": self.nodes,
        }


def _bits(v):
    return max(max(int(c.x.numerator).bit_length(), int(c.x.denominator).bit_length(),
                   int(c.y.numerator).bit_length(), int(c.y.denominator).bit_length()) for c in v)


def iterate_configs(c, depth, strict=True, progress=False):
    """Dual points of every line generated by rewriting c to the given depth.

    Node addresses are strings over {0, 1} (0: keep L1, 1: keep L2). With
    ``strict`` a degenerate node raises with its address; otherwise the node
    is recorded in ``failures`` and its subtree skipped.
    """
    if depth > PAPPUS_MAX_DEPTH:
        raise ResourceLimitError(f"Depth {depth} exceeds the bound {PAPPUS_MAX_DEPTH}", depth=depth, bound=PAPPUS_MAX_DEPTH)
    result = IterationResult()
    seen = set()

    def emit(line, address):
        key = vector_key(line)
        if key not in seen:
            seen.add(key)
            result.dual_points.append(normalize(line))
            result.addresses.append(address)
            result.max_bits = max(result.max_bits, _bits(line))

    emit(c.l1, "L1")
    emit(c.l2, "L2")
    level = [("", c)]
    for _ in tqdm(range(depth), desc="pappus", disable=not progress):
        nxt = []
        for address, node in level:
            result.nodes += 1
            try:
                line, left, right = children(node)
            except DegenerateConfigurationError as e:
                if strict:
                    raise DegenerateConfigurationError(str(e), address=address or "root")
                result.failures.append((address or "root", str(e)))
                continue
            emit(line, address or "root")
            nxt += [(address + "0", left), (address + "1", right)]
        level = nxt
    logger.info("pappus iteration: %d dual points from %d nodes (largest entry %d bits)", len(result), result.nodes, result.max_bits)
    return result


def incidence_certificate(c):
    """Exact check that the Pappus line of c contains all three constructed points."""
    line, xs = pappus_line(c)
    return all(dot(line, x) == ZERO for x in xs)


def dual_points_to_float(points):
    """Unit-normalized complex array (N, 3) of exact dual points."""
    if not points:
        return np.zeros((0, 3), dtype=complex)
    arr = np.array([[to_complex(x) for x in v] for v in points], dtype=complex)
    return arr / np.linalg.norm(arr, axis=1, keepdims=True)


# Schwartz generators


@dataclass
class SchwartzGenerators:
    iota: ProjMap
    tau1: ProjMap
    tau2: ProjMap
    report: dict

    def to_json(self):
        return {
            "iota": self.iota.to_json(),
            "tau1": self.tau1.to_json(),
            "tau2": self.tau2.to_json(),
            "report": self.report,
        }


def _maps_to(m, x, y):
    return same_point(mat_vec(m, x), y)


def _line_image(m, line):
    return normalize(mat_vec(m.inv().transpose(), line))


def _product(*ms):
    out = ms[0]
    for m in ms[1:]:
        out = out.matmul(m)
    return out


def schwartz_generators(c):
    """Candidate maps ι, τ₁, τ₂ from point correspondences, with a relation report.

    ι swaps (p, b) with (r, t), so it is an involution exchanging L1 and L2.
    The conditions p↦r, b↦t, q↦s, x₂↦x₂ alone do not pin ι down since p, b, q
    are collinear; the report says whether this ι also meets the last two.
    τ₁ sends (r, t) to (x₁, x₂) fixing p and b; τ₂ sends (p, b) to (x₁, x₂)
    fixing r and t. The report states which further correspondences and
    group relations hold exactly.
    """
    if not c.is_real():
        raise UnsupportedCaseError("Schwartz generators are built for real configurations")
    l3, (x1, x2, x3) = pappus_line(c)
    try:
        iota = map_from_correspondence([c.p, c.b, c.r, c.t], [c.r, c.t, c.p, c.b])
        tau1 = map_from_correspondence([c.r, c.t, c.p, c.b], [x1, x2, c.p, c.b])
        tau2 = map_from_correspondence([c.p, c.b, c.r, c.t], [x1, x2, c.r, c.t])
    except DegenerateConfigurationError as e:
        raise DegenerateConfigurationError(f"Correspondence is not realizable by a projective map: {e}")

    identity = from_columns([(ONE, ZERO, ZERO), (ZERO, ONE, ZERO), (ZERO, ZERO, ONE)])
    l1, l2 = c.l1, c.l2
    report = {
        "iota^2 = id": projective_equal(iota.matmul(iota), identity),
        "tau1 iota tau2 = iota": projective_equal(_product(tau1, iota, tau2), iota),
        "tau2 iota tau1 = iota": projective_equal(_product(tau2, iota, tau1), iota),
        "tau1 iota tau1 = tau2": projective_equal(_product(tau1, iota, tau1), tau2),
        "tau2 iota tau2 = tau2": projective_equal(_product(tau2, iota, tau2), tau2),
        "iota(L1) = L2": same_point(_line_image(iota, l1), l2),
        "iota(L2) = L1": same_point(_line_image(iota, l2), l1),
        "iota(q) = s": _maps_to(iota, c.q, c.s),
        "iota(x2) = x2": _maps_to(iota, x2, x2),
        "iota: p,b,q,x2 -> r,t,s,x2": all(_maps_to(iota, u, v) for u, v in ((c.p, c.r), (c.b, c.t), (c.q, c.s), (x2, x2))),
        "tau1(L2) = L3": same_point(_line_image(tau1, l2), l3),
        "tau1(s) = x3": _maps_to(tau1, c.s, x3),
        "tau2(L1) = L3": same_point(_line_image(tau2, l1), l3),
        "tau2(q) = x3": _maps_to(tau2, c.q, x3),
    }
    logger.debug("Schwartz relation report: %s", report)
    return SchwartzGenerators(ProjMap.from_exact(iota), ProjMap.from_exact(tau1), ProjMap.from_exact(tau2), report)


# Complex experiment


def _random_gaussian(rng, bound=5, max_den=4):
    den = int(rng.integers(1, max_den + 1))
    re_part, im_part = (int(x) for x in rng.integers(-bound, bound + 1, size=2))
    return parse_scalar(f"({re_part}+{im_part}i)/{den}")


def random_config(rng, complex_entries=True, attempts=100):
    """Random non-degenerate configuration on two random lines."""
    draw = (lambda: _random_gaussian(rng)) if complex_entries else (lambda: to_scalar(int(rng.integers(-6, 7))))
    for _ in range(attempts):
        try:
            base1 = (draw(), draw(), ONE)
            base2 = (draw(), draw(), ONE)
            d1 = (draw(), draw(), ZERO)
            d2 = (draw(), draw(), ZERO)
            params = [draw() for _ in range(6)]
            pts = [tuple(a + lam * d for a, d in zip(base, direction))
                   for base, direction, lam in zip([base1] * 3 + [base2] * 3, [d1] * 3 + [d2] * 3, params)]
            return PappusConfig(*pts)
        except DegenerateConfigurationError:
            continue
    raise DegenerateConfigurationError(f"No non-degenerate configuration in {attempts} draws")


def complex_pappus_experiment(trials, depth, rng, complex_entries=True):
    """Per trial and depth: exact collinearity verdict, dual-point count, degenerate nodes."""
    rows = []
    for trial in range(trials):
        c = random_config(rng, complex_entries)
        collinear = incidence_certificate(c)
        for d in range(1, depth + 1):
            result = iterate_configs(c, d, strict=False)
            rows.append({
                "trial": trial,
                "depth": d,
                "collinear": collinear,
                "dual_points": len(result),
                "degenerate_nodes": len(result.failures),
            })
    frame = pd.DataFrame(rows)
    logger.info("complex Pappus experiment: %d trials, all collinear: %s", trials, bool(frame["collinear"].all()) if len(frame) else True)
    return frame