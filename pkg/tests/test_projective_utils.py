import math

import numpy as np
import pytest

from utils.errors import DegenerateConfigurationError, DimensionMismatchError, GeometryError
from utils.projective_utils import (
    ProjLine,
    ProjMap,
    ProjPoint,
    apply,
    apply_to_line,
    compose,
    coordinate_point,
    distance_to_lines,
    fixed_points,
    fs_distance,
    intersect_lines,
    inverse,
    is_identity,
    line_contains,
    line_grid,
    line_through,
    lines_disjoint,
    map_from_json,
    normalize_vector,
    point_line_distance,
    power,
    random_projmap,
    random_unitary,
    to_chart,
)


def random_point(rng, n=2):
    return ProjPoint(rng.normal(size=n + 1) + 1j * rng.normal(size=n + 1))


# ---------- points and maps ---------------------------------------------------

def test_normalize_is_idempotent(rng):
    v = rng.normal(size=3) + 1j * rng.normal(size=3)
    once = normalize_vector(v)
    np.testing.assert_allclose(normalize_vector(once), once, atol=1e-15)
    assert abs(np.linalg.norm(once) - 1) < 1e-15
    assert abs(once[0].imag) < 1e-15 and once[0].real > 0


def test_zero_vector_rejected():
    with pytest.raises(GeometryError):
        ProjPoint([0, 0, 0])


def test_apply_identity():
    p = ProjPoint([1, 2, 3])
    assert apply(ProjMap.identity(2), p) == p
    np.testing.assert_allclose(apply(ProjMap.identity(2), p).coords, np.array([1, 2, 3]) / math.sqrt(14))


def test_cyclic_map_attracts_to_e3(cyclic_diag):
    e3 = coordinate_point(2, 2)
    assert apply(cyclic_diag, e3) == e3
    p = ProjPoint([1, 1, 1])
    for _ in range(40):
        p = apply(cyclic_diag, p)
    assert fs_distance(p, e3) < 1e-6


def test_apply_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        apply(ProjMap.identity(2), ProjPoint([1, 0]))


def test_apply_distributes_over_composition(rng):
    m1, m2 = random_projmap(2, rng), random_projmap(2, rng)
    p = random_point(rng)
    assert fs_distance(apply(compose(m1, m2), p), apply(m1, apply(m2, p))) < 1e-9


def test_determinant_normalized_and_scale_invariant(rng):
    m = random_projmap(2, rng)
    assert abs(np.linalg.det(m.matrix) - 1) < 1e-9
    assert ProjMap(3.5 * m.matrix) == m


def test_inverse_and_power(cyclic_diag):
    assert is_identity(compose(cyclic_diag, inverse(cyclic_diag)))
    np.testing.assert_allclose(
        np.abs(np.diag(power(cyclic_diag, 3).matrix)),
        np.abs(np.diag(cyclic_diag.matrix)) ** 3,
        rtol=1e-12,
    )


def test_singular_matrix_rejected():
    with pytest.raises(GeometryError):
        ProjMap(np.array([[1, 2], [2, 4]]))


def test_exact_map_from_json():
    m = map_from_json([["1", "1/2"], ["0", "1"]])
    assert m.exact is not None
    assert m.to_json() == [["1", "1/2"], ["0", "1"]]


# ---------- Fubini–Study metric ----------------------------------------------

def test_fs_distance_examples():
    e1, e2 = coordinate_point(2, 0), coordinate_point(2, 1)
    assert fs_distance(e1, e1) == 0
    assert fs_distance(e1, e2) == pytest.approx(math.pi / 2)
    assert fs_distance(e1, ProjPoint([1, 1, 0])) == pytest.approx(math.pi / 4)


def test_fs_distance_is_a_metric(rng):
    for _ in range(50):
        p, q, r = (random_point(rng) for _ in range(3))
        assert fs_distance(p, q) == pytest.approx(fs_distance(q, p), abs=1e-12)
        assert fs_distance(p, r) <= fs_distance(p, q) + fs_distance(q, r) + 1e-9
        assert 0 <= fs_distance(p, q) <= math.pi / 2 + 1e-12


def test_fs_distance_unitary_invariance(rng):
    u = ProjMap(random_unitary(2, rng))
    for _ in range(20):
        p, q = random_point(rng), random_point(rng)
        assert fs_distance(apply(u, p), apply(u, q)) == pytest.approx(fs_distance(p, q), abs=1e-9)


# ---------- fixed points ------------------------------------------------------

def test_fixed_points_of_cyclic_diag(cyclic_diag):
    result = fixed_points(cyclic_diag)
    assert len(result) == 3
    assert not result.defective
    for k in range(3):
        assert any(p == coordinate_point(2, k) for p in result)


def test_fixed_points_parabolic_flagged(parabolic):
    result = fixed_points(parabolic)
    assert len(result) == 1
    assert result.points[0] == ProjPoint([1, 0])
    assert result.defective


def test_fixed_points_conjugation_covariant(cyclic_diag, rng):
    g = random_projmap(2, rng)
    conj = compose(compose(g, cyclic_diag), inverse(g))
    result = fixed_points(conj)
    expected = [apply(g, coordinate_point(2, k)) for k in range(3)]
    assert len(result) == 3
    for q in expected:
        assert min(fs_distance(p, q) for p in result) < 1e-9


# ---------- lines -------------------------------------------------------------

def test_line_through_coordinate_points():
    e1, e2, e3 = (coordinate_point(2, k) for k in range(3))
    assert line_through(e1, e2) == ProjLine(np.array([0, 0, 1]))
    assert line_through(e2, e3) == ProjLine(np.array([1, 0, 0]))
    assert line_through(ProjPoint([1, 0, 1]), ProjPoint([0, 1, 1])) == ProjLine(np.array([-1, -1, 1]))


def test_line_through_coincident_points():
    p = ProjPoint([1, 2, 3])
    with pytest.raises(DegenerateConfigurationError):
        line_through(p, ProjPoint([2, 4, 6]))


def test_intersect_lines_is_dual(rng):
    p, q, r = (random_point(rng) for _ in range(3))
    assert intersect_lines(line_through(p, q), line_through(p, r)) == p
    e1, e2, e3 = (coordinate_point(2, k) for k in range(3))
    assert intersect_lines(ProjLine(np.array([0, 0, 1])), ProjLine(np.array([1, 0, 0]))) == e2


def test_point_line_distance_examples():
    z3 = ProjLine(np.array([0, 0, 1]))
    assert point_line_distance(coordinate_point(2, 0), z3) == pytest.approx(0, abs=1e-15)
    assert point_line_distance(coordinate_point(2, 2), z3) == pytest.approx(math.pi / 2)
    assert point_line_distance(ProjPoint([1, 1, 1]), z3) == pytest.approx(math.asin(1 / math.sqrt(3)))


def test_apply_to_line_preserves_incidence(rng):
    m = random_projmap(2, rng)
    p, q = random_point(rng), random_point(rng)
    line = line_through(p, q)
    assert line_contains(apply_to_line(m, line), apply(m, p), tol=1e-9)


def test_line_grid_lies_on_line():
    line = ProjLine(np.array([1, -1, 0.5j]))
    pts = line_grid(line, 200)
    assert pts.shape == (200, 3)
    assert np.max(np.abs(pts @ line.forms[0])) < 1e-12
    assert np.max(distance_to_lines(pts / np.linalg.norm(pts, axis=1, keepdims=True), [line])) < 1e-9


def test_distance_to_lines_without_lines():
    np.testing.assert_allclose(distance_to_lines(np.eye(3, dtype=complex), []), np.full(3, math.pi / 2))


def test_p3_lines_disjoint():
    e = [coordinate_point(3, k) for k in range(4)]
    l1 = line_through(e[0], e[1])
    l2 = line_through(e[2], e[3])
    l3 = line_through(e[1], e[2])
    assert lines_disjoint(l1, l2)
    assert not lines_disjoint(l1, l3)


# ---------- charts ------------------------------------------------------------

def test_to_chart_drops_points_at_infinity():
    pts = [ProjPoint([1, 2, 1]), ProjPoint([1, 0, 0]), ProjPoint([0, 1, 2])]
    affine, dropped = to_chart(pts, 2)
    assert dropped == 1
    np.testing.assert_allclose(affine, np.array([[1, 2], [0, 0.5]]), atol=1e-12)
