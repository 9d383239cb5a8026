import cmath
import math

import numpy as np
import pytest

from utils.cluster_utils import PointCloud
from utils.errors import (
    DegenerateConfigurationError,
    DimensionMismatchError,
    ResourceLimitError,
    UnsupportedCaseError,
)
from utils.kulkarni_utils import (
    ClosedFormLimitSet,
    KulkarniParams,
    approx_kulkarni,
    closed_form_cyclic_diag,
    closed_form_toral,
    closed_form_translation,
    count_lines,
    cross_check,
    cyclic_regions,
    describe_shape,
    discontinuity_return_count,
    hausdorff_to_closed_form,
    inoue_family,
    max_general_position,
    sample_ball,
    suspension,
    toral_family,
)
from utils.projective_utils import (
    ProjLine,
    ProjMap,
    ProjPoint,
    apply,
    compose,
    coordinate_point,
    distance_to_lines,
    fs_distance,
    fs_distance_array,
    inverse,
    line_grid,
)
from utils.word_utils import GeneratorSet, WordTree

from conftest import CYCLIC_EIGS

Z1 = ProjLine(np.array([1, 0, 0]))
Z3 = ProjLine(np.array([0, 0, 1]))
PLASTIC = [[0, 0, 1], [1, 0, 1], [0, 1, 0]]
CAT_MAP = [[2, 1], [1, 1]]


def lines_through_e3(*forms):
    return [ProjLine(np.array(f)) for f in forms]


def affine_image(m, z):
    """Action of a map on affine points (rows of (z1, z2)) in the chart z3 = 1."""
    homogeneous = np.column_stack([z, np.ones(len(z))]) @ m.matrix.T
    return homogeneous[:, :2] / homogeneous[:, 2:3]


def random_affine(rng, count):
    return rng.normal(size=(count, 2)) + 1j * rng.normal(size=(count, 2))


# ---------- closed forms -------------------------------------------------------

def test_cyclic_closed_form():
    cf = closed_form_cyclic_diag(CYCLIC_EIGS)
    assert len(cf.points) == 3
    assert all(t == {"L0", "L1"} for t in cf.point_tags)
    assert any(line == Z3 for line in cf.lines)
    assert any(line == Z1 for line in cf.lines)
    assert count_lines(cf) == (2, 2)
    assert describe_shape(cf) == "two lines"


def test_cyclic_closed_form_does_not_depend_on_order():
    a = closed_form_cyclic_diag(CYCLIC_EIGS)
    b = closed_form_cyclic_diag((3.0, 1j, 0.25))
    assert describe_shape(b) == "two lines"
    # e2 carries the middle modulus in both
    assert all(any(l1 == l2 for l2 in b.lines) for l1 in a.lines)


def test_cyclic_closed_form_needs_distinct_moduli():
    with pytest.raises(UnsupportedCaseError) as info:
        closed_form_cyclic_diag((1.0, 1j, 2.0))
    assert info.value.diagnostic["moduli"] == pytest.approx([1.0, 1.0, 2.0])
    assert info.value.exit_code == 4
    with pytest.raises(DimensionMismatchError):
        closed_form_cyclic_diag((1.0, 2.0))
    with pytest.raises(DegenerateConfigurationError):
        closed_form_cyclic_diag((0.0, 1.0, 2.0))


def test_translation_and_toral_closed_forms():
    assert describe_shape(closed_form_translation()) == "one line"
    assert count_lines(closed_form_translation()) == (1, 1)
    toral = closed_form_toral()
    assert count_lines(toral) == (4, 4)
    assert describe_shape(toral) == "4 lines"


def test_closed_form_rejects_duplicates_and_bad_tags():
    with pytest.raises(DegenerateConfigurationError):
        ClosedFormLimitSet(lines=[Z3, ProjLine(np.array([0, 0, 2j]))], line_tags=[{"L2"}, {"L2"}])
    with pytest.raises(DegenerateConfigurationError):
        ClosedFormLimitSet(lines=[Z3], line_tags=[{"L3"}])
    with pytest.raises(DegenerateConfigurationError):
        ClosedFormLimitSet(lines=[Z3], line_tags=[])
    cf = closed_form_translation()
    assert not cf.add_line(ProjLine(np.array([0, 0, -1])), {"L2"})
    assert cf.add_line(Z1, {"L2"})


def test_closed_form_sampling_and_distance():
    cf = closed_form_cyclic_diag(CYCLIC_EIGS)
    pts = cf.sample(per_line=50)
    assert pts.shape == (103, 3)
    assert np.max(cf.distance(pts)) < 1e-12
    far = np.array([[1, 1, 1]]) / math.sqrt(3)
    assert cf.distance(far)[0] == pytest.approx(math.asin(1 / math.sqrt(3)))


def test_closed_form_json():
    data = closed_form_cyclic_diag(CYCLIC_EIGS).to_json()
    assert data["lin"] == 2 and data["ling"] == 2
    assert data["shape"] == "two lines"
    assert data["points"][0]["tags"] == ["L0", "L1"]


# ---------- line counting ------------------------------------------------------

def test_three_concurrent_lines():
    cf = ClosedFormLimitSet(lines=lines_through_e3((1, 0, 0), (0, 1, 0), (1, 1, 0)), line_tags=[{"L2"}] * 3)
    assert count_lines(cf) == (3, 2)
    assert describe_shape(cf) == "three concurrent lines"


def test_three_lines_in_general_position():
    cf = ClosedFormLimitSet(lines=lines_through_e3((1, 0, 0), (0, 1, 0), (0, 0, 1)), line_tags=[{"L2"}] * 3)
    assert count_lines(cf) == (3, 3)
    assert describe_shape(cf) == "three lines in general position"


def test_max_general_position_with_a_pencil():
    pencil = lines_through_e3((1, 0, 0), (0, 1, 0), (1, 1, 0), (1, -1, 0))
    assert max_general_position(pencil) == 2
    assert max_general_position(pencil + [Z3]) == 3


def test_count_lines_bounds():
    many = [ProjLine(np.array([t, -1, 0])) for t in range(21)]
    cf = ClosedFormLimitSet(lines=many, line_tags=[{"L2"}] * 21)
    with pytest.raises(ResourceLimitError):
        count_lines(cf)
    assert cf.to_json()["lin"] is None
    cf.parametrized = True
    assert count_lines(cf) == (math.inf, math.inf)
    assert describe_shape(cf) == "infinite family of lines"


def test_describe_isolated_points():
    e = [coordinate_point(2, k) for k in range(3)]
    assert describe_shape(ClosedFormLimitSet()) == "empty"
    assert describe_shape(ClosedFormLimitSet(points=e[:1], point_tags=[{"L0"}])) == "point"
    assert describe_shape(ClosedFormLimitSet(points=e, point_tags=[{"L0"}] * 3)) == "3 points"
    mixed = ClosedFormLimitSet(points=[e[2]], point_tags=[{"L0"}], lines=[Z3], line_tags=[{"L2"}])
    assert describe_shape(mixed) == "line and point"


# ---------- discontinuity regions ---------------------------------------------

def test_cyclic_regions():
    regions = cyclic_regions(CYCLIC_EIGS)
    generic = ProjPoint([1, 1, 1])
    on_z3 = ProjPoint([1, 1, 0])
    on_z1 = ProjPoint([0, 1, 1])
    assert all(r.contains(generic)[0] for r in regions.values())
    assert [regions[k].contains(on_z3)[0] for k in ("omega0", "omega1", "omega2")] == [False, False, True]
    assert [regions[k].contains(on_z1)[0] for k in ("omega0", "omega1", "omega2")] == [False, True, False]
    assert not regions["omega1"].contains(coordinate_point(2, 2))[0]
    assert regions["omega1"].describe() == "omega1 = P^2 minus 1 line(s) and 1 point(s)"


def test_sample_ball_radius(rng):
    center = ProjPoint([1, 2j, -1])
    pts = sample_ball(center, 0.05, 500, rng)
    assert pts.shape == (500, 3)
    assert np.max(fs_distance_array(pts, center.coords)) <= 0.05 + 1e-12


def test_generic_ball_never_returns(cyclic_diag):
    assert discontinuity_return_count(cyclic_diag, ProjPoint([1, 1, 1]), 0.05) == 0


def test_ball_returns_under_finite_order():
    w = cmath.exp(2j * math.pi / 5)
    m = ProjMap.diagonal((1, w, w ** 2))
    assert discontinuity_return_count(m, ProjPoint([1, 1, 1]), 0.05, k_max=60) == 24


def test_ball_around_a_fixed_point_returns(cyclic_diag):
    assert discontinuity_return_count(cyclic_diag, coordinate_point(2, 0), 0.05, k_max=2) == 4


# ---------- families -----------------------------------------------------------

def test_suspension_with_infinite_scalars():
    sigma = GeneratorSet(1, [ProjMap.diagonal((2, 0.5))])
    gens, cf = suspension(sigma, [2.0])
    assert gens.rank == 2
    assert gens.labels == ["a", "b"]
    assert any(line == Z3 for line in cf.lines)
    assert count_lines(cf) == (3, 3)
    assert not cf.partial


def test_suspension_with_finite_scalars():
    sigma = GeneratorSet(1, [ProjMap.diagonal((2, 0.5))])
    _, cf = suspension(sigma, [cmath.exp(2j * math.pi / 3)])
    assert not any(line == Z3 for line in cf.lines)
    assert count_lines(cf) == (2, 2)
    e3 = coordinate_point(2, 2)
    assert np.max(distance_to_lines(e3.coords[None, :], cf.lines)) < 1e-12


def test_suspension_partial_and_parametrized(caplog):
    free = GeneratorSet(1, [ProjMap.diagonal((2, 0.5)), ProjMap(np.array([[1, 1], [1, 2]]))])
    _, cf = suspension(free, [2.0])
    assert cf.partial
    assert "partial" in caplog.text
    many = [ProjPoint([1, t]) for t in range(25)]
    _, cf = suspension(free, [2.0], limit_points=many)
    assert cf.parametrized
    assert count_lines(cf) == (math.inf, math.inf)


def test_suspension_rejects_bad_input(cyclic_group):
    with pytest.raises(DimensionMismatchError):
        suspension(cyclic_group, [2.0])
    with pytest.raises(DegenerateConfigurationError):
        suspension(GeneratorSet(1, [ProjMap.diagonal((2, 0.5))]), [0])


def test_toral_family_preserves_its_region(rng):
    gens, omega = toral_family(CAT_MAP)
    assert gens.rank == 11
    assert omega.components == 4
    z = random_affine(rng, 400)
    coords = np.column_stack([z, np.ones(len(z))])
    signs = omega.signs(coords)
    assert {tuple(s) for s in signs} == {(1, 1), (1, -1), (-1, 1), (-1, -1)}
    assert omega.contains(coords).all()
    tree = WordTree.build(gens, 2)
    for m in tree.maps[1:]:
        image = np.column_stack([affine_image(m, z), np.ones(len(z))])
        np.testing.assert_array_equal(omega.signs(image), signs)


def test_toral_region_excludes_real_points():
    _, omega = toral_family(CAT_MAP)
    assert not omega.contains(np.array([[0.3, -1.2, 1.0]])).any()


@pytest.mark.parametrize(
    "matrix, key",
    [([[7, 0], [0, 7]], "det"), ([[1, 1], [0, 1]], "trace"), ([[1.5, 0], [0, 1]], "matrix")],
)
def test_toral_family_diagnostics(matrix, key):
    with pytest.raises(UnsupportedCaseError) as info:
        toral_family(matrix)
    assert key in info.value.diagnostic


@pytest.mark.parametrize("matrix", [[[-2, -1], [-1, -1]], [[3, 1], [1, 0]], [[-3, 1], [1, 0]]])
def test_toral_family_rejects_negative_eigenvalues(matrix):
    with pytest.raises(UnsupportedCaseError) as info:
        toral_family(matrix)
    diagnostic = info.value.diagnostic
    assert {"det", "trace", "eigenvalues"} <= set(diagnostic)
    assert min(diagnostic["eigenvalues"]) < 0


def test_inoue_family_preserves_half_planes(rng):
    gens, omega = inoue_family(PLASTIC)
    assert gens.rank == 4
    alpha = gens.generators[0].matrix[0, 0] / gens.generators[0].matrix[2, 2]
    assert alpha.real == pytest.approx(1.324717957244746)
    z = random_affine(rng, 200)
    for m in gens.generators[1:]:
        np.testing.assert_allclose(affine_image(m, z)[:, 0].imag, z[:, 0].imag, atol=1e-12)
    tree = WordTree.build(gens, 3)
    for m in tree.maps[1:]:
        image = affine_image(m, z)
        assert np.all(np.sign(image[:, 0].imag) == np.sign(z[:, 0].imag))
        assert omega.contains(np.column_stack([image, np.ones(len(z))])).all()


def test_inoue_family_diagnostics():
    with pytest.raises(UnsupportedCaseError) as info:
        inoue_family(np.eye(3))
    assert info.value.diagnostic["det"] == 1
    with pytest.raises(UnsupportedCaseError):
        inoue_family([[2, 0, 0], [0, 1, 0], [0, 0, 1]])


# ---------- numerical layers ---------------------------------------------------

def test_params_json():
    params = KulkarniParams(depth=12, seed=3)
    data = params.to_json()
    assert data["depth"] == 12 and data["seed"] == 3
    assert data["k"] == 10


def test_approx_on_the_riemann_sphere():
    gens = GeneratorSet(1, [ProjMap.diagonal((2, 0.5))])
    approx = approx_kulkarni(gens, KulkarniParams(depth=12, grid=300, seed=1))
    counts = approx.counts()
    assert counts["L0"] == 2
    assert counts["L2"] == 0
    for p in approx.layer("L0").points():
        assert min(fs_distance(p, coordinate_point(1, k)) for k in range(2)) < 1e-9


def test_translation_group_accumulates_at_infinity():
    gens = GeneratorSet(2, [ProjMap(np.array([[1, 0, 1000], [0, 1, 0], [0, 0, 1]])), ProjMap(np.array([[1, 0, 0], [0, 1, 1000], [0, 0, 1]]))])
    approx = approx_kulkarni(gens, KulkarniParams(depth=6, grid=300, line_samples=500, seed=1))
    assert approx.counts()["L0"] > 0
    assert np.max(distance_to_lines(approx.cloud.coords, [Z3])) < 1e-2
    assert approx.params["distinct_elements"] == 85


def test_approx_rejects_large_word_trees():
    with pytest.raises(ResourceLimitError):
        approx_kulkarni(GeneratorSet(2, [ProjMap.diagonal(CYCLIC_EIGS), ProjMap.diagonal((1, 2, 3))]), KulkarniParams(depth=20, max_words=1000))


def test_hausdorff_edge_cases():
    empty = PointCloud([], 2)
    assert hausdorff_to_closed_form(empty, ClosedFormLimitSet()) == 0.0
    assert hausdorff_to_closed_form(empty, closed_form_translation()) == pytest.approx(math.pi / 2)
    on_line = PointCloud(np.array([[1, 0, 0], [0, 1, 0]]), 2)
    cf = ClosedFormLimitSet(points=[coordinate_point(2, 0), coordinate_point(2, 1)], point_tags=[{"L0"}] * 2)
    assert hausdorff_to_closed_form(on_line, cf) == pytest.approx(0, abs=1e-7)


@pytest.mark.slow
def test_cyclic_cross_check(cyclic_group):
    cf = closed_form_cyclic_diag(CYCLIC_EIGS)
    approx, distance = cross_check(cyclic_group, cf, KulkarniParams(depth=60, grid=10_000, seed=0))
    assert distance <= 1e-2
    e = np.eye(3)
    for name in ("L0", "L1"):
        layer = approx.layer(name)
        assert len(layer) > 0
        nearest = np.min([fs_distance_array(layer.coords, e[k]) for k in range(3)], axis=0)
        assert np.max(nearest) < 1e-4
    assert approx.counts()["L2"] > 0
    assert len(approx.lines) >= 2


def test_approx_grows_with_depth():
    gens = GeneratorSet(2, [ProjMap(np.array([[1, 0, 1000], [0, 1, 0], [0, 0, 1]])), ProjMap(np.array([[1, 0, 0], [0, 1, 1000], [0, 0, 1]]))])
    distinct = [
        approx_kulkarni(gens, KulkarniParams(depth=d, grid=200, line_samples=200, seed=1)).params["distinct_elements"]
        for d in (2, 4, 6)
    ]
    assert distinct == sorted(distinct)
    assert distinct[0] < distinct[-1] == 85


def test_conjugate_group_has_conjugate_fixed_layer():
    g = ProjMap(np.array([[1, 0.5, 0], [0, 1, 0.3j], [0.2, 0, 1]]))
    base = GeneratorSet(2, [ProjMap.diagonal(CYCLIC_EIGS)])
    conjugated = GeneratorSet(2, [compose(compose(g, base.generators[0]), inverse(g))])
    params = KulkarniParams(depth=8, grid=300, line_samples=200, seed=2)
    moved = [apply(g, p) for p in approx_kulkarni(base, params).layer("L0").points()]
    found = approx_kulkarni(conjugated, params).layer("L0").points()
    assert len(moved) == len(found) == 3
    for q in moved:
        assert min(fs_distance(p, q) for p in found) < 1e-8


def test_suspension_by_infinite_scalars_contains_the_horizon():
    sigma = GeneratorSet(1, [ProjMap.diagonal((2, 1))])
    gens, cf = suspension(sigma, [2.0])
    approx = approx_kulkarni(gens, KulkarniParams(depth=6, grid=500, line_samples=80_000, seed=0))
    horizon = line_grid(Z3, 500)
    assert np.max(approx.distance(horizon)) < 1e-2
    # diagonal groups only produce coordinate subspaces in these layers
    for name in ("L0", "L2"):
        layer = approx.layer(name)
        if len(layer):
            assert np.max(cf.distance(layer.coords)) < 1e-9


@pytest.mark.slow
def test_suspension_by_finite_scalars_cross_check():
    sigma = GeneratorSet(1, [ProjMap.diagonal((2, 1))])
    gens, cf = suspension(sigma, [cmath.exp(2j * math.pi / 3)])
    assert gens.rank == 1
    approx, distance = cross_check(gens, cf, KulkarniParams(depth=60, grid=10_000, seed=0))
    assert distance <= 1e-2
    assert np.max(distance_to_lines(approx.cloud.coords, [Z3])) > 0.1
