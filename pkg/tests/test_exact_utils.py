import pytest
from sympy.polys.domains import QQ, QQ_I

from utils.errors import ConfigSchemaError, DegenerateConfigurationError
from utils.exact_utils import (
    ONE,
    ZERO,
    det3,
    dot,
    dual_image,
    format_scalar,
    join,
    map_from_correspondence,
    mat_vec,
    matrix,
    meet,
    normalize,
    parse_scalar,
    projective_equal,
    same_point,
    to_complex,
    vector,
)


@pytest.mark.parametrize(
    "text, expected",
    [
        ("3/4", QQ_I(QQ(3, 4), 0)),
        ("-2", QQ_I(-2, 0)),
        ("i", QQ_I(0, 1)),
        ("1-i", QQ_I(1, -1)),
        ("1/2+3/4i", QQ_I(QQ(1, 2), QQ(3, 4))),
    ],
)
def test_parse_scalar(text, expected):
    assert parse_scalar(text) == expected


@pytest.mark.parametrize("text", ["3/4", "-2", "1/2+3/4i", "-5/3i", "0"])
def test_format_scalar_is_canonical(text):
    assert format_scalar(parse_scalar(text)) == text


def test_parse_scalar_rejects_garbage():
    with pytest.raises(ConfigSchemaError):
        parse_scalar("two")
    with pytest.raises(ConfigSchemaError):
        parse_scalar("  ")


def test_floating_complex_is_not_exact():
    with pytest.raises(ConfigSchemaError):
        vector([0.5j, 1, 1])


def test_to_complex():
    assert to_complex(parse_scalar("1/4-2i")) == complex(0.25, -2)


def test_normalize_first_nonzero_is_one():
    v = normalize(vector([0, "2/3", "4"]))
    assert v == (ZERO, ONE, QQ_I(6, 0))
    with pytest.raises(DegenerateConfigurationError):
        normalize(vector([0, 0, 0]))


def test_join_and_meet():
    p, q = vector([0, 0, 1]), vector([1, 0, 1])
    line = join(p, q)
    assert same_point(line, vector([0, 1, 0]))
    assert same_point(meet(line, vector([1, 0, 0])), p)
    with pytest.raises(DegenerateConfigurationError):
        join(p, vector([0, 0, 5]))


def test_collinearity_determinant():
    assert det3(vector([0, 0, 1]), vector([1, 1, 1]), vector([2, 2, 1])) == ZERO
    assert det3(vector([1, 0, 0]), vector([0, 1, 0]), vector([0, 0, 1])) == ONE


def test_map_from_correspondence_gaussian():
    source = [vector(v) for v in ([1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1])]
    target = [vector(v) for v in (["i", 0, 1], [0, 1, "1/2"], [1, 1, 0], [2, 0, 3])]
    m = map_from_correspondence(source, target)
    for s, t in zip(source, target):
        assert same_point(mat_vec(m, s), t)


def test_projective_equal_up_to_scalar():
    a = matrix([["1", "2"], ["0", "1/3"]])
    b = matrix([["3", "6"], ["0", "1"]])
    assert projective_equal(a, b)
    assert not projective_equal(a, matrix([["1", "2"], ["0", "1"]]))


def test_dual_image_preserves_incidence():
    m = matrix([[1, 2, 0], [0, 1, "i"], [1, 0, 1]])
    p, q = vector([1, 2, 3]), vector([0, 1, "1/2"])
    line = join(p, q)
    image = dual_image(m, line)
    assert dot(image, mat_vec(m, p)) == ZERO
    assert dot(image, mat_vec(m, q)) == ZERO
