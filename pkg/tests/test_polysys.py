import pickle
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from circlesum.errors import ParseError, ShapeError
from circlesum.polysys import (GradedSystem, Polynomial, degree_part, evaluate, format_polynomial,
                               parse_polynomial, validate_system)

from conftest import polynomials, random_polynomial


def P(text, n=None):
    return parse_polynomial(text, n)


@pytest.mark.parametrize("text,ell,expected", [
    ("x1^2 + 3*x1 + 5", 2, "x1^2"),
    ("x1^2 + 3*x1 + 5", 1, "3*x1"),
    ("x1*x2 + x1 + 7", 0, "7"),
    ("x1*x2 + x1 + 7", 5, "0"),
])
def test_degree_part_examples(text, ell, expected):
    p = P(text)
    assert degree_part(p, ell) == P(expected, p.n)


@pytest.mark.parametrize("text,x,expected", [
    ("x1^2", [3], 9),
    ("x1*x2 + x1", [2, 5], 12),
    ("x1^3 - x1", [-2], -6),
])
def test_evaluate_examples(text, x, expected):
    assert evaluate(P(text), x) == expected


def test_evaluate_big_integers():
    p = P("x1^5*x2^3 - 7")
    x = [10**12, -(10**9)]
    assert evaluate(p, x) == (10**12) ** 5 * (-(10**9)) ** 3 - 7


def test_evaluate_dimension_mismatch():
    with pytest.raises(ShapeError):
        evaluate(P("x1*x2"), [1])


def test_validate_wrong_degree():
    s = GradedSystem.from_blocks(1, {2: ["x1 + 1"]})
    v = validate_system(s)
    assert len(v) == 1 and (v[0].ell, v[0].r) == (2, 1)


def test_validate_well_formed():
    s = GradedSystem.from_blocks(2, {2: ["x1^2"], 1: ["x1 + x2"]})
    assert validate_system(s) == []
    assert s.block_sizes == (1, 1)
    assert s.R == 2 and s.d == 2


def test_validate_n_mismatch():
    s = GradedSystem(2, ((Polynomial(2, {(1, 0): 1}), Polynomial(3, {(0, 0, 1): 1})),))
    assert len(validate_system(s)) == 1


def test_validate_zero_entry():
    s = GradedSystem(1, ((Polynomial.zero(1),),))
    assert len(validate_system(s)) == 1


def test_forms_are_top_degree_parts():
    s = GradedSystem.from_blocks(2, {2: ["x1^2 + 3*x2 + 1"], 1: ["x1 - 4"]})
    assert s.forms(2) == (P("x1^2", 2),)
    assert s.forms(1) == (P("x1", 2),)


def test_parse_format_canonical():
    p = P("7 - x3 + 3*x2*x1^2")
    assert format_polynomial(p) == "3*x1^2*x2 - x3 + 7"
    assert format_polynomial(Polynomial.zero(2)) == "0"
    assert P("(x1 + x2)^2") == P("x1^2 + 2*x1*x2 + x2^2")
    assert P("-(x1 - 2)*3") == P("-3*x1 + 6")


@pytest.mark.parametrize("bad,token", [("x1^", "^"), ("x1 + * x2", "*"), ("x0", "x0"),
                                       ("2.5*x1", "."), ("(x1", None), ("x1^-1", "-")])
def test_parse_errors(bad, token):
    with pytest.raises(ParseError) as exc:
        P(bad)
    if token is not None:
        assert exc.value.token == token


def test_parse_variable_out_of_range():
    with pytest.raises(ParseError):
        P("x3", 2)


@settings(max_examples=200, deadline=None)
@given(polynomials(n=3))
def test_round_trip(p):
    text = format_polynomial(p)
    q = P(text, 3)
    assert q == p
    assert format_polynomial(q) == text


@settings(max_examples=200, deadline=None)
@given(polynomials(n=2, max_deg=4))
def test_degree_parts_partition(p):
    total = Polynomial.zero(2)
    for ell in range(0, 9):
        part = degree_part(p, ell)
        assert degree_part(part, ell) == part
        total = total + part
    assert total == p


def test_ring_homomorphism(rng):
    for _ in range(1000):
        n = rng.randint(1, 3)
        p = random_polynomial(rng, n, 3)
        q = random_polynomial(rng, n, 3)
        x = [rng.randint(-50, 50) for _ in range(n)]
        assert evaluate(p + q, x) == evaluate(p, x) + evaluate(q, x)
        assert evaluate(p * q, x) == evaluate(p, x) * evaluate(q, x)
        assert evaluate(p - q, x) == evaluate(p, x) - evaluate(q, x)


def test_derivative_and_compose():
    p = P("x1^3*x2 + 2*x2^2")
    assert p.derivative(1) == P("3*x1^2*x2", 2)
    assert p.derivative(2) == P("x1^3 + 4*x2", 2)
    sub = p.compose([P("x1 + 1", 1), P("2", 1)])
    assert sub == P("2*(x1 + 1)^3 + 8", 1)


def test_coefficients_must_be_integers():
    with pytest.raises(TypeError):
        Polynomial(1, {(1,): 0.5})


def test_immutable_and_picklable():
    p = P("x1*x2 - 3")
    assert pickle.loads(pickle.dumps(p)) == p
    assert hash(p) == hash(P("-3 + x2*x1"))
    with pytest.raises(AttributeError):
        p.n = 4
