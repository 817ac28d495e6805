"""Exact scalar / polynomial / form algebra."""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from melnikov_kit.algebra import (BivarPoly, GaussianRational, OneForm,
                                  ParseError, exterior_d, format_poly,
                                  parse_poly, wedge)

# -- strategies -------------------------------------------------------------

rationals = st.builds(
    Fraction,
    st.integers(min_value=-40, max_value=40),
    st.integers(min_value=1, max_value=12),
)
scalars = st.builds(GaussianRational, rationals, rationals)


@st.composite
def polys(draw, max_degree=3, max_terms=6):
    n = draw(st.integers(min_value=0, max_value=max_terms))
    p = BivarPoly.zero()
    for _ in range(n):
        i = draw(st.integers(min_value=0, max_value=max_degree))
        j = draw(st.integers(min_value=0, max_value=max_degree - i))
        p = p + BivarPoly.monomial(i, j, draw(scalars))
    return p


forms = st.builds(OneForm, polys(), polys())


# -- GaussianRational -------------------------------------------------------


@given(scalars, scalars, scalars)
def test_scalar_ring_axioms(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) * c == a * c + b * c
    assert a + (b + c) == (a + b) + c


@given(scalars)
def test_scalar_inverse(a):
    if not a.is_zero():
        assert (a * (GaussianRational(1) / a)) == GaussianRational(1)
    assert (a - a).is_zero()


@given(scalars)
def test_scalar_conjugate_norm(a):
    n = a * a.conjugate()
    assert n.im == 0
    assert n.re >= 0


def test_scalar_sqrt_exact():
    v = GaussianRational(Fraction(9, 4))
    r = v.sqrt()
    assert r is not None and r * r == v
    assert GaussianRational(-1).sqrt() == GaussianRational(0, 1)


def test_scalar_complex_view():
    z = GaussianRational(Fraction(3, 2), Fraction(-1, 4))
    assert complex(z) == 1.5 - 0.25j
    assert float(GaussianRational(Fraction(1, 8))) == 0.125


# -- parser / printer -------------------------------------------------------


@given(polys())
def test_parse_print_round_trip(p):
    assert parse_poly(format_poly(p)) == p


def test_parse_basics():
    p = parse_poly("x^2*y - 1/3*y^3 + x*y")
    assert p.coeff(2, 1) == GaussianRational(1)
    assert p.coeff(0, 3) == GaussianRational(Fraction(-1, 3))
    q = parse_poly("(x + y)^2")
    assert q == parse_poly("x^2 + 2*x*y + y^2")


def test_parse_imaginary_unit():
    p = parse_poly("i*x + (2 - i)*y")
    assert p.coeff(1, 0) == GaussianRational(0, 1)
    assert p.coeff(0, 1) == GaussianRational(2, -1)


def test_parse_division_only_numeric():
    assert parse_poly("1/3*y^3") == parse_poly("y^3").scale(
        GaussianRational(Fraction(1, 3)))
    # '/' binds numeric literals only; rational-function syntax is rejected
    with pytest.raises(ParseError):
        parse_poly("y^3/3")
    with pytest.raises(ParseError):
        parse_poly("y^3/x")
    with pytest.raises(ParseError):
        parse_poly("1/(x + y)")


def test_parse_rejects_garbage():
    for bad in ("x +", "z^2", "x^^2", ""):
        with pytest.raises(ParseError):
            parse_poly(bad)
    assert parse_poly("x**2") == parse_poly("x^2")


# -- polynomial ring --------------------------------------------------------


@given(polys(), polys(), polys())
def test_poly_ring_axioms(p, q, r):
    assert p * q == q * p
    assert p * (q + r) == p * q + p * r
    assert (p + q) + r == p + (q + r)


@given(polys(), polys())
def test_poly_degree_of_product(p, q):
    if not p.is_zero() and not q.is_zero():
        assert (p * q).degree == p.degree + q.degree


@given(polys())
def test_homogeneous_reassembly(p):
    total = BivarPoly.zero()
    for deg, part in p.homogeneous_parts():
        assert part.is_zero() or part.degree == deg
        total = total + part
    assert total == p


@given(polys())
def test_diff_leibniz_via_square(p):
    lhs = (p * p).diff("x")
    rhs = BivarPoly.const(2) * p * p.diff("x")
    assert lhs == rhs


def test_eval_matches_float_view():
    p = parse_poly("x^2*y - 1/3*y^3 + x*y")
    v = p.eval(GaussianRational(2), GaussianRational(Fraction(1, 2)))
    assert complex(v) == pytest.approx(2 ** 2 * 0.5 - (0.5 ** 3) / 3 + 2 * 0.5)


def test_translate_compose():
    p = parse_poly("x^2 + y")
    t = p.translate(GaussianRational(1), GaussianRational(-2))
    assert t == parse_poly("(x + 1)^2 + y - 2")


# -- forms ------------------------------------------------------------------


@given(polys())
def test_d_squared_is_zero(p):
    assert exterior_d(exterior_d(p)).is_zero()


@given(forms, forms)
def test_wedge_antisymmetry(w1, w2):
    a = wedge(w1, w2)
    b = wedge(w2, w1)
    assert (a + b).is_zero()


@given(polys(), polys())
def test_d_product_rule(p, q):
    lhs = exterior_d(p * q)
    rhs = exterior_d(p) * q + exterior_d(q) * p
    assert (lhs - rhs).is_zero()


def test_form_mul_dispatch():
    # polynomial * form must build a form, never corrupt coefficients
    p = parse_poly("x")
    w = OneForm(parse_poly("y"), parse_poly("0"))
    for prod in (p * w, w * p):
        assert isinstance(prod, OneForm)
        assert prod.A == parse_poly("x*y")
