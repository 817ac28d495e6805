"""Formal center obstructions at a Morse point."""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from melnikov_kit.algebra import (BivarPoly, GaussianRational, OneForm,
                                  TwoForm, exterior_d, parse_poly, wedge)
from melnikov_kit.center import (float_center_probe, normalize_linear_part,
                                 obstructions, s_apply, s_solve,
                                 symbolic_quadratic_germ)

XY = parse_poly("x*y")


def _germ(extra: str) -> OneForm:
    """d(xy) + d(extra-free part): quick germ builder from two polys."""
    return exterior_d(XY)


def test_s_eigenvalue_formula():
    # S_n is diagonal on monomials with eigenvalue (j - i)
    for n in range(1, 13):
        for i in range(n + 1):
            j = n - i
            g = BivarPoly.monomial(i, j)
            out = s_apply(n, g)
            expect = BivarPoly.monomial(i, j, GaussianRational(j - i))
            assert out.C == expect


def test_s_solve_inverts_off_diagonal():
    for n in range(1, 13):
        rhs = BivarPoly.zero()
        for i in range(n + 1):
            j = n - i
            if i != j:
                rhs = rhs + BivarPoly.monomial(i, j, GaussianRational(i + 1))
        f, obstruction = s_solve(n, TwoForm(rhs))
        assert obstruction == GaussianRational(0) or obstruction.is_zero()
        assert s_apply(n, f).C == rhs


def test_s_odd_bijective():
    # odd n: no diagonal monomial exists, so S_n is bijective: solving and
    # reapplying is the identity for every monomial
    for n in range(1, 13, 2):
        for i in range(n + 1):
            j = n - i
            rhs = BivarPoly.monomial(i, j, GaussianRational(3, -2))
            f, obstruction = s_solve(n, rhs)
            assert obstruction.is_zero()
            assert s_apply(n, f).C == rhs


def test_s_even_diagonal_obstruction():
    n = 6
    rhs = BivarPoly.monomial(3, 3, GaussianRational(Fraction(5, 7)))
    f, obstruction = s_solve(n, rhs)
    assert obstruction == GaussianRational(Fraction(5, 7))
    assert f.is_zero()


def test_s_degree_mismatch_rejected():
    with pytest.raises(ValueError):
        s_apply(3, parse_poly("x^2"))


# -- hand-checked obstruction examples ---------------------------------------


def test_hamiltonian_germs_all_orders_zero():
    for extra in ("x^4", "y^5", "x^3*y^2 - 1/2*x*y^4", "x^3 + y^3 + x^2*y^2"):
        omega = exterior_d(XY + parse_poly(extra))
        rep = obstructions(omega, 12)
        assert rep.mode == "exact"
        assert set(rep.obstructions) == {4, 6, 8, 10, 12}
        assert rep.all_zero()


def test_quadratic_x2dy_first_obstruction_vanishes():
    omega = exterior_d(XY) + OneForm(parse_poly("0"), parse_poly("x^2"))
    rep = obstructions(omega, 4)
    assert rep.obstructions[4].is_zero()


def test_quadratic_xydx_two_obstructions_vanish():
    omega = exterior_d(XY) + OneForm(parse_poly("x*y"), parse_poly("0"))
    rep = obstructions(omega, 6)
    assert rep.obstructions[4].is_zero()
    assert rep.obstructions[6].is_zero()


def test_obstructed_germ_detected():
    omega = OneForm(parse_poly("y + x^2*y + 2*x*y^2"),
                    parse_poly("x + x^2*y + x^3"))
    rep = obstructions(omega, 8)
    assert not rep.obstructions[4].is_zero()
    assert not rep.all_zero()


def test_kernel_gauge_invariance_on_center_suite():
    # through the first nonvanishing obstruction the P_n are canonical;
    # on center-type germs (all zero) every P_n is gauge-free
    germs = [
        exterior_d(XY) + OneForm(parse_poly("x*y"), parse_poly("0")),
        exterior_d(XY) + OneForm(parse_poly("0"), parse_poly("x^2")),
        exterior_d(XY + parse_poly("x^3*y^2")),
        exterior_d(XY + parse_poly("x^4 + y^5")),
    ]
    gauge = {4: GaussianRational(Fraction(1, 3)), 6: GaussianRational(-2)}
    for omega in germs:
        base = obstructions(omega, 10)
        shifted = obstructions(omega, 10, kernel_gauge=gauge)
        assert base.obstructions == shifted.obstructions
        # the gauge really did change the jet choices
        assert shifted.jets[4] - base.jets[4] == BivarPoly.monomial(
            2, 2, gauge[4])


def test_kernel_gauge_leading_obstruction_canonical():
    # past the first nonzero P_n gauge freedom may leak in, but the
    # leading obstruction itself never moves
    omega = OneForm(parse_poly("y + x^2*y + 2*x*y^2"),
                    parse_poly("x + x^2*y + x^3"))
    base = obstructions(omega, 8)
    shifted = obstructions(omega, 8, kernel_gauge={
        4: GaussianRational(Fraction(1, 3)),
        6: GaussianRational(-2),
    })
    assert base.obstructions[4] == shifted.obstructions[4]
    assert not base.obstructions[4].is_zero()


def test_symbolic_quadratic_germ_consistency():
    from melnikov_kit.params import ParamPoly

    omega, names = symbolic_quadratic_germ()
    rep = obstructions(omega, 4)
    assert rep.mode == "symbolic"
    p4 = rep.obstructions[4]
    assert isinstance(p4, ParamPoly)
    # each coefficient assignment must evaluate the symbolic P_4 to the
    # exact P_4 of the instantiated germ
    zero = GaussianRational(0)
    assignments = [
        {"b02": GaussianRational(1)},
        {"a20": GaussianRational(1), "a11": GaussianRational(Fraction(1, 2)),
         "a02": GaussianRational(-1), "b20": GaussianRational(2),
         "b02": GaussianRational(Fraction(2, 3)), "h20": GaussianRational(1),
         "h11": GaussianRational(-3)},
        {"h02": GaussianRational(Fraction(5, 7)),
         "a11": GaussianRational(2), "b11": GaussianRational(-1)},
    ]
    x = BivarPoly.monomial(1, 0)
    y = BivarPoly.monomial(0, 1)
    for partial in assignments:
        vals = {n: partial.get(n, zero) for n in names}
        A = y + BivarPoly.monomial(2, 0, vals["a20"]) \
            + BivarPoly.monomial(1, 1, vals["a11"]) \
            + BivarPoly.monomial(0, 2, vals["a02"])
        B = x + BivarPoly.monomial(2, 0, vals["b20"]) \
            + BivarPoly.monomial(1, 1, vals["b11"]) \
            + BivarPoly.monomial(0, 2, vals["b02"])
        h = BivarPoly.monomial(2, 0, vals["h20"]) \
            + BivarPoly.monomial(1, 1, vals["h11"]) \
            + BivarPoly.monomial(0, 2, vals["h02"])
        inst = obstructions(OneForm(A + h * y, B - h * x), 4)
        assert p4.subs([vals[n] for n in names]) == inst.obstructions[4]


# -- normalization ------------------------------------------------------------


def test_normalize_rescales_and_rotates():
    # omega = 3 d(xy) written in rotated coordinates still normalizes
    omega = OneForm(parse_poly("3*y"), parse_poly("3*x"))
    norm = normalize_linear_part(omega)
    assert norm.mode == "exact"
    assert norm.omega.A.coeff(0, 1) == GaussianRational(1)
    assert norm.omega.B.coeff(1, 0) == GaussianRational(1)
    rep = obstructions(norm.omega, 6)
    assert rep.all_zero()


def test_normalize_rejects_non_center_type():
    # dual field of 2y dx + x dy has nonzero trace: not a center germ
    with pytest.raises(ValueError):
        normalize_linear_part(OneForm(parse_poly("2*y"), parse_poly("x")))
    # saddle-node (zero determinant)
    with pytest.raises(ValueError):
        normalize_linear_part(OneForm(parse_poly("y"), parse_poly("0")))
    # nonsingular at the origin
    with pytest.raises(ValueError):
        normalize_linear_part(OneForm(parse_poly("x + 1"), parse_poly("y")))


def test_normalize_circle_form():
    # x dx + y dy: dual field (y, -x), trace 0, det 1, eigenvalues (i, -i)
    omega = OneForm(parse_poly("x"), parse_poly("y"))
    norm = normalize_linear_part(omega)
    assert norm.mode == "exact"
    rep = obstructions(norm.omega, 8)
    assert rep.all_zero()


def test_float_probe_matches_exact_verdicts():
    good = exterior_d(XY + parse_poly("x^3*y^2"))
    bad = OneForm(parse_poly("y + x^2*y + 2*x*y^2"),
                  parse_poly("x + x^2*y + x^3"))
    assert float_center_probe(good, (0.0, 0.0), order=6)
    assert not float_center_probe(bad, (0.0, 0.0), order=6)
