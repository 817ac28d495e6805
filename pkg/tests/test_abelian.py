"""Abelian integrals over traced cycles: exact values, error bounds, poles."""

import cmath

import numpy as np
import pytest

from melnikov_kit.abelian import (
    FiberChain,
    PoleProximity,
    QuadratureFailure,
    RationalForm,
    integrate,
    integrate_many,
    monomial_basis,
    residue_vanishing,
)
from melnikov_kit.algebra import OneForm, exterior_d, parse_poly
from melnikov_kit.fibration import Cycle, critical_data, trace_to_level
from melnikov_kit.foliation import PencilSpec

XDY = OneForm(parse_poly("0"), parse_poly("x"))
YDX = OneForm(parse_poly("y"), parse_poly("0"))


def test_circle_area_periods(vdp_cdata, vdp_guide, cfg):
    # level t = 2 is the circle of radius 2, traced counterclockwise
    v, e = integrate(XDY, vdp_guide, vdp_cdata.num, cfg)
    assert abs(v - 4 * cmath.pi) < 1e-9 and e < 1e-9
    v, e = integrate(YDX, vdp_guide, vdp_cdata.num, cfg)
    assert abs(v + 4 * cmath.pi) < 1e-9 and e < 1e-9


def test_exact_forms_integrate_to_zero(vdp_cdata, vdp_guide, xy_cdata, cfg):
    for g in ("x^2*y + 3*x*y", "x^4 - y^3 + x*y^2", "x"):
        dg = exterior_d(parse_poly(g))
        v, e = integrate(dg, vdp_guide, vdp_cdata.num, cfg)
        assert abs(v) <= max(10 * e, 1e-9)
    cyc = trace_to_level(xy_cdata, 0, 1.25, cfg=cfg)
    dg = exterior_d(parse_poly("x^2*y - x*y^3"))
    v, e = integrate(dg, cyc, xy_cdata.num, cfg)
    assert abs(v) <= max(10 * e, 1e-9)


def test_linearity_on_shared_scaffold(vdp_cdata, vdp_guide, cfg):
    a, b = 3.0, -2.5
    combo = OneForm(
        parse_poly("y") * parse_poly("3") + parse_poly("-5/2*x*y"),
        parse_poly("3*x^2") + parse_poly("-5/2*y^2"),
    )
    w1 = OneForm(parse_poly("y"), parse_poly("x^2"))
    w2 = OneForm(parse_poly("x*y"), parse_poly("y^2"))
    (vc, ec), (v1, e1), (v2, e2) = integrate_many(
        [combo, w1, w2], vdp_guide, vdp_cdata.num, cfg)
    assert abs(vc - (a * v1 + b * v2)) <= ec + abs(a) * e1 + abs(b) * e2 + 1e-12


def test_rational_winding_numbers(xy_cdata, cfg):
    # on xy = t the vanishing cycle winds once around x = 0 and once,
    # oppositely, around y = 0
    cyc = trace_to_level(xy_cdata, 0, 1.25, cfg=cfg)
    dx_over_x = RationalForm(OneForm(parse_poly("1"), parse_poly("0")),
                             parse_poly("x"))
    dy_over_y = RationalForm(OneForm(parse_poly("0"), parse_poly("1")),
                             parse_poly("y"))
    v, e = integrate(dx_over_x, cyc, xy_cdata.num, cfg)
    assert abs(v - 2j * cmath.pi) < 1e-9 and e < 1e-9
    v, e = integrate(dy_over_y, cyc, xy_cdata.num, cfg)
    assert abs(v + 2j * cmath.pi) < 1e-9 and e < 1e-9


def test_pole_on_cycle_detected(vdp_cdata, vdp_guide, cfg):
    # denominator vanishing on the whole level curve
    bad = RationalForm(XDY, parse_poly("x^2 + y^2 - 4"))
    with pytest.raises(PoleProximity):
        integrate(bad, vdp_guide, vdp_cdata.num, cfg)


def test_degenerate_cycle_rejected(vdp_cdata, cfg):
    cyc = Cycle(2.0, np.array([2.0 + 0j] * 4), np.array([0j] * 4))
    with pytest.raises(QuadratureFailure):
        FiberChain(vdp_cdata.num, cyc, cfg)


def test_error_bound_honest_across_tolerances(vdp_cdata, vdp_guide, cfg):
    form = OneForm(parse_poly("x^2*y^3"), parse_poly("x^5"))
    v_tight, e_tight = integrate(form, vdp_guide, vdp_cdata.num, cfg, tol=1e-12)
    v_loose, e_loose = integrate(form, vdp_guide, vdp_cdata.num, cfg, tol=1e-4)
    assert e_tight <= 1e-12
    assert abs(v_loose - v_tight) <= e_loose + e_tight


def test_integrate_many_matches_individual(vdp_cdata, vdp_guide, cfg):
    forms = [XDY, YDX, OneForm(parse_poly("x*y"), parse_poly("y^2"))]
    grouped = integrate_many(forms, vdp_guide, vdp_cdata.num, cfg)
    for form, (v, e) in zip(forms, grouped):
        v1, _ = integrate(form, vdp_guide, vdp_cdata.num, cfg)
        assert abs(v - v1) < 1e-10


def test_monomial_basis_shape():
    labels, forms = monomial_basis(2)
    assert len(labels) == len(forms) == 12
    assert labels[0] == "1 dx" and labels[1] == "1 dy"
    assert "x dy" in labels and "y^2 dx" in labels
    assert len(set(labels)) == len(labels)


def test_residue_vanishing_discriminates(generic_pencil, cfg):
    cdata = critical_data(generic_pencil, cfg=cfg)
    rows = residue_vanishing(RationalForm(XDY), cdata, 1.0, cfg)
    assert len(rows) == 5
    assert all(r["vanishes"] for r in rows)
    # dG/G winds p times around each base point
    dG_over_G = RationalForm(
        OneForm(generic_pencil.G.diff("x"), generic_pencil.G.diff("y")),
        generic_pencil.G,
    )
    rows = residue_vanishing(dG_over_G, cdata, 1.0, cfg)
    assert all(not r["vanishes"] for r in rows)
    target = 2j * cmath.pi * generic_pencil.p
    assert all(abs(r["value"] - target) < 1e-7 for r in rows)
