"""Pencil / logarithmic specs and singular point classification."""

import pytest

from melnikov_kit.algebra import (GaussianRational, OneForm, exterior_d,
                                  parse_poly, wedge)
from melnikov_kit.foliation import (FoliationForm, LogarithmicSpec, PencilSpec,
                                    pencil_form, singular_points)


def test_pencil_validation():
    x2y2 = parse_poly("x^2 + y^2")
    with pytest.raises(ValueError):
        PencilSpec(x2y2, parse_poly("x"), 2, 4)  # gcd 2
    with pytest.raises(ValueError):
        PencilSpec(x2y2, parse_poly("0"))
    with pytest.raises(ValueError):
        PencilSpec(parse_poly("x*y"), parse_poly("x"))  # common factor


def test_hamiltonian_normalization():
    spec = PencilSpec(parse_poly("x^2 + y^3"), parse_poly("3"), 1, 1)
    assert spec.is_hamiltonian
    assert spec.G == parse_poly("1")
    assert (spec.p, spec.q) == (1, 1)
    assert spec.warnings  # the rescaling is reported


def test_degree_convention():
    spec = PencilSpec(parse_poly("x^3 - 3*x + y^2 + 1/2"),
                      parse_poly("x*y + x - 1/4"), 2, 3)
    assert spec.degree == 3 + 2 - 2


def test_omega0_formula():
    F = parse_poly("x^3 - 3*x + y^2 + 1/2")
    G = parse_poly("x*y + x - 1/4")
    w = pencil_form(F, G, 2, 3)
    dF, dG = exterior_d(F), exterior_d(G)
    two, three = parse_poly("2"), parse_poly("3")
    assert (w - (two * G * dF - three * F * dG)).is_zero()


def test_omega0_annihilates_first_integral_direction():
    # omega0 wedge (p G dF - q F dG) = 0 trivially; the real content is
    # omega0 wedge df proportional to zero after clearing: F G d(omega0/FG) = 0
    F = parse_poly("1/2*x^2 + 1/2*y^2")
    spec = PencilSpec(F, parse_poly("1"))
    w = spec.omega0()
    assert (w - exterior_d(F)).is_zero()


def test_logarithmic_side_condition():
    f1 = parse_poly("x^2 + y^2 - 1")
    f2 = parse_poly("x*y + x - 1/4")
    with pytest.raises(ValueError):
        LogarithmicSpec([f1, f2], [GaussianRational(1), GaussianRational(1)])
    spec = LogarithmicSpec([f1, f2], [GaussianRational(1), GaussianRational(-1)])
    # cleared form: f2 df1 - f1 df2 (lambda-weighted); integrable by construction
    w = spec.form()
    expect = f2 * exterior_d(f1) - f1 * exterior_d(f2)
    assert (w - expect).is_zero()


def test_logarithmic_form_integrable():
    # d(omega) wedge-free integrability: omega ^ domega = 0 in the plane is
    # automatic; instead check d(w / prod f_i) = 0 via the cleared identity
    f1 = parse_poly("x^2 + y^2 - 1")
    f2 = parse_poly("x*y + x - 1/4")
    spec = LogarithmicSpec([f1, f2], [GaussianRational(1), GaussianRational(-1)])
    w = spec.form()
    P = f1 * f2
    left = w.A.diff("y") * P - w.A * P.diff("y")
    right = w.B.diff("x") * P - w.B * P.diff("x")
    assert (left - right).is_zero()


def test_foliation_form_degree_warning():
    w = OneForm(parse_poly("x^3"), parse_poly("0"))
    f = FoliationForm(w, degree=1)
    assert f.warnings
    assert not FoliationForm(w, degree=2).warnings


# -- singular points ----------------------------------------------------------


def test_singular_points_hamiltonian_center(cfg):
    spec = PencilSpec(parse_poly("1/2*x^2 + 1/2*y^2"), parse_poly("1"))
    pts = singular_points(spec, cfg=cfg)
    centers = [p for p in pts if p.kind == "morse-center-candidate"]
    assert len(centers) == 1
    x, y = centers[0].point
    assert abs(x) < 1e-9 and abs(y) < 1e-9
    lam1, lam2 = centers[0].eigenvalues
    assert abs(lam1 + lam2) < 1e-9  # opposite eigenvalues


def test_singular_points_two_conic_count(cfg):
    # d1 = d2 = 2 logarithmic pencil: d = 2 and the Morse-center count is
    # d^2 + d + 1 - d1 d2 = 3
    spec = LogarithmicSpec(
        [parse_poly("x^2 + y^2 - 1"), parse_poly("x*y + x - 1/4")],
        [GaussianRational(1), GaussianRational(-1)],
    )
    pts = singular_points(spec, cfg=cfg)
    centers = [p for p in pts if p.kind == "morse-center-candidate"]
    assert len(centers) == 3


def test_singular_points_saddle_vs_center(cfg):
    # f = xy: origin is a saddle of the real picture but carries the
    # Morse (complex center) structure: eigenvalues (lam, -lam)
    spec = PencilSpec(parse_poly("x*y"), parse_poly("1"))
    pts = singular_points(spec, cfg=cfg)
    assert len(pts) == 1
    assert pts[0].kind == "morse-center-candidate"


def test_singular_points_focus_not_center(cfg):
    # dual field X = (B, -A) = (x - y, x + y) has trace 2: spiral point
    w = OneForm(parse_poly("-x - y"), parse_poly("x - y"))
    pts = singular_points(w, cfg=cfg)
    assert len(pts) == 1
    assert pts[0].kind != "morse-center-candidate"


def test_singular_points_probe_rejects_obstructed_germ(cfg):
    # trace-zero linear part d(xy) but an order-4 obstruction: the local
    # first-integral probe must reject center candidacy
    w = OneForm(parse_poly("y + x^2*y + 2*x*y^2"), parse_poly("x + x^2*y + x^3"))
    pts = singular_points(w, cfg=cfg)
    origin = [p for p in pts
              if abs(p.point[0]) < 1e-9 and abs(p.point[1]) < 1e-9]
    assert len(origin) == 1
    assert origin[0].kind != "morse-center-candidate"
    lam1, lam2 = origin[0].eigenvalues
    assert abs(lam1 + lam2) < 1e-9


def test_singular_points_exact_morse_form_is_center(cfg):
    # w = dH for the Morse quadratic H = (x^2 - y^2)/2 + xy: a genuine
    # center candidate even though the input is a bare form
    w = OneForm(parse_poly("x + y"), parse_poly("x - y"))
    pts = singular_points(w, cfg=cfg)
    assert len(pts) == 1
    assert pts[0].kind == "morse-center-candidate"
