"""Exact decomposition w = dg + p df, tangent-cone membership, integral tests."""

import cmath

import pytest

from melnikov_kit.algebra import (
    BivarPoly,
    GaussianRational,
    OneForm,
    exterior_d,
    parse_poly,
)
from melnikov_kit.foliation import PencilSpec
from melnikov_kit.linalg import InfeasibleCertificate, solve_linear
from melnikov_kit.relexact import (
    DecompositionBounds,
    DecompositionInfeasible,
    ExactnessContext,
    decompose,
    default_bounds,
    is_relatively_exact,
    tangent_form,
    tangent_membership,
)


def _relative_form(f: BivarPoly, g: str, p: str) -> OneForm:
    return exterior_d(parse_poly(g)) + exterior_d(f) * parse_poly(p)


# ---------------------------------------------------------------------------
# decompose: Hamiltonian case
# ---------------------------------------------------------------------------


def test_decompose_round_trip_hamiltonian():
    f = parse_poly("x^3 - 3*x + y^2")
    spec = PencilSpec(f, parse_poly("1"), 1, 1)
    for g, p in [("x^2*y + x*y", "x - 2"), ("y^3 - x^4", "x*y"), ("0", "1/3")]:
        w1 = _relative_form(f, g, p)
        dec = decompose(w1, spec)
        assert dec.check(w1)
        assert dec.residual(w1).is_zero()
        assert dec.g.is_polynomial and dec.p.is_polynomial


def test_decompose_is_deterministic_and_gauge_pinned():
    f = parse_poly("x^3 - 3*x + y^2")
    spec = PencilSpec(f, parse_poly("1"), 1, 1)
    w1 = _relative_form(f, "x^2*y", "x")
    d1 = decompose(w1, spec)
    d2 = decompose(w1, spec)
    assert d1.A == d2.A and d1.B == d2.B
    # adding d(F^2) shifts g by F^2; the gauge pin pushes it into p,
    # so the returned g is unchanged
    w2 = w1 + exterior_d(f * f)
    d3 = decompose(w2, spec)
    assert d3.A == d1.A
    assert d3.B == d1.B + f.scale(GaussianRational(2))


def test_decompose_infeasible_with_certificate(xy_base):
    w1 = OneForm(parse_poly("y"), parse_poly("0"))
    with pytest.raises(DecompositionInfeasible) as exc:
        decompose(w1, xy_base)
    e = exc.value
    assert e.certificate is not None
    assert e.float_residual > 0.1
    assert len(e.attempts) >= 1
    assert {"alpha", "beta", "g_degree", "p_degree"} <= set(e.attempts[0])


def test_decompose_input_validation(xy_base):
    w1 = OneForm(parse_poly("y"), parse_poly("0"))
    with pytest.raises(ValueError):
        decompose(w1, xy_base, den=(-1, 0))
    with pytest.raises(ValueError):
        decompose(w1, xy_base, den=(0, 1))   # Hamiltonian: no G-denominator
    with pytest.raises(ValueError):
        DecompositionBounds(-1, 0)


def test_default_bounds_scale_with_order(generic_pencil):
    b1 = default_bounds(generic_pencil, order=1)
    b2 = default_bounds(generic_pencil, order=2)
    m = generic_pencil.F.degree + generic_pencil.G.degree
    assert b1.g_degree == 2 * m and b1.p_degree == m and b1.den_total == 1
    assert b2.g_degree == 3 * m and b2.den_total == 2


# ---------------------------------------------------------------------------
# decompose: pencil case with denominators
# ---------------------------------------------------------------------------


def test_decompose_recovers_rational_primitive(generic_pencil):
    # w = d(x/G): numerator of the den = (0, 2) presentation is G dx - x dG
    G = generic_pencil.G
    x = parse_poly("x")
    num = exterior_d(x) * G - exterior_d(G) * x
    dec = decompose(num, generic_pencil, den=(0, 2))
    assert dec.check(num)
    gnum, aF, aG = dec.g_parts()
    assert aF == 0 and aG == 1 and gnum == x
    pnum, _, _ = dec.p_parts()
    assert pnum.is_zero()


# ---------------------------------------------------------------------------
# infeasibility certificates at the linear-algebra level
# ---------------------------------------------------------------------------


def test_certificate_checks_against_original_system():
    one = GaussianRational(1)
    zero = GaussianRational(0)
    rows = [[one, zero], [one, zero]]
    rhs = [zero, one]
    cert = solve_linear(rows, rhs)
    assert isinstance(cert, InfeasibleCertificate)
    assert cert.check(rows, rhs)
    assert not cert.residual.is_zero()


# ---------------------------------------------------------------------------
# integral route (semantic exactness)
# ---------------------------------------------------------------------------


def test_relative_form_passes_integral_test(cfg):
    f = parse_poly("x^3 - 3*x + y^2")
    spec = PencilSpec(f, parse_poly("1"), 1, 1)
    w1 = _relative_form(f, "x^2*y - y^3", "x + 1")
    ev = is_relatively_exact(w1, spec, [0.5, -0.5 + 0.3j], cfg=cfg)
    assert ev.verdict
    assert ev.max_abs <= cfg.zero_tol
    assert ev.witnesses() == []


def test_ydx_fails_with_period_witness(xy_base, cfg):
    w1 = OneForm(parse_poly("y"), parse_poly("0"))
    ev = is_relatively_exact(w1, xy_base, [1.0], cfg=cfg)
    assert not ev.verdict
    wit = ev.witnesses()
    assert len(wit) == 1
    assert abs(wit[0]["value"] - 2j * cmath.pi) < 1e-8
    d = ev.to_dict()
    assert d["relatively_exact"] is False


def test_exactness_context_is_shared(xy_base, cfg):
    ctx = ExactnessContext(xy_base, [1.0, 1.5], cfg)
    w_ex = _relative_form(xy_base.F, "x^2*y", "y*x")
    w_no = OneForm(parse_poly("y"), parse_poly("0"))
    ev1 = is_relatively_exact(w_ex, xy_base, [1.0, 1.5], cfg=cfg, context=ctx)
    ev2 = is_relatively_exact(w_no, xy_base, [1.0, 1.5], cfg=cfg, context=ctx)
    assert ev1.verdict and not ev2.verdict
    # low total degree: the shared context must carry the simplicity warning
    assert any("simplicity" in w for w in ev1.warnings)


def test_dual_routes_agree_on_pencil_form(generic_pencil, cfg):
    # the same rational form passes both the syntactic and integral route
    from melnikov_kit.abelian import RationalForm
    G = generic_pencil.G
    x = parse_poly("x")
    num = exterior_d(x) * G - exterior_d(G) * x
    decompose(num, generic_pencil, den=(0, 2))  # raises if infeasible
    form = RationalForm(num, G * G)
    ev = is_relatively_exact(form, generic_pencil, [1.0], cfg=cfg)
    assert ev.verdict


# ---------------------------------------------------------------------------
# tangent-cone membership
# ---------------------------------------------------------------------------


def test_tangent_form_kernel(generic_pencil):
    neg_G = generic_pencil.G.scale(GaussianRational(-1))
    w = tangent_form(generic_pencil, generic_pencil.F, neg_G)
    assert w.is_zero()


def test_tangent_membership_accepts_generated_forms(generic_pencil):
    cases = [
        ("x^2*y - x", "y + 1/2"),
        ("x^3 + 2*y^2 - x*y", "x*y - 3"),
        ("1", "0"),
    ]
    for ps, qs in cases:
        P, Q = parse_poly(ps), parse_poly(qs)
        w1 = tangent_form(generic_pencil, P, Q)
        res = tangent_membership(w1, generic_pencil)
        assert res.in_tangent_cone
        assert res.witness.reproduces(w1, generic_pencil)


def test_tangent_membership_of_scaled_omega0(generic_pencil):
    w1 = generic_pencil.omega0() * parse_poly("2")
    res = tangent_membership(w1, generic_pencil)
    assert res.in_tangent_cone
    d = res.to_dict()
    assert d["in_tangent_cone"] is True and "P" in d and "Q" in d


def test_tangent_membership_rejects_with_cokernel(generic_pencil):
    w1 = OneForm(parse_poly("0"), parse_poly("x^7"))
    res = tangent_membership(w1, generic_pencil)
    assert not res.in_tangent_cone
    assert res.cokernel and res.pairing is not None
    assert not res.pairing.is_zero()
    d = res.to_dict()
    assert d["in_tangent_cone"] is False
    assert d["cokernel"][0].keys() == {"component", "monomial", "coefficient"}
