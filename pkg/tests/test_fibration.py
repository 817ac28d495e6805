"""Critical data, cycle tracing, transport, and monodromy."""

import cmath

import numpy as np
import pytest

from melnikov_kit.abelian import integrate, periods
from melnikov_kit.algebra import OneForm, parse_poly
from melnikov_kit.fibration import (
    Cycle,
    TPath,
    TransportError,
    critical_data,
    monodromy_loop,
    plan_path,
    seed_indeterminacy_cycle,
    seed_vanishing_cycle,
    trace_family,
    trace_to_level,
)
from melnikov_kit.foliation import PencilSpec

XDY = OneForm(parse_poly("0"), parse_poly("x"))
YDX = OneForm(parse_poly("y"), parse_poly("0"))


# ---------------------------------------------------------------------------
# critical data
# ---------------------------------------------------------------------------


def test_vdp_critical_data(vdp_cdata):
    assert len(vdp_cdata.points) == 1
    cp = vdp_cdata.points[0]
    assert abs(cp.point[0]) < 1e-12 and abs(cp.point[1]) < 1e-12
    assert abs(cp.value) < 1e-12
    assert cp.non_degenerate
    assert vdp_cdata.indeterminacy_points == []
    assert vdp_cdata.all_non_degenerate
    # low total degree: the simplicity hypothesis fails and must be flagged
    assert any("simplicity" in w for w in vdp_cdata.warnings)


def test_generic_pencil_critical_data(generic_pencil, cfg):
    cdata = critical_data(generic_pencil, cfg=cfg)
    assert len(cdata.points) == 7
    assert len(cdata.indeterminacy_points) == 5
    assert cdata.all_non_degenerate
    assert cdata.values_distinct
    assert cdata.warnings == []
    # high total degree: simplicity is an assumption, not a warning
    assert any("simple" in a for a in cdata.assumptions)
    # genuine pencil: t = 0 is the exceptional fiber
    assert any(abs(v) < 1e-12 for v in cdata.forbidden_values())
    assert cdata.min_gap() > 0


def test_critical_data_to_dict(vdp_cdata):
    d = vdp_cdata.to_dict()
    assert len(d["critical_points"]) == 1
    assert d["critical_points"][0]["non_degenerate"] is True
    assert d["indeterminacy_points"] == []
    assert d["all_non_degenerate"] is True


def test_hamiltonian_has_no_residue_cycles(vdp_cdata, cfg):
    with pytest.raises(ValueError):
        seed_indeterminacy_cycle(vdp_cdata, 0, 1.0, cfg=cfg)


# ---------------------------------------------------------------------------
# cycles
# ---------------------------------------------------------------------------


def test_cycle_round_trip(vdp_guide):
    d = vdp_guide.to_dict()
    assert d["level"] == [2.0, 0.0]
    back = Cycle.from_dict(d)
    assert back.level == vdp_guide.level
    assert len(back) == len(vdp_guide)
    assert np.allclose(back.x, vdp_guide.x) and np.allclose(back.y, vdp_guide.y)
    # an explicitly closed vertex list collapses to the open representation
    d["vertices"] = d["vertices"] + [d["vertices"][0]]
    again = Cycle.from_dict(d)
    assert len(again) == len(vdp_guide)


def test_traced_cycle_stays_on_fiber(vdp_cdata, vdp_guide, cfg):
    assert vdp_guide.max_fiber_residual(vdp_cdata.num) <= 10 * cfg.tol_fiber
    # bounding-box diagonal of the radius-2 circle: sqrt(4^2 + 4^2)
    assert vdp_guide.diameter() == pytest.approx(4 * np.sqrt(2.0), rel=0.05)


def test_seed_rejects_far_level(vdp_cdata, cfg):
    with pytest.raises(TransportError):
        seed_vanishing_cycle(vdp_cdata, 0, 1e6, cfg=cfg)


def test_residue_cycle_is_small_and_on_fiber(generic_pencil, cfg):
    cdata = critical_data(generic_pencil, cfg=cfg)
    cyc = seed_indeterminacy_cycle(cdata, 0, 1.0, cfg=cfg)
    assert cyc.provenance["seed"] == "indeterminacy"
    assert cyc.diameter() < 0.1
    assert cyc.max_fiber_residual(cdata.num) < 1e-8


# ---------------------------------------------------------------------------
# periods on f = xy
# ---------------------------------------------------------------------------


def test_xy_canonical_periods(xy_cdata, cfg):
    for t in (1.25, 0.7 + 0.4j):
        cyc = trace_to_level(xy_cdata, 0, t, cfg=cfg)
        v1, e1 = integrate(XDY, cyc, xy_cdata.num, cfg)
        v2, e2 = integrate(YDX, cyc, xy_cdata.num, cfg)
        assert abs(v1 - (-2j * cmath.pi * t)) < 1e-9
        assert abs(v2 - 2j * cmath.pi * t) < 1e-9
        assert e1 < 1e-9 and e2 < 1e-9


def test_xy_periods_shrink_toward_critical_value(xy_cdata, cfg):
    levels = [2.0, 1.5, 1.0, 0.5]
    fam = trace_family(xy_cdata, 0, levels, cfg=cfg)
    vecs = [periods(c, 2, xy_cdata.num, cfg) for c in fam]
    mags = np.array([np.abs(pv.values) for pv in vecs])
    live = mags[0] > 1e-6
    assert live.any()
    for j in range(len(levels) - 1):
        assert np.all(mags[j + 1][live] < mags[j][live])
    dead = ~live
    assert np.all(mags[:, dead] < 1e-9)


# ---------------------------------------------------------------------------
# transport and monodromy
# ---------------------------------------------------------------------------


def test_contractible_loop_preserves_periods(xy_cdata, cfg):
    t = 1.25
    cyc = trace_to_level(xy_cdata, 0, t, cfg=cfg)
    before = periods(cyc, 2, xy_cdata.num, cfg)
    loop = TPath([t, t + 0.4 + 0.4j, t + 0.8j, t - 0.4 + 0.4j, t])
    assert loop.is_loop
    out = monodromy_loop(xy_cdata, cyc, loop, cfg)
    after = periods(out, 2, xy_cdata.num, cfg)
    assert before.distance(after) < 1e-8


def test_loop_around_node_fixes_vanishing_cycle(xy_cdata, cfg):
    # the cycle vanishes at a node; its self-variation is trivial, so a
    # full turn around t = 0 must reproduce the same period vector
    t = 1.25
    cyc = trace_to_level(xy_cdata, 0, t, cfg=cfg)
    before = periods(cyc, 2, xy_cdata.num, cfg)
    loop = TPath.loop_around(0.0, t, radius=0.6)
    out = monodromy_loop(xy_cdata, cyc, loop, cfg)
    after = periods(out, 2, xy_cdata.num, cfg)
    assert before.distance(after) < 1e-8


def test_monodromy_rejects_open_path(xy_cdata, cfg):
    cyc = trace_to_level(xy_cdata, 0, 1.25, cfg=cfg)
    with pytest.raises(ValueError):
        monodromy_loop(xy_cdata, cyc, TPath([1.25, 2.0]), cfg)


# ---------------------------------------------------------------------------
# value-plane paths
# ---------------------------------------------------------------------------


def test_tpath_validation():
    with pytest.raises(ValueError):
        TPath([1.0])
    seg = TPath.segment(2.0, -2.0)
    assert seg.start == 2.0 and seg.end == -2.0 and not seg.is_loop
    assert seg.min_distance(0.0) == pytest.approx(0.0, abs=1e-15)
    assert seg.min_distance(1j) == pytest.approx(1.0)


def test_check_margin_raises_and_exempts():
    seg = TPath.segment(2.0, -2.0)
    with pytest.raises(TransportError):
        seg.check_margin([0.0], 0.3)
    seg.check_margin([0.0], 0.3, exempt=[0.0])


def test_plan_path_detours_around_forbidden_values():
    path = plan_path(2.0, -2.0, [0.0], margin=0.3)
    assert path.start == 2.0 and path.end == -2.0
    assert path.min_distance(0.0) >= 0.3
    # no obstruction: straight segment
    free = plan_path(2.0, 3.0, [0.0], margin=0.3)
    assert len(free.waypoints) == 2
