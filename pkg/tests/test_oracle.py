"""Holonomy oracle: unperturbed identity, eps-extrapolation, guard rails."""

import cmath

import numpy as np
import pytest

from melnikov_kit.algebra import OneForm, exterior_d, parse_poly
from melnikov_kit.fibration import trace_to_level
from melnikov_kit.melnikov import DeformationSpec, first_melnikov
from melnikov_kit.oracle import (
    ExtrapolationFailure,
    HolonomySample,
    TubeEscape,
    holonomy,
    melnikov_fd,
    melnikov_fd_scan,
)

XDY = OneForm(parse_poly("0"), parse_poly("x"))


@pytest.fixture(scope="module")
def guide1(vdp_cdata, cfg):
    return trace_to_level(vdp_cdata, 0, 1.0, cfg=cfg)


def test_unperturbed_holonomy_is_identity(vdp_dspec, guide1, vdp_guide, cfg):
    for guide, t in [(guide1, 1.0), (guide1, 1.0 + 0.05j), (guide1, 0.9),
                     (vdp_guide, 2.0)]:
        s = holonomy(vdp_dspec, guide, t, 0.0, cfg)
        assert abs(s.h - t) < 1e-9
        assert s.leaf_residual_max < 1e-8
        d = s.to_dict()
        assert {"t", "eps", "h", "displacement", "steps", "rejected",
                "leaf_residual_max"} <= set(d)


def test_fd_matches_analytic_first_order(vdp_dspec, vdp_cdata, guide1, cfg):
    scan = melnikov_fd_scan(vdp_dspec, guide1, 1.0, 1, cfg, grid=6)
    fd = scan["orders"][1]["value"]
    res = first_melnikov(vdp_dspec, [guide1], cfg)
    analytic = res.samples[0]["value"]
    assert abs(analytic - (-np.pi)) < 1e-8
    assert abs(fd - analytic) < 1e-6 * abs(analytic)
    assert scan["orders"][1]["error"] < 1e-4 * abs(analytic)


def test_fd_second_order_after_exact_first(vdp_base, vdp_guide, cfg):
    # w1 = dg has M_1 = 0; the eps^2 coefficient equals -int w2 = -2 pi t
    g = parse_poly("x^2*y + x*y")
    dspec = DeformationSpec(vdp_base, [exterior_d(g), XDY])
    scan = melnikov_fd_scan(dspec, vdp_guide, 2.0, 2, cfg)
    m1 = scan["orders"][1]["value"]
    m2 = scan["orders"][2]["value"]
    target = -4 * np.pi
    assert abs(m1) < 1e-4
    assert abs(m2 - target) < 1e-3 * abs(target)


def test_displacement_is_odd_to_leading_order(vdp_dspec, guide1, cfg):
    eps = 0.01
    dp = holonomy(vdp_dspec, guide1, 1.0, eps, cfg).h - 1.0
    dm = holonomy(vdp_dspec, guide1, 1.0, -eps, cfg).h - 1.0
    assert abs(dp) > 1e-3
    assert abs(dp + dm) < 1e-6 * abs(dp)


def test_tube_escape_on_large_eps(vdp_dspec, guide1, cfg):
    with pytest.raises(TubeEscape):
        holonomy(vdp_dspec, guide1, 1.0, 10.0, cfg)


def test_scan_shrinks_eps_until_leaf_stays_in_tube(vdp_dspec, guide1, cfg):
    scan = melnikov_fd_scan(vdp_dspec, guide1, 1.0, 1, cfg, eps0=10.0, grid=4)
    assert scan["eps0"] < 10.0
    assert abs(scan["orders"][1]["value"] - (-np.pi)) < 1e-3 * np.pi


# ---------------------------------------------------------------------------
# the extrapolation itself, on synthetic grids
# ---------------------------------------------------------------------------


def _grid(fn, eps0=0.1, rho=0.5, n=8, t=1.0):
    return [
        HolonomySample(t=t, eps=eps0 * rho ** i, h=t + fn(eps0 * rho ** i),
                       steps=1, rejected=0, leaf_residual_max=0.0)
        for i in range(n)
    ]


def test_melnikov_fd_synthetic_orders():
    samples = _grid(lambda e: 3.0 * e + 0.5 * e ** 2 - 0.1 * e ** 3)
    v1, e1, diag = melnikov_fd(samples, 1)
    assert abs(v1 - 3.0) < 1e-12 and e1 < 1e-10
    assert diag["rho"] == pytest.approx(0.5)
    v2, e2, _ = melnikov_fd(samples, 2, lower={1: v1})
    assert abs(v2 - 0.5) < 1e-9
    v3, _, _ = melnikov_fd(samples, 3, lower={1: v1, 2: v2})
    assert abs(v3 - (-0.1)) < 1e-6


def test_melnikov_fd_validation():
    samples = _grid(lambda e: e, n=3)
    with pytest.raises(ValueError):
        melnikov_fd(samples, 2)   # needs k + 2 = 4
    bad = _grid(lambda e: e, n=6)
    bad[3] = HolonomySample(t=1.0, eps=0.017, h=1.017, steps=1, rejected=0,
                            leaf_residual_max=0.0)
    with pytest.raises(ValueError):
        melnikov_fd(bad, 1)


def test_melnikov_fd_noise_floor_detected():
    # pure alternating noise has no eps^1 coefficient to extract
    noise = iter([1e-9, -1e-9] * 5)
    samples = _grid(lambda e: next(noise), n=8)
    with pytest.raises(ExtrapolationFailure):
        melnikov_fd(samples, 1)
