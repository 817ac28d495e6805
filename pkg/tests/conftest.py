"""Shared fixtures: base foliations and cached traced cycles."""

import pytest

from melnikov_kit.algebra import OneForm, parse_poly
from melnikov_kit.config import RunConfig
from melnikov_kit.fibration import critical_data, trace_to_level
from melnikov_kit.foliation import PencilSpec
from melnikov_kit.melnikov import DeformationSpec


@pytest.fixture(scope="session")
def cfg():
    return RunConfig()


@pytest.fixture(scope="session")
def vdp_base():
    return PencilSpec(parse_poly("1/2*x^2 + 1/2*y^2"), parse_poly("1"), 1, 1)


@pytest.fixture(scope="session")
def vdp_dspec(vdp_base):
    return DeformationSpec(vdp_base,
                           [OneForm(parse_poly("(x^2 - 1)*y"), parse_poly("0"))])


@pytest.fixture(scope="session")
def xy_base():
    return PencilSpec(parse_poly("x*y"), parse_poly("1"), 1, 1)


@pytest.fixture(scope="session")
def generic_pencil():
    # deg F + deg G = 5, validated generic: 7 non-degenerate critical
    # points, distinct values, 5 transversal base points, no warnings
    return PencilSpec(parse_poly("x^3 - 3*x + y^2 + 1/2"),
                      parse_poly("x*y + x - 1/4"), 2, 3)


@pytest.fixture(scope="session")
def vdp_cdata(vdp_base, cfg):
    return critical_data(vdp_base, cfg=cfg)


@pytest.fixture(scope="session")
def xy_cdata(xy_base, cfg):
    return critical_data(xy_base, cfg=cfg)


@pytest.fixture(scope="session")
def vdp_guide(vdp_cdata, cfg):
    return trace_to_level(vdp_cdata, 0, 2.0, cfg=cfg)
