import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wirewall import (
    GeometryError,
    boundary_quadrature,
    interior_grid,
    make_cross_section,
    make_wire_domain,
    unit_diameter,
)
from wirewall.geometry import cross_section_from_config, cross_section_to_config

TRIANGLE = [(0.0, 0.0), (2.0, 0.0), (0.0, 1.0)]


def test_rectangle_area_and_diameter():
    cs = make_cross_section("rectangle", (1.0, 2.0))
    assert cs.area == pytest.approx(8.0, abs=1e-14)
    assert cs.diameter == pytest.approx(2.0 * np.sqrt(5.0), abs=1e-14)


def test_circular_ellipse_matches_disc():
    disc = make_cross_section("disc", (1.0,))
    ell = make_cross_section("ellipse", (1.0, 1.0))
    assert ell.area == pytest.approx(disc.area, abs=1e-12)
    assert ell.diameter == pytest.approx(disc.diameter, abs=1e-12)
    pd, nd, wd = boundary_quadrature(disc, 64)
    pe, ne, we = boundary_quadrature(ell, 64)
    assert np.allclose(pd, pe, atol=1e-12)
    assert np.allclose(nd, ne, atol=1e-12)
    assert np.allclose(wd, we, atol=1e-12)


def test_disc_quadrature_weights_sum_to_perimeter():
    cs = make_cross_section("disc", (1.0,))
    _, _, w = boundary_quadrature(cs, 1000)
    assert abs(w.sum() - 2.0 * np.pi) < 1e-8


def test_ellipse_quadrature_perimeter():
    cs = make_cross_section("ellipse", (2.0, 1.0))
    _, _, w = boundary_quadrature(cs, 2000)
    # complete elliptic integral value for semi-axes 2, 1
    assert w.sum() == pytest.approx(9.68844822, abs=1e-6)
    assert cs.perimeter == pytest.approx(9.688448220547675, abs=1e-9)


def test_rectangle_normals_axis_aligned():
    cs = make_cross_section("rectangle", (1.0, 0.5))
    pts, normals, w = boundary_quadrature(cs, 64)
    for n in normals:
        assert {abs(n[0]), abs(n[1])} == {0.0, 1.0}
    assert w.sum() == pytest.approx(cs.perimeter, abs=1e-12)
    # outward: node + small step along normal leaves the rectangle
    outside = cs.contains(pts + 1e-6 * normals)
    assert not outside.any()


def test_polygon_quadrature_nodes_avoid_corners():
    cs = make_cross_section("polygon", TRIANGLE)
    pts, normals, w = boundary_quadrature(cs, 37)
    assert len(w) == 37
    verts = np.asarray(TRIANGLE)
    dists = np.linalg.norm(pts[:, None, :] - verts[None, :, :], axis=-1)
    assert dists.min() > 1e-3
    assert w.sum() == pytest.approx(cs.perimeter, abs=1e-12)
    assert np.allclose(np.linalg.norm(normals, axis=1), 1.0, atol=1e-12)


def test_quadrature_requires_enough_nodes():
    cs = make_cross_section("disc", (1.0,))
    with pytest.raises(GeometryError, match="n_points"):
        boundary_quadrature(cs, 7)


@pytest.mark.parametrize(
    "kind,params,name",
    [
        ("disc", (-1.0,), "radius"),
        ("disc", (0.0,), "radius"),
        ("ellipse", (1.0, -2.0), "b"),
        ("rectangle", (0.0, 1.0), "a"),
    ],
)
def test_invalid_parameters_name_the_offender(kind, params, name):
    with pytest.raises(GeometryError, match=name):
        make_cross_section(kind, params)


def test_polygon_validation():
    with pytest.raises(GeometryError, match="vertices"):
        make_cross_section("polygon", [(0, 0), (1, 0)])
    with pytest.raises(GeometryError, match="counterclockwise"):
        make_cross_section("polygon", list(reversed(TRIANGLE)))
    with pytest.raises(GeometryError, match="kind"):
        make_cross_section("hexagram", (1.0,))


def test_polygon_area_diameter():
    cs = make_cross_section("polygon", TRIANGLE)
    assert cs.area == pytest.approx(1.0, abs=1e-14)
    assert cs.diameter == pytest.approx(np.sqrt(5.0), abs=1e-14)


def test_interior_grid_covers_area():
    disc = make_cross_section("disc", (1.0,), resolution=256)
    assert disc.interior_grid.covered_area == pytest.approx(np.pi, rel=5e-3)
    rect = make_cross_section("rectangle", (1.0, 0.5), resolution=16)
    assert rect.interior_grid.covered_area == pytest.approx(2.0, abs=1e-12)
    assert rect.interior_grid.mask.all()
    # 2:1 aspect keeps cells square: 16 x 8
    assert rect.interior_grid.mask.shape == (16, 8)


def test_interior_grid_regrid():
    cs = make_cross_section("disc", (1.0,))
    g = interior_grid(cs, 128)
    assert g.covered_area == pytest.approx(np.pi, rel=2e-2)
    with pytest.raises(GeometryError, match="resolution"):
        interior_grid(cs, 0)


def test_contains():
    cs = make_cross_section("ellipse", (2.0, 1.0))
    inside = cs.contains([(1.9, 0.0), (0.0, 0.9), (1.5, 0.5)])
    assert inside.tolist() == [True, True, True]
    outside = cs.contains([(2.1, 0.0), (1.9, 0.9)])
    assert not outside.any()


def test_wire_domain_grids():
    cs = make_cross_section("rectangle", (1.0, 0.5))
    dom = make_wire_domain(cs, scale=0.1, x_window=(-4.0, 4.0), axial_cells=64, cross_cells=8)
    assert dom.shape == (64, 8, 4)
    hx, hy, hz = dom.spacings
    assert hx == pytest.approx(8.0 / 64)
    assert hy == pytest.approx(0.1 * 2.0 / 8)
    assert hy == hz
    assert dom.mask.all()
    assert dom.xs[0] == pytest.approx(-4.0 + hx / 2)
    assert dom.ys.max() == pytest.approx(0.1 * (1.0 - 1.0 / 8))


def test_wire_domain_validation():
    cs = make_cross_section("disc", (1.0,))
    with pytest.raises(GeometryError, match="scale"):
        make_wire_domain(cs, 0.0, (-1, 1), 8)
    with pytest.raises(GeometryError, match="x_window"):
        make_wire_domain(cs, 1.0, (1, -1), 8)
    with pytest.raises(GeometryError, match="axial_cells"):
        make_wire_domain(cs, 1.0, (-1, 1), 1)


@pytest.mark.parametrize(
    "kind,params",
    [
        ("disc", (1.5,)),
        ("ellipse", (2.0, 1.0)),
        ("rectangle", (1.0, 0.5)),
        ("polygon", TRIANGLE),
    ],
)
def test_config_round_trip(kind, params):
    cs = make_cross_section(kind, params)
    cfg = cross_section_to_config(cs)
    back = cross_section_from_config(cfg)
    assert back.kind == cs.kind
    assert back.area == pytest.approx(cs.area, abs=1e-14)
    assert back.diameter == pytest.approx(cs.diameter, abs=1e-14)


def test_unit_diameter_rescale():
    cs = make_cross_section("rectangle", (1.0, 0.5))
    unit = unit_diameter(cs)
    assert unit.diameter == pytest.approx(1.0, abs=1e-12)
    assert unit.area == pytest.approx(cs.area / cs.diameter**2, rel=1e-12)
    tri = unit_diameter(make_cross_section("polygon", TRIANGLE))
    assert tri.diameter == pytest.approx(1.0, abs=1e-12)


@given(
    a=st.floats(0.2, 5.0),
    b=st.floats(0.2, 5.0),
    n=st.integers(64, 512),
)
@settings(max_examples=25, deadline=None)
def test_quadrature_weight_sum_property(a, b, n):
    cs = make_cross_section("rectangle", (a, b))
    _, _, w = boundary_quadrature(cs, n)
    assert len(w) == n
    assert (w > 0).all()
    assert w.sum() == pytest.approx(4.0 * (a + b), rel=1e-12)


@given(n=st.integers(8, 200))
@settings(max_examples=25, deadline=None)
def test_polygon_apportionment_totals(n):
    cs = make_cross_section("polygon", TRIANGLE)
    pts, _, w = boundary_quadrature(cs, n)
    assert len(w) == n
    assert w.sum() == pytest.approx(cs.perimeter, rel=1e-12)
