import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from shapely.geometry import Point, Polygon

from nilcmc.domain import (DIRECTIONS, FermiCollar, ScalarField, build_boundary, build_grid,
                           curvature_range, fermi_coordinates, fourier_data, read_curve_csv,
                           shrunk_domain)
from nilcmc.exceptions import ValidationError


def test_circle_length_and_curvature():
    for R in (0.5, 1.0, 2.0):
        c = build_boundary("circle", radius=R)
        assert c.length == pytest.approx(2 * math.pi * R, rel=1e-12)
        np.testing.assert_allclose(c.curvature(c.s_samples), 1 / R, rtol=1e-12)


def test_ellipse_curvature(ellipse21):
    # k = a / b^2 at (a, 0)
    s0 = ellipse21.nearest_s((2.0, 0.0))
    assert ellipse21.curvature(s0) == pytest.approx(2.0, rel=1e-10)
    kmin, kmax = curvature_range(ellipse21)
    assert kmin == pytest.approx(0.25, rel=1e-6)
    assert kmax == pytest.approx(2.0, rel=1e-6)


@pytest.mark.parametrize("kind", ["circle", "ellipse"])
def test_unit_speed(kind):
    c = build_boundary(kind, a=1.7, b=0.9)
    s = np.linspace(0, c.length, 997)
    d = c.derivatives(s, 1)[1]
    np.testing.assert_allclose(np.hypot(d[:, 0], d[:, 1]), 1.0, atol=1e-10)
    # closure in position and tangent
    np.testing.assert_allclose(c.position(0.0), c.position(c.length), atol=1e-10)
    np.testing.assert_allclose(c.tangent(0.0), c.tangent(c.length), atol=1e-10)


def test_clockwise_input_is_reoriented():
    th = np.linspace(0, 2 * np.pi, 201)
    xy = np.column_stack([np.cos(-th), np.sin(-th)])
    c = build_boundary("user-parametric", xy=xy, s=th)
    assert np.all(c.curvature(c.s_samples) > 0)
    assert c.length == pytest.approx(2 * math.pi, rel=1e-8)


def test_user_curve_from_csv(tmp_path):
    th = np.linspace(0, 2 * np.pi, 129)[:-1]
    path = tmp_path / "curve.csv"
    with open(path, "w") as fh:
        fh.write("s,x,y\n")
        for t in th:
            fh.write(f"{float(t)!r},{1.5 * math.cos(t)!r},{math.sin(t)!r}\n")
    s, xy = read_curve_csv(path)
    assert xy.shape == (128, 2)
    c = build_boundary("user-parametric", path=path)
    ref = build_boundary("ellipse", a=1.5, b=1.0)
    assert c.length == pytest.approx(ref.length, rel=1e-6)


def test_self_intersecting_curve_rejected():
    th = np.linspace(0, 2 * np.pi, 200)
    xy = np.column_stack([np.sin(2 * th), np.sin(th)])  # figure eight
    with pytest.raises(ValidationError):
        build_boundary("user-parametric", xy=xy, s=th)


def test_unknown_kind():
    with pytest.raises(ValidationError):
        build_boundary("square")


@given(st.floats(0.05, 0.6), st.floats(0, 2 * math.pi))
def test_fermi_round_trip(t, s_frac):
    c = build_boundary("ellipse", a=1.5, b=1.0, samples=512)
    kmax = curvature_range(c)[1]
    collar = FermiCollar(c, 0.9 / kmax)
    t = min(t, 0.85 / kmax)
    s = s_frac / (2 * math.pi) * c.length
    p = collar.point(s, t)
    st_ = fermi_coordinates(collar, p)
    assert st_ is not None
    np.testing.assert_allclose(collar.point(*st_), p, atol=1e-10)
    assert st_[1] == pytest.approx(t, abs=1e-10)


def test_fermi_examples(unit_circle):
    collar = FermiCollar(unit_circle, 0.6)
    s, t = fermi_coordinates(collar, (0.5, 0.0))
    np.testing.assert_allclose(unit_circle.position(s), [1.0, 0.0], atol=1e-12)
    assert t == pytest.approx(0.5)
    s, t = fermi_coordinates(collar, unit_circle.position(1.0))
    assert t == pytest.approx(0.0, abs=1e-12)
    assert fermi_coordinates(FermiCollar(unit_circle, 0.3), (0.0, 0.0)) is None
    assert collar.jacobian_factor(0.0, 0.5) == pytest.approx(0.5)


def test_collar_needs_convexity_and_width(unit_circle):
    with pytest.raises(ValidationError):
        FermiCollar(unit_circle, 1.0)
    th = np.linspace(0, 2 * np.pi, 400)
    r = 1 + 0.3 * np.cos(3 * th)
    bean = build_boundary("user-parametric", xy=np.column_stack([r * np.cos(th), r * np.sin(th)]), s=th)
    assert curvature_range(bean)[0] < 0
    with pytest.raises(ValidationError):
        FermiCollar(bean, 0.01)


def test_shrunk_circle(unit_circle):
    inner = shrunk_domain(unit_circle, 0.25)
    np.testing.assert_allclose(np.hypot(*inner.points.T), 0.75, atol=1e-12)
    kmin, kmax = curvature_range(inner)
    assert kmin == pytest.approx(1 / 0.75, rel=1e-9)
    assert kmax == pytest.approx(1 / 0.75, rel=1e-9)
    with pytest.raises(ValidationError):
        shrunk_domain(unit_circle, 1.0)


def test_shrunk_domains_nested(ellipse21):
    a = Polygon(shrunk_domain(ellipse21, 0.1).points)
    b = Polygon(shrunk_domain(ellipse21, 0.3).points)
    assert a.contains(b)
    # inward offsets raise curvature as k / (1 - delta k)
    k0 = np.array(curvature_range(ellipse21))
    k1 = np.array(curvature_range(shrunk_domain(ellipse21, 0.3)))
    np.testing.assert_allclose(k1, k0 / (1 - 0.3 * k0), rtol=1e-6)


def test_grid_node_counts(unit_circle):
    assert build_grid(unit_circle, 0.5).n == 9
    n1 = build_grid(unit_circle, 1 / 16).n
    n2 = build_grid(unit_circle, 1 / 32).n
    assert 3.6 < n2 / n1 < 4.4
    with pytest.raises(ValidationError):
        build_grid(unit_circle, 0.75)


def test_grid_nodes_inside_and_nested(ellipse21):
    poly = Polygon(ellipse21.points)
    g1 = build_grid(ellipse21, 1 / 8)
    g2 = build_grid(ellipse21, 1 / 16)
    assert all(poly.contains(Point(*p)) for p in g1.nodes)
    coarse = {tuple(k) for k in (2 * g1.ij).tolist()}
    fine = {tuple(k) for k in g2.ij.tolist()}
    assert coarse <= fine


def test_grid_fractions_and_boundary_points(disk_grid16, unit_circle):
    g = disk_grid16
    for d in DIRECTIONS:
        f = g.fractions(d)
        assert np.all(f > 0) and np.all(f <= 1 + 1e-12)
        # neighbours that are boundary points sit on the curve at the recorded distance
        for side, sign in ((0, -1), (1, 1)):
            mask = g.nbr[d][:, side] < 0
            e = np.array(DIRECTIONS[d], float) / math.hypot(*DIRECTIONS[d])
            expect = g.nodes[mask] + sign * g.dist[d][mask, side][:, None] * e
            np.testing.assert_allclose(g.boundary_points[g.bnd[d][mask, side]], expect, atol=1e-12)
    np.testing.assert_allclose(np.hypot(*g.boundary_points.T), 1.0, atol=1e-12)
    np.testing.assert_allclose(unit_circle.position(g.boundary_s), g.boundary_points, atol=1e-11)


def _poly_derivs(x, y):
    u = x ** 3 - 2 * x * y + 0.5 * y ** 2 + 0.3 * x * y ** 2
    return (u, 3 * x ** 2 - 2 * y + 0.3 * y ** 2, -2 * x + y + 0.6 * x * y,
            6 * x, 1 + 0.6 * x, -2 + 0.6 * y)


def test_stencils_exact_on_quadratics(ellipse21):
    g = build_grid(ellipse21, 1 / 8)

    def quad(x, y):
        return 1 + 2 * x - y + 0.5 * x * x - 1.5 * x * y + 0.25 * y * y

    f = ScalarField.from_function(g, quad)
    ux, uy, uxx, uyy, uxy = f.derivatives()
    x, y = g.nodes.T
    np.testing.assert_allclose(uxx, 1.0, atol=1e-9)
    np.testing.assert_allclose(uyy, 0.5, atol=1e-9)
    np.testing.assert_allclose(uxy, -1.5, atol=1e-9)
    np.testing.assert_allclose(ux, 2 + x - 1.5 * y, atol=1e-9)
    np.testing.assert_allclose(uy, -1 - 1.5 * x + 0.5 * y, atol=1e-9)


def test_difference_form_matches_sparse_operators(disk_grid16):
    g = disk_grid16
    rng = np.random.default_rng(3)
    u = rng.normal(size=g.n)
    b = rng.normal(size=len(g.boundary_s))
    ops = g.operators()
    for key, val in zip(("ux", "uy", "uxx", "uyy", "uxy"), g.derivatives(u, b)):
        ref = ops[key][0] @ u + ops[key][1] @ b
        np.testing.assert_allclose(val, ref, atol=1e-12 * np.abs(ref).max())


def test_stencil_consistency_order(unit_circle):
    errs = []
    for h in (1 / 16, 1 / 32, 1 / 64):
        g = build_grid(unit_circle, h)
        f = ScalarField.from_function(g, lambda x, y: _poly_derivs(x, y)[0])
        ex = _poly_derivs(*g.nodes.T)
        interior = ~g.near_boundary
        e = max(np.max(np.abs(a - b)[interior]) for a, b in zip(f.derivatives(), ex[1:]))
        errs.append(e)
    # cubic terms are differenced exactly at regular nodes up to O(h^2)
    assert errs[-1] < 1e-8 or np.log2(errs[0] / errs[2]) / 2 >= 1.8


def test_scalar_field_validation(disk_grid16):
    g = disk_grid16
    with pytest.raises(ValidationError):
        ScalarField(g, np.zeros(g.n + 1), np.zeros(len(g.boundary_s)))
    with pytest.raises(ValidationError):
        ScalarField(g, np.full(g.n, np.nan), np.zeros(len(g.boundary_s)))


def test_fourier_data(unit_circle):
    phi = fourier_data(unit_circle, 0.5, cos=(0.0, 1.0), sin=(0.0, 0.1))
    s = np.array([0.0, 0.3, 2.0])
    np.testing.assert_allclose(phi(s), 0.5 + np.cos(2 * s) + 0.1 * np.sin(2 * s), atol=1e-12)
    assert phi.spec == {"constant": 0.5, "cos": [0.0, 1.0], "sin": [0.0, 0.1]}
