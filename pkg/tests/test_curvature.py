import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nilcmc.curvature import (ConeSpec, cone_chart, cone_large_vertex_limit, cone_mean_curvature,
                              cylinder_chart, cylinder_mean_curvature, divergence_form_flux,
                              divergence_form_residual, euclidean_mean_curvature_operator,
                              graph_aux, graph_chart, graph_mean_curvature, plane_chart,
                              polynomial_jet, q_partials, q_residual)
from nilcmc.domain import build_boundary
from nilcmc.exceptions import SingularityError, ValidationError
from nilcmc.geometry import AmbientParams, ImmersionChart, apply_isometry, mean_curvature_immersion

taus = st.sampled_from([0.0, 0.5, -0.5, 1.0, 2.0, -2.0])
coef = st.floats(-1.0, 1.0)
coord = st.floats(-1.0, 1.0)
POLY = [(i, j) for i in range(4) for j in range(4) if i + j <= 3]


def _poly(cs):
    return polynomial_jet([(i, j, c) for (i, j), c in zip(POLY, cs)])


# -- graph operator --------------------------------------------------------------

def test_graph_aux_example():
    a, b, W = graph_aux(AmbientParams(2.0), 1.0, 1.0, 1.0, 1.0)
    assert (a, b) == (3.0, -1.0)
    assert W == pytest.approx(math.sqrt(11.0), rel=1e-15)


@pytest.mark.parametrize("tau", [0.0, 1.0, -2.0])
def test_q_residual_examples(tau):
    p = AmbientParams(tau)
    x, y = np.array([0.3, -0.7]), np.array([0.1, 0.4])
    # constant and plane graphs have no second derivatives
    np.testing.assert_allclose(q_residual(p, 0.3, x, y, 0, 0, 0, 0, 0), 0.6)
    np.testing.assert_allclose(q_residual(p, 0.0, x, y, 2.0, -1.0, 0, 0, 0), 0.0)
    # paraboloid at the origin
    assert q_residual(p, 0.0, 0.0, 0.0, 0.0, 0.0, 2.0, 2.0, 0.0) == pytest.approx(4.0)


def test_flux_example():
    fx, fy = divergence_form_flux(AmbientParams(1.0), 0.0, 0.0, 1.0, 0.0)
    assert fx == pytest.approx(1 / math.sqrt(2))
    assert fy == 0.0


@given(st.lists(coef, min_size=5, max_size=5), coord, coord, st.floats(-1, 1))
def test_euclidean_reduction(d, x, y, H):
    flat = q_residual(AmbientParams(0.0), H, x, y, *d)
    assert flat == pytest.approx(euclidean_mean_curvature_operator(H, *d), abs=1e-12)


@given(taus, st.lists(coef, min_size=5, max_size=5), coord, coord)
def test_q_partials_match_differences(tau, d, x, y):
    p = AmbientParams(tau)
    grads = q_partials(p, x, y, *d)
    for k in range(5):
        e = np.zeros(5)
        e[k] = 1e-6
        fd = (q_residual(p, 0.0, x, y, *(np.array(d) + e))
              - q_residual(p, 0.0, x, y, *(np.array(d) - e))) / 2e-6
        assert grads[k] == pytest.approx(fd, abs=1e-6)


@given(taus, st.lists(coef, min_size=len(POLY), max_size=len(POLY)), coord, coord)
def test_divergence_form_equals_q(tau, cs, x, y):
    p = AmbientParams(tau)
    jet = _poly(cs)
    direct = q_residual(p, 0.25, x, y, *jet(x, y)[1:])
    div = divergence_form_residual(p, 0.25, lambda a, b: jet(a, b)[0], x, y, 1e-4)
    assert div == pytest.approx(direct, abs=1e-5)


@given(taus, st.lists(st.floats(-0.5, 0.5), min_size=len(POLY), max_size=len(POLY)),
       st.floats(-0.5, 0.5), st.floats(-0.5, 0.5))
def test_graph_formula_matches_immersion_oracle(tau, cs, x, y):
    p = AmbientParams(tau)
    jet = _poly(cs)
    closed = graph_mean_curvature(p, x, y, *jet(x, y)[1:])
    assert mean_curvature_immersion(graph_chart(jet), x, y, p) == pytest.approx(closed, abs=1e-8)


@given(taus, st.floats(-1, 1), st.lists(coef, min_size=len(POLY), max_size=len(POLY)), coord, coord)
def test_q_invariant_under_horizontal_translation(tau, a, cs, x, y):
    """translate-F1(a) maps the graph of u to the graph of u(x - a, y) + k y."""
    p = AmbientParams(tau)
    jet = _poly(cs)
    moved_origin = apply_isometry(("translate-F1", a), (0.0, 1.0, 0.0), p)
    assert moved_origin[0] == pytest.approx(a) and moved_origin[1] == pytest.approx(1.0)
    k = moved_origin[2]
    u, ux, uy, uxx, uyy, uxy = jet(x - a, y)
    before = q_residual(p, 0.0, x - a, y, ux, uy, uxx, uyy, uxy)
    after = q_residual(p, 0.0, x, y, ux, uy + k, uxx, uyy, uxy)
    assert after == pytest.approx(before, abs=1e-10)


def test_plane_is_minimal():
    for tau in (0.0, 1.0, -2.0):
        assert mean_curvature_immersion(plane_chart(0.7), 0.3, -0.2, AmbientParams(tau)) == \
            pytest.approx(0.0, abs=1e-10)


# -- cylinders -----------------------------------------------------------------

@pytest.mark.parametrize("R", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("tau", [0.0, 1.0, -2.0])
def test_cylinder_circle(R, tau):
    base = build_boundary("circle", radius=R)
    s = np.linspace(0, base.length, 7)
    np.testing.assert_allclose(cylinder_mean_curvature(base, s), 0.5 / R, rtol=1e-12)
    chart = cylinder_chart(base)
    for si in s[:3]:
        for z in (-1.0, 0.0, 2.0):
            assert mean_curvature_immersion(chart, si, z, AmbientParams(tau)) == \
                pytest.approx(0.5 / R, abs=1e-8)


def test_cylinder_ellipse_value(ellipse21):
    s0 = ellipse21.nearest_s((2.0, 0.0))
    assert cylinder_mean_curvature(ellipse21, s0) == pytest.approx(1.0, rel=1e-10)
    assert mean_curvature_immersion(cylinder_chart(ellipse21), s0, 0.3, AmbientParams(1.0)) == \
        pytest.approx(1.0, abs=1e-8)


# -- cones -----------------------------------------------------------------------

def test_cone_reference_value(unit_circle):
    cone = ConeSpec((0.0, 0.0, 1.0), unit_circle)
    val = cone_mean_curvature(cone, AmbientParams(1.0), 0.4, 1.0)
    assert val == pytest.approx(3 ** -1.5, rel=1e-12)
    assert val == pytest.approx(0.19245, abs=5e-6)
    assert mean_curvature_immersion(cone_chart(cone), 0.4, 1.0, AmbientParams(1.0)) == \
        pytest.approx(val, abs=1e-8)


@pytest.mark.parametrize("tau", [0.0, 0.5, -1.0, 2.0])
@pytest.mark.parametrize("c", [1.0, -1.0, 10.0, -10.0])
def test_cone_matches_oracle_on_ellipse(tau, c):
    base = build_boundary("ellipse", a=1.5, b=1.0)
    cone = ConeSpec((0.0, 0.0, c), base)
    p = AmbientParams(tau)
    for s in np.linspace(0, base.length, 5, endpoint=False):
        for t in (0.2, 0.8, 1.5):
            assert cone_mean_curvature(cone, p, s, t) == \
                pytest.approx(mean_curvature_immersion(cone_chart(cone), s, t, p), abs=1e-7)


def test_cone_large_vertex_limit(unit_circle, ellipse21):
    p = AmbientParams(1.0)
    cone = ConeSpec((0.0, 0.0, 1e3), unit_circle)
    assert cone_mean_curvature(cone, p, 0.0, 1.0) == pytest.approx(0.5, abs=1e-3)
    s = np.linspace(0, ellipse21.length, 9, endpoint=False)
    gaps = []
    for c in (1e2, 1e3, 1e4):
        H = cone_mean_curvature(ConeSpec((0.0, 0.0, c), ellipse21), p, s, 1.0)
        gaps.append(np.max(np.abs(H - cone_large_vertex_limit(ellipse21, s))))
    # |H - k/2| <= C / c
    assert gaps[1] < gaps[0] / 5 and gaps[2] < gaps[1] / 5
    assert gaps[0] * 1e2 == pytest.approx(gaps[2] * 1e4, rel=0.5)
    # at t0 != 1 the limit is the cylinder over t0 * gamma
    H = cone_mean_curvature(ConeSpec((0.0, 0.0, 1e6), unit_circle), p, 0.0, 0.5)
    assert H == pytest.approx(cone_large_vertex_limit(unit_circle, 0.0, 0.5), abs=1e-5)
    assert H == pytest.approx(1.0, abs=1e-5)


def test_cone_near_vertex_blows_up(unit_circle):
    cone = ConeSpec((0.0, 0.0, 1.0), unit_circle)
    assert cone_mean_curvature(cone, AmbientParams(1.0), 0.0, 1e-3) > 100


def test_cone_validation(unit_circle):
    with pytest.raises(ValidationError):
        ConeSpec((0.0, 0.0, 0.0), unit_circle)
    with pytest.raises(ValidationError):
        cone_mean_curvature(ConeSpec((0.1, 0.0, 1.0), unit_circle), AmbientParams(1.0), 0.0, 1.0)
    with pytest.raises(ValidationError):
        cone_mean_curvature(ConeSpec((0.0, 0.0, 1.0), unit_circle), AmbientParams(1.0), 0.0, 0.0)


def test_cone_singular_bracket_reported():
    # a line through the vertex projection makes m = 0; a degenerate (flat) cone at c -> 0
    tiny = ConeSpec((0.0, 0.0, 1e-200), build_boundary("circle"))
    with pytest.raises(SingularityError):
        cone_mean_curvature(tiny, AmbientParams(0.0), 0.0, 1e-200)


@given(st.floats(-2, 2))
def test_cone_invariant_under_vertical_translation(dz):
    """F3 is an isometry: shifting the surface in z leaves the oracle value unchanged."""
    base = build_boundary("ellipse", a=1.5, b=1.0, samples=256)
    p = AmbientParams(1.0)
    chart = cone_chart(ConeSpec((0.0, 0.0, 2.0), base))

    def derivs(s, t):
        d = chart.jet(s, t)
        return (d[0] + np.array([0.0, 0.0, dz]),) + tuple(d[1:])

    shifted = ImmersionChart(lambda s, t: chart.position(s, t) + np.array([0.0, 0.0, dz]), derivs,
                             orientation="down", name="shifted cone")
    assert mean_curvature_immersion(shifted, 0.7, 0.6, p) == \
        pytest.approx(mean_curvature_immersion(chart, 0.7, 0.6, p), abs=1e-9)
