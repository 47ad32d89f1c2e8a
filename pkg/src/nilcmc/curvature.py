"""Closed-form mean curvature of graphs, vertical cylinders and cones in H(tau).

All graph quantities use the auxiliaries

    alpha = tau y + u_x,   beta = -tau x + u_y,   W = sqrt(1 + alpha^2 + beta^2),

and the mean curvature of a graph is taken with respect to its downward
normal.  Every function broadcasts over numpy arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .domain import BoundaryCurve
from .exceptions import SingularityError, ValidationError
from .geometry import AmbientParams, ImmersionChart, Point3

__all__ = [
    "GraphAux",
    "ConeSpec",
    "graph_aux",
    "q_residual",
    "q_partials",
    "graph_mean_curvature",
    "euclidean_mean_curvature_operator",
    "divergence_form_flux",
    "divergence_form_residual",
    "cylinder_mean_curvature",
    "cone_mean_curvature",
    "cone_large_vertex_limit",
    "graph_chart",
    "polynomial_jet",
    "plane_chart",
    "cylinder_chart",
    "cone_chart",
]


class GraphAux(NamedTuple):
    alpha: np.ndarray
    beta: np.ndarray
    W: np.ndarray


def graph_aux(params: AmbientParams, x, y, ux, uy) -> GraphAux:
    tau = params.tau
    alpha = tau * np.asarray(y, dtype=float) + ux
    beta = -tau * np.asarray(x, dtype=float) + uy
    return GraphAux(alpha, beta, np.sqrt(1.0 + alpha * alpha + beta * beta))


def q_residual(params: AmbientParams, H, x, y, ux, uy, uxx, uyy, uxy):
    """Q_H(u) = W^-3 [(1+b^2) u_xx + (1+a^2) u_yy - 2ab u_xy] + 2H."""
    a, b, W = graph_aux(params, x, y, ux, uy)
    return ((1 + b * b) * uxx + (1 + a * a) * uyy - 2 * a * b * uxy) / W ** 3 + 2 * H


def q_partials(params: AmbientParams, x, y, ux, uy, uxx, uyy, uxy):
    """Partial derivatives of Q_H with respect to (u_x, u_y, u_xx, u_yy, u_xy)."""
    a, b, W = graph_aux(params, x, y, ux, uy)
    W3 = W ** 3
    N = (1 + b * b) * uxx + (1 + a * a) * uyy - 2 * a * b * uxy
    d_ux = (2 * a * uyy - 2 * b * uxy) / W3 - 3 * N * a / W ** 5
    d_uy = (2 * b * uxx - 2 * a * uxy) / W3 - 3 * N * b / W ** 5
    return d_ux, d_uy, (1 + b * b) / W3, (1 + a * a) / W3, -2 * a * b / W3


def graph_mean_curvature(params: AmbientParams, x, y, ux, uy, uxx, uyy, uxy):
    """Mean curvature of z = u(x, y) with respect to the downward normal."""
    return -0.5 * q_residual(params, 0.0, x, y, ux, uy, uxx, uyy, uxy)


def euclidean_mean_curvature_operator(H, ux, uy, uxx, uyy, uxy):
    """Classical ((1+u_y^2)u_xx + (1+u_x^2)u_yy - 2u_x u_y u_xy)/(1+|Du|^2)^(3/2) + 2H."""
    return (((1 + uy ** 2) * uxx + (1 + ux ** 2) * uyy - 2 * ux * uy * uxy)
            / (1 + ux ** 2 + uy ** 2) ** 1.5 + 2 * H)


def divergence_form_flux(params: AmbientParams, x, y, ux, uy):
    """(alpha/W, beta/W): Z/sqrt(1+|Z|^2) for Z(p) = -tau J p + Du(p)."""
    a, b, W = graph_aux(params, x, y, ux, uy)
    return a / W, b / W


def divergence_form_residual(params: AmbientParams, H, u, x, y, h):
    """div(alpha/W, beta/W) + 2H by nested central differences of a callable ``u``.

    Independent of :func:`q_residual`; used to check that the two forms agree.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)

    def flux(px, py):
        ux = (u(px + h, py) - u(px - h, py)) / (2 * h)
        uy = (u(px, py + h) - u(px, py - h)) / (2 * h)
        return divergence_form_flux(params, px, py, ux, uy)

    fx_p, _ = flux(x + h, y)
    fx_m, _ = flux(x - h, y)
    _, fy_p = flux(x, y + h)
    _, fy_m = flux(x, y - h)
    return (fx_p - fx_m) / (2 * h) + (fy_p - fy_m) / (2 * h) + 2 * H


def cylinder_mean_curvature(base: BoundaryCurve, s):
    """k(s)/2 for the vertical cylinder over ``base``; independent of tau and height."""
    return 0.5 * base.curvature(s)


@dataclass(frozen=True)
class ConeSpec:
    """Euclidean cone from ``vertex`` through a base curve lying in z = 0."""

    vertex: Point3
    base: BoundaryCurve

    def __post_init__(self):
        object.__setattr__(self, "vertex", Point3.of(self.vertex))
        if self.vertex.z == 0:
            raise ValidationError("cone vertex must lie off the plane z = 0")

    @property
    def c(self):
        return self.vertex.z


def cone_mean_curvature(cone: ConeSpec, params: AmbientParams, s, t):
    """Mean curvature of the cone (1-t)P + t gamma(s), P = (0, 0, c), downward normal.

    With m = x'y - y'x and kappa = y''x' - x''y'::

        H = c t^2 (x^2+y^2+c^2) kappa
            / (2 [tau^2 t^4 (x^2+y^2) m^2 + 2 c tau t^3 (x x' + y y') m + t^2 (c^2 + m^2)]^(3/2))
    """
    if cone.vertex.x != 0 or cone.vertex.y != 0:
        raise ValidationError("closed-form cone curvature needs the vertex on the z-axis; "
                              "move it there with a translate-F1/F2 isometry first")
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValidationError("cone parameter t must be positive")
    c = cone.c
    tau = params.tau
    pos, d1, d2 = cone.base.derivatives(s, 2)
    x, y = pos[..., 0], pos[..., 1]
    xp, yp = d1[..., 0], d1[..., 1]
    xpp, ypp = d2[..., 0], d2[..., 1]
    m = xp * y - yp * x
    r2 = x * x + y * y
    kappa = ypp * xp - xpp * yp
    bracket = (tau ** 2 * t ** 4 * r2 * m ** 2 + 2 * c * tau * t ** 3 * (x * xp + y * yp) * m
               + t ** 2 * (c ** 2 + m ** 2))
    bad = ~(bracket > 0)
    if np.any(bad):
        where = np.broadcast_to(s, bad.shape)[bad].ravel()[:1], np.broadcast_to(t, bad.shape)[bad].ravel()[:1]
        raise SingularityError(f"cone formula denominator vanishes at (s, t) = ({where[0]}, {where[1]})")
    return c * t ** 2 * (r2 + c ** 2) * kappa / (2 * bracket ** 1.5)


def cone_large_vertex_limit(base: BoundaryCurve, s, t0=1.0):
    """lim_{c -> +inf} of the cone mean curvature at fixed (s, t0).

    The cone tends to the vertical cylinder over t0 * gamma, so the limit is
    kappa(s) / (2 t0); at t0 = 1 this is the cylinder value kappa/2.
    """
    _, d1, d2 = base.derivatives(s, 2)
    kappa = d2[..., 1] * d1[..., 0] - d2[..., 0] * d1[..., 1]
    return kappa / (2 * np.asarray(t0, dtype=float))


# -- charts for the immersion oracle ---------------------------------------------

def polynomial_jet(coeffs):
    """Jet (u, u_x, u_y, u_xx, u_yy, u_xy) of u = sum c x^i y^j.

    ``coeffs`` is an iterable of (i, j, c) triples.
    """
    terms = [(int(i), int(j), float(c)) for i, j, c in coeffs]

    def mono(x, y, i, j, dx, dy):
        if dx > i or dy > j:
            return 0.0 * x
        fx = math.perm(i, dx)
        fy = math.perm(j, dy)
        return fx * fy * x ** (i - dx) * y ** (j - dy)

    def jet(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = []
        for dx, dy in ((0, 0), (1, 0), (0, 1), (2, 0), (0, 2), (1, 1)):
            out.append(sum((c * mono(x, y, i, j, dx, dy) for i, j, c in terms), 0.0 * x))
        return tuple(out)

    return jet


def graph_chart(jet) -> ImmersionChart:
    """Chart (x, y) -> (x, y, u(x, y)) with the downward normal.

    ``jet(x, y)`` returns (u, u_x, u_y, u_xx, u_yy, u_xy).
    """

    def position(s, t):
        return np.array([s, t, float(jet(s, t)[0])])

    def derivs(s, t):
        u, ux, uy, uxx, uyy, uxy = (float(v) for v in jet(s, t))
        return (np.array([s, t, u]), np.array([1.0, 0.0, ux]), np.array([0.0, 1.0, uy]),
                np.array([0.0, 0.0, uxx]), np.array([0.0, 0.0, uxy]), np.array([0.0, 0.0, uyy]))

    return ImmersionChart(position, derivs, orientation="down", name="graph")


def plane_chart(z0: float = 0.0) -> ImmersionChart:
    """The horizontal plane z = z0 (a graph of a constant)."""
    return graph_chart(polynomial_jet([(0, 0, z0)]))


def cylinder_chart(base: BoundaryCurve) -> ImmersionChart:
    """(s, t) -> (x(s), y(s), t), oriented by the inner normal so H = k/2 >= 0 when convex."""

    def position(s, t):
        p = base.position(s)
        return np.array([p[0], p[1], t])

    def derivs(s, t):
        p, d1, d2 = base.derivatives(s, 2)
        zero = np.zeros(3)
        return (np.array([p[0], p[1], t]), np.array([d1[0], d1[1], 0.0]), np.array([0.0, 0.0, 1.0]),
                np.array([d2[0], d2[1], 0.0]), zero, zero)

    return ImmersionChart(position, derivs, orientation="anticross",
                          s_range=(0.0, base.length), name="cylinder")


def cone_chart(cone: ConeSpec) -> ImmersionChart:
    """psi(s, t) = (1 - t) P + t gamma(s) with the downward normal; any vertex allowed."""
    P = cone.vertex.array
    base = cone.base

    def lift(v):
        return np.array([v[0], v[1], 0.0])

    def position(s, t):
        return (1 - t) * P + t * lift(base.position(s))

    def derivs(s, t):
        p, d1, d2 = base.derivatives(s, 2)
        g, g1, g2 = lift(p), lift(d1), lift(d2)
        return ((1 - t) * P + t * g, t * g1, g - P, t * g2, g1, np.zeros(3))

    return ImmersionChart(position, derivs, orientation="down",
                          s_range=(0.0, base.length), t_range=(0.0, math.inf), name="cone")
