"""Comparison surfaces for the CMC graph equation.

Three families are available: horizontal planes (minimal, so lower barriers
when H >= 0), Euclidean cones through the boundary graph, and the logarithmic
collar profile w(t) = L ln(1 + K^2 t) in Fermi coordinates.  Sign checks go
through :func:`~nilcmc.curvature.q_residual`; an upper barrier needs
Q_H <= 0 and a lower barrier Q_H >= 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .curvature import ConeSpec, cone_mean_curvature, q_residual
from .domain import (BoundaryCurve, FermiCollar, Grid, ScalarField, SplineParam, _Reversed,
                     curvature_range, fermi_coordinates)
from .exceptions import ConvergenceError, ValidationError
from .geometry import AmbientParams, IsometrySpec, Point3, apply_isometry

__all__ = [
    "LogBarrier",
    "BarrierField",
    "ConeSearchConfig",
    "plane_field",
    "cone_height_field",
    "normalized_cone",
    "cone_sample_curvature",
    "log_barrier_field",
    "check_sign",
    "select_cone_heights",
    "find_supersolution_K",
    "write_barrier_csv",
]


@dataclass(frozen=True)
class LogBarrier:
    """w(t) = L ln(1 + K^2 t) with L = M / ln(1 + K), so w(1/K) = M."""

    M: float
    K: float

    def __post_init__(self):
        if not (self.M > 0 and self.K > 0):
            raise ValidationError("log barrier needs M > 0 and K > 0")

    @property
    def L(self):
        return self.M / math.log1p(self.K)

    def w(self, t):
        return self.L * np.log1p(self.K ** 2 * np.asarray(t, dtype=float))

    def w_t(self, t):
        return self.L * self.K ** 2 / (1.0 + self.K ** 2 * np.asarray(t, dtype=float))

    def w_tt(self, t):
        return -self.L * self.K ** 4 / (1.0 + self.K ** 2 * np.asarray(t, dtype=float)) ** 2


@dataclass
class BarrierField:
    """Sampled comparison surface.

    ``points`` are the (x, y) sample locations, ``values`` the heights there.
    Fields built on a grid keep the :class:`ScalarField` for stencil
    differencing; analytic fields carry ``jet`` returning
    (u, u_x, u_y, u_xx, u_yy, u_xy) at the sample points.
    """

    provenance: str
    points: np.ndarray
    values: np.ndarray
    scalar_field: Optional[ScalarField] = None
    jet: Optional[Callable[[], tuple]] = None
    flags: dict = field(default_factory=dict)


def plane_field(grid: Grid, height: float = 0.0) -> BarrierField:
    sf = ScalarField(grid, np.full(grid.n, float(height)), np.full(len(grid.boundary_s), float(height)),
                     {"kind": "plane", "height": float(height)})
    return BarrierField("plane", grid.nodes, sf.values, scalar_field=sf)


def _ray_hits(curve: BoundaryCurve, center, targets):
    """Arclength and ray parameter of the boundary hit along center -> target.

    The domain must be star-shaped about ``center``.  Returns (s, lam) with
    center + lam (target - center) on the curve.
    """
    c = np.asarray(center, dtype=float)
    rel = curve.points - c
    ang = np.unwrap(np.arctan2(rel[:, 1], rel[:, 0]))
    if not np.all(np.diff(ang) > 0) or not abs(ang[-1] - ang[0] - 2 * math.pi) < 2 * math.pi * 0.5:
        raise ValidationError("domain must be star-shaped about the cone vertex")
    ang_c = np.append(ang, ang[0] + 2 * math.pi)
    s_c = np.append(curve.s_samples, curve.length)
    d = np.asarray(targets, dtype=float) - c
    a = np.arctan2(d[:, 1], d[:, 0])
    a = ang[0] + np.mod(a - ang[0], 2 * math.pi)
    s = np.interp(a, ang_c, s_c)
    for _ in range(30):
        g = d[:, 0] * (curve.position(s)[:, 1] - c[1]) - d[:, 1] * (curve.position(s)[:, 0] - c[0])
        tan = curve.tangent(s)
        dg = d[:, 0] * tan[:, 1] - d[:, 1] * tan[:, 0]
        step = g / dg
        s = s - step
        if np.max(np.abs(step)) < 1e-14:
            break
    s = np.mod(s, curve.length)
    hit = curve.position(s) - c
    lam = np.sum(hit * d, axis=1) / np.sum(d * d, axis=1)
    return s, lam


def cone_height_field(cone, data: Callable, grid: Grid) -> BarrierField:
    """Height over each node of the cone from a vertex through the boundary graph.

    ``cone`` is a :class:`ConeSpec` or a vertex (x0, y0, z0).  Along the ray
    from (x0, y0) through a node, the cone is the straight segment from the
    vertex to the boundary graph point.  Nodes at (x0, y0) get z0 and are
    listed in ``flags["apex_nodes"]``.
    """
    v = Point3.of(cone.vertex if isinstance(cone, ConeSpec) else cone)
    if v.z == 0:
        raise ValidationError("cone vertex height must be nonzero")
    curve = grid.curve
    center = np.array([v.x, v.y])
    vals = np.empty(grid.n)
    rel = grid.nodes - center
    at_apex = np.hypot(rel[:, 0], rel[:, 1]) < 1e-14
    vals[at_apex] = v.z
    if np.any(~at_apex):
        s, lam = _ray_hits(curve, center, grid.nodes[~at_apex])
        # node sits at fraction 1/lam of the way to the boundary
        vals[~at_apex] = v.z + (np.asarray(data(s), dtype=float) - v.z) / lam
    sf = ScalarField(grid, vals, grid.trace(data), {"kind": "cone", "vertex": (v.x, v.y, v.z)})
    return BarrierField("cone", grid.nodes, vals, scalar_field=sf,
                        flags={"apex_nodes": np.nonzero(at_apex)[0].tolist(), "vertex": (v.x, v.y, v.z)})


def normalized_cone(curve: BoundaryCurve, params: AmbientParams, data: Callable, vertex,
                    samples: Optional[int] = None):
    """Cone through the boundary graph, moved so its vertex lies on the z-axis.

    Applies translate-F1(-x0), translate-F2(-y0) and intersects the image
    cone with z = 0.  Returns (ConeSpec over the section curve, t_max) where
    ``t_max(sigma)`` is the cone parameter of the boundary graph above the
    section point at arclength ``sigma``.  Raises ValidationError when the
    section is not a simple closed curve.
    """
    v = Point3.of(vertex)
    isos = (IsometrySpec("translate-F1", -v.x), IsometrySpec("translate-F2", -v.y))
    c = apply_isometry(isos, v, params).z
    n = samples or curve.n_samples

    def lifted(s):
        p = curve.position(s)
        q = np.column_stack([p, np.asarray(data(s), dtype=float) * np.ones(len(p))])
        return apply_isometry(isos, q, params)

    s = np.linspace(0.0, curve.length, n + 1)
    q = lifted(s)
    gap = c - q[:, 2]
    if c == 0 or not np.all(np.sign(gap) == np.sign(c)):
        raise ValidationError("cone vertex must lie strictly above (or below) the whole boundary graph")
    tstar = c / gap
    section = tstar[:, None] * q[:, :2]
    section[-1] = section[0]
    base = BoundaryCurve(SplineParam(s, section), samples=n, kind="cone-section")
    if isinstance(base._param, _Reversed):
        raise ValidationError("cone section lost its orientation; domain not star-shaped about the vertex")

    def t_max(sigma):
        th = base.theta(sigma)
        qq = lifted(np.atleast_1d(th))
        return (c - qq[:, 2]) / c

    return ConeSpec(Point3(0.0, 0.0, c), base), t_max


def cone_sample_curvature(cone: ConeSpec, t_max, params: AmbientParams, n_s: int = 96, n_t: int = 48):
    """Cone mean curvature on an (s, t) sample of the piece between vertex and boundary graph."""
    sig = np.linspace(0.0, cone.base.length, n_s, endpoint=False)
    tm = t_max(sig)
    frac = np.linspace(1.0 / n_t, 1.0, n_t)
    S = np.repeat(sig, n_t)
    T = (tm[:, None] * frac[None, :]).ravel()
    return cone_mean_curvature(cone, params, S, T).reshape(n_s, n_t)


@dataclass(frozen=True)
class ConeSearchConfig:
    start: float = 1.0
    max_doublings: int = 40
    margin: float = 1e-3
    n_s: int = 96
    n_t: int = 48


def select_cone_heights(curve: BoundaryCurve, params: AmbientParams, H: float, data: Callable,
                        vertex_xy=(0.0, 0.0), config: ConeSearchConfig = ConeSearchConfig()):
    """Vertex heights (z1, z2) of an upper and a lower cone barrier.

    z1 > 0 is the first height in a doubling schedule whose cone has mean
    curvature above H + margin on the whole piece from the vertex to the
    boundary graph; z2 < 0 the first whose cone has mean curvature below
    -margin.  Requires 2H < min k.
    """
    kmin, _ = curvature_range(curve)
    if not 2 * H < kmin:
        raise ValidationError(f"cone barriers need 2H < min k; got 2H = {2 * H:.6g}, min k = {kmin:.6g}")
    s = curve.s_samples
    phi = np.asarray(data(s), dtype=float) * np.ones(len(s))
    spread = max(1.0, float(np.max(np.abs(phi))))
    x0, y0 = (float(c) for c in vertex_xy)
    report = {}

    def search(sign):
        best = -math.inf
        z = sign * config.start * spread
        for _ in range(config.max_doublings):
            try:
                cone, t_max = normalized_cone(curve, params, data, (x0, y0, z))
                if curvature_range(cone.base)[0] <= 0:
                    raise ValidationError("section not convex")
                Hs = cone_sample_curvature(cone, t_max, params, config.n_s, config.n_t)
            except ValidationError:
                z *= 2
                continue
            margin = (Hs.min() - H) if sign > 0 else -Hs.max()
            best = max(best, margin)
            if margin > config.margin:
                report["z1" if sign > 0 else "z2"] = {"height": z, "margin": float(margin),
                                                      "H_min": float(Hs.min()), "H_max": float(Hs.max())}
                return z
            z *= 2
        raise ConvergenceError("cone height search exhausted", {"sign": sign, "best_margin": best})

    z1 = search(+1)
    z2 = search(-1)
    select_cone_heights.last_report = report
    return z1, z2


select_cone_heights.last_report = {}


def log_barrier_field(collar: FermiCollar, barrier: LogBarrier, grid: Optional[Grid] = None,
                      n_s: int = 256, n_t: int = 64) -> BarrierField:
    """w(t(p)) on the collar band 0 <= t <= 1/K, with its analytic jet.

    Without a grid, samples a uniform (s, t) mesh of the band; with a grid,
    uses the grid nodes that fall inside the band.  Derivatives use
    grad t = nu and Hess t = -(k / (1 - t k)) T (x) T.
    """
    t_hi = 1.0 / barrier.K
    if t_hi > collar.width + 1e-15:
        raise ValidationError(f"1/K = {t_hi:.6g} exceeds the collar width {collar.width:.6g}")
    curve = collar.base
    if grid is None:
        s = np.linspace(0.0, curve.length, n_s, endpoint=False)
        t = np.linspace(0.0, t_hi, n_t)
        S, T = (a.ravel() for a in np.meshgrid(s, t, indexing="ij"))
        pts = collar.point(S, T)
    else:
        st = [fermi_coordinates(collar, p) for p in grid.nodes]
        keep = np.array([c is not None and c[1] <= t_hi for c in st])
        if not keep.any():
            raise ValidationError("no grid nodes inside the barrier band")
        S = np.array([c[0] for c, k in zip(st, keep) if k])
        T = np.array([c[1] for c, k in zip(st, keep) if k])
        pts = grid.nodes[keep]
    tan = curve.tangent(S)
    nu = curve.normal(S)
    kt = curve.curvature(S) / (1.0 - T * curve.curvature(S))
    w, wt, wtt = barrier.w(T), barrier.w_t(T), barrier.w_tt(T)

    def jet():
        ux, uy = wt * nu[:, 0], wt * nu[:, 1]
        uxx = wtt * nu[:, 0] ** 2 - wt * kt * tan[:, 0] ** 2
        uyy = wtt * nu[:, 1] ** 2 - wt * kt * tan[:, 1] ** 2
        uxy = wtt * nu[:, 0] * nu[:, 1] - wt * kt * tan[:, 0] * tan[:, 1]
        return w, ux, uy, uxx, uyy, uxy

    return BarrierField("log-collar", pts, w, jet=jet,
                        flags={"s": S, "t": T, "M": barrier.M, "K": barrier.K, "L": barrier.L})


def check_sign(field: BarrierField, params: AmbientParams, H: float, region=None) -> dict:
    """Extrema of Q_H over the field; supersolution iff max < 0, subsolution iff min > 0.

    ``region`` is an optional boolean mask over the field's sample points.
    """
    pts = field.points
    if field.jet is not None:
        _, ux, uy, uxx, uyy, uxy = field.jet()
    elif field.scalar_field is not None:
        ux, uy, uxx, uyy, uxy = field.scalar_field.derivatives()
    else:
        raise ValidationError("field has neither a jet nor a grid to difference on")
    Q = q_residual(params, H, pts[:, 0], pts[:, 1], ux, uy, uxx, uyy, uxy)
    mask = np.ones(len(Q), dtype=bool) if region is None else np.asarray(region, dtype=bool)
    if not mask.any():
        raise ValidationError("sign check region is empty")
    Qm = np.where(mask, Q, np.nan)
    imax, imin = int(np.nanargmax(Qm)), int(np.nanargmin(Qm))
    maxQ, minQ = float(Q[imax]), float(Q[imin])
    return {
        "provenance": field.provenance,
        "maxQ": maxQ,
        "minQ": minQ,
        "argmax": pts[imax].tolist(),
        "argmin": pts[imin].tolist(),
        "supersolution": maxQ < 0,
        "subsolution": minQ > 0,
        "Q": Q,
    }


def find_supersolution_K(collar: FermiCollar, params: AmbientParams, H: float, M: float = 1.0,
                         margin: float = 1e-3, max_doublings: int = 30, n_s: int = 256, n_t: int = 64):
    """Smallest K in {2^i / width : i >= 1} with max Q_H(w) < -margin on [0, 1/K].

    Returns (K, report) where the report lists every tried K with its max Q.
    """
    tried = []
    for i in range(1, max_doublings + 1):
        K = 2.0 ** i / collar.width
        res = check_sign(log_barrier_field(collar, LogBarrier(M, K), n_s=n_s, n_t=n_t), params, H)
        tried.append({"K": K, "maxQ": res["maxQ"]})
        if res["maxQ"] < -margin:
            return K, {"tried": tried, "maxQ": res["maxQ"], "argmax": res["argmax"]}
    raise ConvergenceError("no K in the doubling schedule made w a strict supersolution", {"tried": tried})


def write_barrier_csv(path, field: BarrierField, params: AmbientParams, H: float):
    """CSV with header ``node_x,node_y,field,value,Q_residual``."""
    Q = check_sign(field, params, H)["Q"]
    with open(path, "w", newline="\n") as fh:
        fh.write("node_x,node_y,field,value,Q_residual\n")
        for (x, y), v, q in zip(field.points, field.values, Q):
            fh.write(f"{x:.17g},{y:.17g},{field.provenance},{v:.17g},{q:.17g}\n")
