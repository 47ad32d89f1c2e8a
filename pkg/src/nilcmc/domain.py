"""Planar domains: arclength boundary curves, Fermi collars, and the FD grid.

A :class:`BoundaryCurve` wraps a periodic parametrization theta -> (x, y) and
exposes everything in terms of the arclength ``s`` of the counter-clockwise
traversal.  Curvature is signed with respect to the inner normal
nu = J T, so convex domains have k > 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import interpolate, optimize, sparse
from shapely.geometry import LinearRing

from .exceptions import ConvergenceError, ValidationError

__all__ = [
    "BoundaryCurve",
    "CircleParam",
    "EllipseParam",
    "SplineParam",
    "OffsetParam",
    "FermiCollar",
    "Grid",
    "ScalarField",
    "build_boundary",
    "read_curve_csv",
    "curvature_range",
    "build_grid",
    "fermi_coordinates",
    "shrunk_domain",
    "fourier_data",
    "DIRECTIONS",
]

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


def _cross(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


# -- parametrizations ----------------------------------------------------------
# Each returns (pos, unit tangent, speed, curvature, dk/dtheta) for an array of
# parameter values; pos and tangent have a trailing axis of length 2.

@dataclass(frozen=True)
class CircleParam:
    radius: float = 1.0
    center: tuple = (0.0, 0.0)

    @property
    def period(self):
        return 2 * math.pi

    def __call__(self, th):
        th = np.asarray(th, dtype=float)
        c, s = np.cos(th), np.sin(th)
        pos = np.stack([self.center[0] + self.radius * c, self.center[1] + self.radius * s], -1)
        tan = np.stack([-s, c], -1)
        one = np.ones_like(th)
        return pos, tan, self.radius * one, one / self.radius, 0.0 * one


@dataclass(frozen=True)
class EllipseParam:
    a: float = 2.0
    b: float = 1.0
    center: tuple = (0.0, 0.0)

    @property
    def period(self):
        return 2 * math.pi

    def __call__(self, th):
        th = np.asarray(th, dtype=float)
        a, b = self.a, self.b
        c, s = np.cos(th), np.sin(th)
        pos = np.stack([self.center[0] + a * c, self.center[1] + b * s], -1)
        vel = np.stack([-a * s, b * c], -1)
        speed = np.hypot(vel[..., 0], vel[..., 1])
        k = a * b / speed ** 3
        dspeed = (a * a - b * b) * s * c / speed
        dk = -3 * a * b * dspeed / speed ** 4
        return pos, vel / speed[..., None], speed, k, dk


class SplineParam:
    """Periodic quintic spline through closed (theta, x, y) samples."""

    def __init__(self, theta, xy):
        theta = np.asarray(theta, dtype=float)
        xy = np.asarray(xy, dtype=float)
        if np.any(np.diff(theta) <= 0):
            raise ValidationError("curve parameter must be strictly increasing")
        if not np.allclose(xy[0], xy[-1], atol=1e-12):
            raise ValidationError("spline samples must be closed (last point repeats the first)")
        xy = xy.copy()
        xy[-1] = xy[0]
        self._spl = interpolate.make_interp_spline(theta, xy, k=5, bc_type="periodic")
        self._t0 = theta[0]
        self.period = float(theta[-1] - theta[0])

    def __call__(self, th):
        th = self._t0 + np.mod(np.asarray(th, dtype=float) - self._t0, self.period)
        pos = self._spl(th)
        d1 = self._spl(th, 1)
        d2 = self._spl(th, 2)
        d3 = self._spl(th, 3)
        speed = np.hypot(d1[..., 0], d1[..., 1])
        c12 = _cross(d1, d2)
        k = c12 / speed ** 3
        dk = _cross(d1, d3) / speed ** 3 - 3 * c12 * np.sum(d1 * d2, -1) / speed ** 5
        return pos, d1 / speed[..., None], speed, k, dk


class _Reversed:
    """Traverse a parametrization backwards (flips orientation)."""

    def __init__(self, base):
        self.base = base
        self.period = base.period

    def __call__(self, th):
        pos, tan, speed, k, dk = self.base(-np.asarray(th, dtype=float))
        return pos, -tan, speed, -k, dk


class OffsetParam:
    """gamma(s) + delta nu(s) over an arclength base curve (theta = base s)."""

    def __init__(self, base: "BoundaryCurve", delta: float):
        self.base = base
        self.delta = float(delta)
        self.period = base.length

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        pos, tan, speed, k, dk = self.base._eval(s)
        dk = dk / speed
        phi = 1.0 - self.delta * k
        nu = np.stack([-tan[..., 1], tan[..., 0]], -1)
        return pos + self.delta * nu, tan, phi, k / phi, dk / phi ** 2


# -- the curve ------------------------------------------------------------------

class BoundaryCurve:
    """Closed, counter-clockwise, arclength-parametrized C^3 plane curve.

    Parameters
    ----------
    param : callable
        Periodic parametrization returning (pos, tangent, speed, k, dk/dtheta).
    samples : int
        Number of arclength samples kept for searches and checks.
    kind : str
        Descriptive tag ("circle", "ellipse", "user-parametric", "offset").
    """

    def __init__(self, param, samples: int = 2048, kind: str = "user-parametric", shape=None,
                 check: bool = True):
        if samples < 16:
            raise ValidationError("need at least 16 curve samples")
        self.kind = kind
        self.shape = dict(shape or {})
        self.n_samples = int(samples)
        if _signed_area(param, 4 * samples) < 0:
            param = _Reversed(param)
        self._param = param
        period = float(param.period)
        # cumulative arclength on a fine theta mesh, 8-point Gauss per panel
        m = max(4 * samples, 1024)
        self._th = np.linspace(0.0, period, m + 1)
        self._dth = period / m
        panel = self._panel_length(self._th[:-1], np.full(m, self._dth))
        self._cum = np.concatenate([[0.0], np.cumsum(panel)])
        self.length = float(self._cum[-1])
        self._seed = interpolate.PchipInterpolator(self._cum, self._th)
        self.s_samples = np.linspace(0.0, self.length, self.n_samples, endpoint=False)
        self.theta_samples = self.theta(self.s_samples)
        self.points = self._param(self.theta_samples)[0]
        if check:
            self.validate()

    # arclength bookkeeping
    def _panel_length(self, a, w):
        nodes = a[:, None] + 0.5 * w[:, None] * (_GL_X[None, :] + 1.0)
        speed = self._param(nodes)[2]
        return 0.5 * w * (speed @ _GL_W)

    def _s_of_theta(self, th):
        i = np.clip((th // self._dth).astype(int), 0, len(self._th) - 2)
        return self._cum[i] + self._panel_length(self._th[i], th - self._th[i])

    def theta(self, s):
        """Parameter value of arclength ``s`` (taken modulo the length)."""
        s = np.mod(np.asarray(s, dtype=float), self.length)
        flat = s.ravel()
        th = self._seed(flat)
        for _ in range(4):
            th = th - (self._s_of_theta(th) - flat) / self._param(th)[2]
        return th.reshape(s.shape)

    def _eval(self, s):
        return self._param(self.theta(s))

    def position(self, s):
        return self._eval(s)[0]

    def tangent(self, s):
        return self._eval(s)[1]

    def normal(self, s):
        """Inner unit normal nu = J T."""
        t = self.tangent(s)
        return np.stack([-t[..., 1], t[..., 0]], -1)

    def curvature(self, s):
        return self._eval(s)[3]

    def curvature_derivative(self, s):
        """dk/ds."""
        _, _, speed, _, dk = self._eval(s)
        return dk / speed

    def derivatives(self, s, order: int = 2):
        """Position and arclength derivatives up to ``order`` (<= 3).

        Returns a list [gamma, gamma', gamma'', gamma'''] truncated to
        ``order + 1`` entries, each of shape (..., 2).
        """
        pos, tan, speed, k, dk = self._eval(s)
        nu = np.stack([-tan[..., 1], tan[..., 0]], -1)
        out = [pos, tan, k[..., None] * nu,
               (dk / speed)[..., None] * nu - (k * k)[..., None] * tan]
        return out[: order + 1]

    def validate(self):
        th = self.theta(self.s_samples)
        speed_err = np.max(np.abs(self._s_of_theta(th) - self.s_samples))
        if speed_err > 1e-9 * max(1.0, self.length):
            raise ValidationError(f"arclength inversion error {speed_err:.3g}")
        if not np.allclose(self.position(self.length), self.position(0.0), atol=1e-10):
            raise ValidationError("curve is not closed")
        if not LinearRing(self.points).is_simple:
            raise ValidationError("curve self-intersects at sample resolution")
        return self

    # searches
    def nearest_s(self, point):
        """Arclength of the nearest boundary point (sample seed, Newton polish)."""
        p = np.asarray(point, dtype=float)
        i = int(np.argmin(np.sum((self.points - p) ** 2, axis=1)))
        s = self.s_samples[i]
        for _ in range(30):
            pos, tan, k = self.position(s), self.tangent(s), self.curvature(s)
            r = pos - p
            g = r @ tan
            dg = 1.0 + k * (r @ np.array([-tan[1], tan[0]]))
            if dg <= 1e-12:
                break
            step = g / dg
            s = s - step
            if abs(step) < 1e-15 * max(1.0, self.length):
                break
        return float(np.mod(s, self.length))

    def line_roots(self, p0, e):
        """Arclengths where the line p0 + lam e meets the curve, with their lam."""
        p0 = np.asarray(p0, dtype=float)
        e = np.asarray(e, dtype=float)
        f = _cross(e, self.points - p0)
        nxt = np.roll(f, -1)
        idx = np.nonzero((f == 0) | (np.sign(f) * np.sign(nxt) < 0))[0]
        th = self.theta_samples
        period = float(self._param.period)
        g = lambda x: float(_cross(e, self._param(np.array(x))[0] - p0))
        found = []
        for i in idx:
            if f[i] == 0:
                found.append(th[i])
                continue
            b = th[i + 1] if i + 1 < len(th) else period
            found.append(optimize.brentq(g, th[i], b, xtol=1e-15, rtol=1e-15))
        if not found:
            empty = np.zeros(0)
            return empty, empty
        s = np.mod(self._s_of_theta(np.mod(np.array(found), period)), self.length)
        s = np.unique(s)
        lam = (self.position(s) - p0) @ e / (e @ e)
        return s, lam

    def __repr__(self):
        return f"BoundaryCurve(kind={self.kind!r}, length={self.length:.6g}, shape={self.shape})"


def _signed_area(param, n):
    th = np.linspace(0.0, param.period, n, endpoint=False)
    pos = param(th)[0]
    return 0.5 * np.sum(_cross(pos, np.roll(pos, -1, axis=0)))


def read_curve_csv(path):
    """Read ``s,x,y`` samples; returns (s, xy) arrays."""
    data = np.genfromtxt(path, delimiter=",", names=True, dtype=float)
    if data.dtype.names is None or tuple(data.dtype.names[:3]) != ("s", "x", "y"):
        raise ValidationError(f"{path}: expected header 's,x,y'")
    s = np.asarray(data["s"], dtype=float)
    xy = np.stack([data["x"], data["y"]], -1)
    if not (np.all(np.isfinite(s)) and np.all(np.isfinite(xy))):
        raise ValidationError(f"{path}: non-finite samples")
    return s, xy


def build_boundary(kind: str = "circle", samples: int = 2048, *, radius: float = 1.0,
                   center=(0.0, 0.0), a: float = 2.0, b: float = 1.0, s=None, xy=None,
                   path=None) -> BoundaryCurve:
    """Build an arclength boundary curve.

    ``kind`` is ``"circle"`` (radius, center), ``"ellipse"`` (semi-axes a, b,
    center) or ``"user-parametric"`` (samples ``s``/``xy`` or a CSV ``path``).
    Without ``s``, user samples are parametrized by cumulative chord length.
    """
    center = tuple(float(c) for c in center)
    if kind == "circle":
        if not radius > 0:
            raise ValidationError("circle radius must be positive")
        return BoundaryCurve(CircleParam(float(radius), center), samples, kind,
                             {"radius": float(radius), "center": center})
    if kind == "ellipse":
        if not (a > 0 and b > 0):
            raise ValidationError("ellipse semi-axes must be positive")
        return BoundaryCurve(EllipseParam(float(a), float(b), center), samples, kind,
                             {"a": float(a), "b": float(b), "center": center})
    if kind == "user-parametric":
        if path is not None:
            s, xy = read_curve_csv(path)
        if s is None and xy is not None:
            xy = np.asarray(xy, dtype=float)
            s = np.concatenate([[0.0], np.cumsum(np.hypot(*np.diff(xy, axis=0).T))])
        if s is None or xy is None:
            raise ValidationError("user-parametric curve needs samples or a CSV path")
        s = np.asarray(s, dtype=float)
        xy = np.asarray(xy, dtype=float)
        if not np.allclose(xy[0], xy[-1], atol=1e-12):
            s = np.append(s, s[-1] + np.hypot(*(xy[-1] - xy[0])))
            xy = np.vstack([xy, xy[:1]])
        return BoundaryCurve(SplineParam(s, xy), samples, kind,
                             {"path": str(path) if path else None, "n": len(s)})
    raise ValidationError(f"unknown boundary kind {kind!r}")


def curvature_range(curve: BoundaryCurve, require_positive: bool = False, samples: int = 8192):
    """(kmin, kmax) over dense samples of the curve."""
    s = np.linspace(0.0, curve.length, samples, endpoint=False)
    k = curve.curvature(s)
    kmin, kmax = float(np.min(k)), float(np.max(k))
    if require_positive and kmin <= 0:
        raise ValidationError(f"boundary curvature must be positive, got kmin = {kmin:.6g}")
    return kmin, kmax


def shrunk_domain(curve: BoundaryCurve, delta: float) -> BoundaryCurve:
    """Boundary of the inward offset domain at distance ``delta``."""
    kmin, kmax = curvature_range(curve)
    if delta < 0:
        raise ValidationError("offset distance must be non-negative")
    if kmax > 0 and delta >= 1.0 / kmax:
        raise ValidationError(f"offset {delta} must be below 1/kmax = {1.0 / kmax:.6g}")
    shape = dict(curve.shape, delta=float(delta))
    return BoundaryCurve(OffsetParam(curve, delta), curve.n_samples, "offset", shape)


# -- Fermi collar ----------------------------------------------------------------

@dataclass(frozen=True)
class FermiCollar:
    """Tubular coordinates P(s, t) = gamma(s) + t nu(s), 0 <= t <= width."""

    base: BoundaryCurve
    width: float

    def __post_init__(self):
        kmin, kmax = curvature_range(self.base)
        if kmin <= 0:
            raise ValidationError("Fermi collars are only built over convex (k > 0) curves")
        if not 0 < self.width < 1.0 / kmax:
            raise ValidationError(f"collar width must lie in (0, 1/kmax) = (0, {1.0 / kmax:.6g})")

    def point(self, s, t):
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        return self.base.position(s) + t[..., None] * self.base.normal(s)

    def jacobian_factor(self, s, t):
        return 1.0 - np.asarray(t) * self.base.curvature(s)


def fermi_coordinates(collar: FermiCollar, point, tol: float = 1e-13, max_iter: int = 50):
    """(s, t) with P(s, t) = point, or None when the point is outside the collar."""
    p = np.asarray(point, dtype=float)
    curve = collar.base
    d2 = np.sum((curve.points - p) ** 2, axis=1)
    i = int(np.argmin(d2))
    spacing = curve.length / curve.n_samples
    s = curve.s_samples[i]
    t0 = float((p - curve.points[i]) @ curve.normal(s))
    if t0 < -spacing or math.sqrt(d2[i]) > collar.width + spacing:
        return None
    t = t0
    for _ in range(max_iter):
        r = collar.point(s, t) - p
        phi = float(collar.jacobian_factor(s, t))
        if phi <= 0:
            raise ConvergenceError("Fermi inversion left the collar", {"s": s, "t": t})
        ds = float(r @ curve.tangent(s)) / phi
        dt = float(r @ curve.normal(s))
        s, t = s - ds, t - dt
        if math.hypot(ds, dt) < tol:
            break
    else:
        raise ConvergenceError("Fermi inversion did not converge",
                               {"point": p.tolist(), "s": s, "t": t})
    if t < -1e-12 or t > collar.width + 1e-12:
        return None
    return float(np.mod(s, curve.length)), float(max(t, 0.0))


# -- finite-difference grid ----------------------------------------------------

DIRECTIONS = {"x": (1, 0), "y": (0, 1), "xi": (1, 1), "eta": (1, -1)}


@dataclass
class Grid:
    """Lattice h Z^2 restricted to the open domain, with Shortley-Weller data.

    For each node and direction in :data:`DIRECTIONS`, ``nbr[d]`` holds the
    (minus, plus) neighbour node indices (-1 when the neighbour is a boundary
    point), ``bnd[d]`` the matching boundary-point indices, and ``dist[d]``
    the physical distances to the neighbours.
    """

    curve: BoundaryCurve
    h: float
    ij: np.ndarray
    nodes: np.ndarray
    nbr: dict
    bnd: dict
    dist: dict
    boundary_points: np.ndarray
    boundary_s: np.ndarray
    _ops: dict = field(default_factory=dict, repr=False)

    @property
    def n(self):
        return len(self.nodes)

    @property
    def near_boundary(self):
        """Mask of nodes with at least one boundary neighbour."""
        mask = np.zeros(self.n, dtype=bool)
        for d in DIRECTIONS:
            mask |= np.any(self.nbr[d] < 0, axis=1)
        return mask

    @property
    def axis_boundary(self):
        """Mask of nodes with a boundary neighbour along x or y."""
        return np.any(self.nbr["x"] < 0, axis=1) | np.any(self.nbr["y"] < 0, axis=1)

    def fractions(self, d):
        """Neighbour distances along ``d`` in units of the lattice step."""
        return self.dist[d] / (self.h * math.hypot(*DIRECTIONS[d]))

    def operators(self):
        """Sparse (A, B) pairs for ux, uy, uxx, uyy, uxy: D u = A u + B g."""
        if self._ops:
            return self._ops
        first, second = {}, {}
        for d in DIRECTIONS:
            first[d] = self._three_point(d, _d1_weights)
            second[d] = self._three_point(d, _d2_weights)
        self._ops["ux"] = first["x"]
        self._ops["uy"] = first["y"]
        self._ops["uxx"] = second["x"]
        self._ops["uyy"] = second["y"]
        A = 0.5 * (second["xi"][0] - second["eta"][0])
        B = 0.5 * (second["xi"][1] - second["eta"][1])
        self._ops["uxy"] = (A.tocsr(), B.tocsr())
        return self._ops

    def _three_point(self, d, weights):
        hm, hp = self.dist[d][:, 0], self.dist[d][:, 1]
        cm, c0, cp = weights(hm, hp)
        rows = np.arange(self.n)
        m = len(self.boundary_s)
        a_r, a_c, a_v = [rows], [rows], [c0]
        b_r, b_c, b_v = [], [], []
        for side, c in ((0, cm), (1, cp)):
            nb = self.nbr[d][:, side]
            inner = nb >= 0
            a_r.append(rows[inner]); a_c.append(nb[inner]); a_v.append(c[inner])
            b_r.append(rows[~inner]); b_c.append(self.bnd[d][~inner, side]); b_v.append(c[~inner])
        A = sparse.csr_matrix((np.concatenate(a_v), (np.concatenate(a_r), np.concatenate(a_c))),
                              shape=(self.n, self.n))
        B = sparse.csr_matrix((np.concatenate(b_v), (np.concatenate(b_r), np.concatenate(b_c))),
                              shape=(self.n, m))
        return A, B

    def derivatives(self, u, g):
        """Discrete (ux, uy, uxx, uyy, uxy) at every node.

        Same stencils as :meth:`operators`, but evaluated as
        sum_k w_k (v_k - u_0): the weights sum to zero, and differencing first
        keeps the huge weights of nodes hugging the boundary from amplifying
        rounding in u itself.
        """
        u = np.asarray(u, dtype=float)
        g = np.asarray(g, dtype=float)
        diff = {}
        for d in DIRECTIONS:
            nb, bd = self.nbr[d], self.bnd[d]
            vals = np.where(nb >= 0, u[np.maximum(nb, 0)], g[np.maximum(bd, 0)] if len(g) else 0.0)
            diff[d] = vals - u[:, None]

        def apply(d, weights):
            cm, _, cp = weights(self.dist[d][:, 0], self.dist[d][:, 1])
            return cm * diff[d][:, 0] + cp * diff[d][:, 1]

        uxy = 0.5 * (apply("xi", _d2_weights) - apply("eta", _d2_weights))
        return (apply("x", _d1_weights), apply("y", _d1_weights), apply("x", _d2_weights),
                apply("y", _d2_weights), uxy)

    def trace(self, data: Callable):
        """Boundary data sampled at the boundary intersection points."""
        return np.asarray(data(self.boundary_s), dtype=float) * np.ones(len(self.boundary_s))

    def index_of(self):
        """Mapping (i, j) -> node index."""
        return {tuple(k): n for n, k in enumerate(self.ij.tolist())}


def _d1_weights(hm, hp):
    return -hp / (hm * (hm + hp)), (hp - hm) / (hm * hp), hm / (hp * (hm + hp))


def _d2_weights(hm, hp):
    return 2.0 / (hm * (hm + hp)), -2.0 / (hm * hp), 2.0 / (hp * (hm + hp))


def build_grid(curve: BoundaryCurve, h: float, frac_tol: float = 1e-6) -> Grid:
    """Interior lattice nodes of the curve's domain with irregular-stencil data.

    Nodes are the points of h Z^2 strictly inside the curve (even-odd crossing
    count along each row).  Lattice neighbours are used when they are interior
    and the segment to them does not cross the boundary; otherwise the exact
    crossing point becomes a Dirichlet neighbour.  Nodes within ``frac_tol``
    lattice steps of the boundary are dropped as unknowns.
    """
    if not h > 0:
        raise ValidationError("grid spacing must be positive")
    kmin, kmax = curvature_range(curve)
    if h * max(abs(kmin), abs(kmax)) > 0.5:
        raise ValidationError(f"spacing h = {h} too coarse for curvature {max(abs(kmin), abs(kmax)):.4g}")
    pts = curve.points
    i_lo, i_hi = int(math.floor(pts[:, 0].min() / h)) - 1, int(math.ceil(pts[:, 0].max() / h)) + 1
    j_lo, j_hi = int(math.floor(pts[:, 1].min() / h)) - 1, int(math.ceil(pts[:, 1].max() / h)) + 1

    # crossings along every lattice line, keyed by (direction, line label)
    def line(d, label):
        if d == "x":
            return np.array([0.0, label * h]), np.array([h, 0.0])
        if d == "y":
            return np.array([label * h, 0.0]), np.array([0.0, h])
        if d == "xi":
            return np.array([label * h, 0.0]), np.array([h, h])
        return np.array([label * h, 0.0]), np.array([h, -h])

    def label_and_lam(d, i, j):
        if d == "x":
            return j, i
        if d == "y":
            return i, j
        if d == "xi":
            return i - j, j
        return i + j, -j

    crossings = {}

    def roots(d, label):
        key = (d, label)
        if key not in crossings:
            p0, e = line(d, label)
            crossings[key] = curve.line_roots(p0, e)
        return crossings[key]

    interior = []
    for j in range(j_lo, j_hi + 1):
        _, lam = roots("x", j)
        if len(lam) < 2:
            continue
        lam = np.sort(lam)
        for i in range(int(math.floor(lam[0])), int(math.ceil(lam[-1])) + 1):
            if np.count_nonzero(lam < i) % 2 == 1 and np.min(np.abs(lam - i)) > frac_tol:
                interior.append((i, j))
    if not interior:
        raise ValidationError("grid has no interior nodes")

    def nearest_all(d, ij):
        """Crossing distances and arclengths on both sides of each node along ``d``."""
        lo_f = np.full(len(ij), np.inf)
        hi_f = np.full(len(ij), np.inf)
        lo_s = np.full(len(ij), np.nan)
        hi_s = np.full(len(ij), np.nan)
        labels, lam0 = label_and_lam(d, ij[:, 0], ij[:, 1])
        for label in np.unique(labels):
            rows = np.nonzero(labels == label)[0]
            s_r, lam = roots(d, int(label))
            if len(lam) == 0:
                continue
            order = np.argsort(lam)
            s_r, lam = s_r[order], lam[order]
            pos = np.searchsorted(lam, lam0[rows], side="left")
            has_lo = pos > 0
            r = rows[has_lo]
            lo_f[r] = lam0[r] - lam[pos[has_lo] - 1]
            lo_s[r] = s_r[pos[has_lo] - 1]
            # exact hits count as crossings on the plus side
            has_hi = pos < len(lam)
            r = rows[has_hi]
            hi_f[r] = lam[pos[has_hi]] - lam0[r]
            hi_s[r] = s_r[pos[has_hi]]
        return lo_f, lo_s, hi_f, hi_s

    # drop nodes hugging the boundary along any stencil direction
    ij = np.array(interior, dtype=int)
    near = {d: nearest_all(d, ij) for d in DIRECTIONS}
    keep = np.ones(len(ij), dtype=bool)
    for lo_f, _, hi_f, _ in near.values():
        keep &= (lo_f > frac_tol) & (hi_f > frac_tol)
    ij = ij[keep]
    near = {d: tuple(a[keep] for a in v) for d, v in near.items()}
    n = len(ij)
    if n == 0:
        raise ValidationError("grid has no interior nodes")
    nodes = ij * h
    index = {tuple(k): m for m, k in enumerate(ij.tolist())}

    b_s, b_pos, b_key = [], [], {}

    def boundary_point(key, s, pos=None):
        if key not in b_key:
            b_key[key] = len(b_s)
            b_s.append(s)
            b_pos.append(pos)
        return b_key[key]

    nbr, bnd, dist = {}, {}, {}
    for d, (di, dj) in DIRECTIONS.items():
        step = h * math.hypot(di, dj)
        nb = np.full((n, 2), -1, dtype=int)
        bi = np.full((n, 2), -1, dtype=int)
        ds = np.zeros((n, 2))
        lo_f, lo_s, hi_f, hi_s = near[d]
        labels, _ = label_and_lam(d, ij[:, 0], ij[:, 1])
        for side, sign, frac, s_root in ((0, -1, lo_f, lo_s), (1, 1, hi_f, hi_s)):
            other = ij + sign * np.array([di, dj])
            for k in range(n):
                if frac[k] <= 1.0:
                    key = (d, int(labels[k]), round(float(s_root[k]) * 1e12))
                    bi[k, side] = boundary_point(key, float(s_root[k]))
                    ds[k, side] = frac[k] * step
                    continue
                m = index.get((int(other[k, 0]), int(other[k, 1])))
                if m is not None:
                    nb[k, side] = m
                    ds[k, side] = step
                else:
                    # dropped near-boundary lattice node: treat it as boundary
                    pos = other[k] * h
                    key = ("node", int(other[k, 0]), int(other[k, 1]))
                    bi[k, side] = boundary_point(key, curve.nearest_s(pos), pos)
                    ds[k, side] = step
        nbr[d], bnd[d], dist[d] = nb, bi, ds
    b_s = np.array(b_s, dtype=float)
    exact = curve.position(b_s) if len(b_s) else np.zeros((0, 2))
    b_xy = np.array([exact[m] if p is None else p for m, p in enumerate(b_pos)]).reshape(-1, 2)
    return Grid(curve, float(h), ij, nodes, nbr, bnd, dist, b_xy, b_s)


# -- fields ----------------------------------------------------------------------

@dataclass
class ScalarField:
    """Node values of a graph function plus its boundary trace."""

    grid: Grid
    values: np.ndarray
    boundary_values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.boundary_values = np.asarray(self.boundary_values, dtype=float)
        if self.values.shape != (self.grid.n,):
            raise ValidationError("field size does not match the grid")
        if self.boundary_values.shape != (len(self.grid.boundary_s),):
            raise ValidationError("trace size does not match the grid boundary points")
        if not (np.all(np.isfinite(self.values)) and np.all(np.isfinite(self.boundary_values))):
            raise ValidationError("field values must be finite")

    @classmethod
    def from_function(cls, grid: Grid, func, data: Optional[Callable] = None, **meta):
        """Sample ``func(x, y)`` at nodes; the trace comes from ``data(s)`` or ``func``."""
        vals = func(grid.nodes[:, 0], grid.nodes[:, 1]) * np.ones(grid.n)
        if data is None:
            bv = func(grid.boundary_points[:, 0], grid.boundary_points[:, 1]) * np.ones(len(grid.boundary_s))
        else:
            bv = grid.trace(data)
        return cls(grid, vals, bv, meta)

    def derivatives(self):
        return self.grid.derivatives(self.values, self.boundary_values)

    def all_points(self):
        """Stacked (x, y, u) for nodes followed by boundary points."""
        xy = np.vstack([self.grid.nodes, self.grid.boundary_points])
        return np.column_stack([xy, np.concatenate([self.values, self.boundary_values])])


def fourier_data(curve: BoundaryCurve, constant: float = 0.0, cos=(), sin=()):
    """phi(s) = c + sum_m a_m cos(m w) + b_m sin(m w), with w = 2 pi s / length.

    Coefficient lists start at m = 1.  On the unit circle w equals s.
    """
    cos = tuple(float(c) for c in cos)
    sin = tuple(float(c) for c in sin)
    length = curve.length

    def phi(s):
        w = 2 * math.pi * np.asarray(s, dtype=float) / length
        out = constant + 0.0 * w
        for m, c in enumerate(cos, start=1):
            out = out + c * np.cos(m * w)
        for m, c in enumerate(sin, start=1):
            out = out + c * np.sin(m * w)
        return out

    phi.spec = {"constant": float(constant), "cos": list(cos), "sin": list(sin)}
    return phi
