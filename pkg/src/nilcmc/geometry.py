"""Ambient geometry of the Heisenberg space H(tau).

Points are written in global exponential coordinates (x, y, z) and carry the
left-invariant metric

    ds^2 = dx^2 + dy^2 + (tau (y dx - x dy) + dz)^2.

Vectors are stored by their coordinate components in the basis
(d/dx, d/dy, d/dz).  Internally most work happens in the orthonormal frame

    E1 = d/dx - tau y d/dz,   E2 = d/dy + tau x d/dz,   E3 = d/dz,

where the metric is Euclidean and the Levi-Civita connection is a constant
table.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .exceptions import SingularityError, ValidationError

__all__ = [
    "AmbientParams",
    "Point3",
    "TangentVector",
    "VectorField",
    "IsometrySpec",
    "ImmersionChart",
    "metric_tensor",
    "metric_at",
    "frame_at",
    "to_frame",
    "from_frame",
    "connection_frame",
    "connection_table",
    "covariant_derivative",
    "lie_bracket",
    "christoffel",
    "curvature_tensor",
    "sectional_curvature",
    "scalar_curvature",
    "apply_isometry",
    "compose_isometries",
    "isometry_jacobian",
    "mean_curvature_immersion",
    "fd_step",
]


@dataclass(frozen=True)
class AmbientParams:
    """Bundle-curvature parameter of H(tau); tau = 0 is Euclidean R^3."""

    tau: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.tau):
            raise ValidationError(f"tau must be finite, got {self.tau!r}")


@dataclass(frozen=True)
class Point3:
    x: float
    y: float
    z: float

    def __post_init__(self):
        if not all(math.isfinite(c) for c in (self.x, self.y, self.z)):
            raise ValidationError(f"non-finite point {self!r}")

    @classmethod
    def of(cls, p) -> "Point3":
        if isinstance(p, Point3):
            return p
        x, y, z = (float(c) for c in p)
        return cls(x, y, z)

    @property
    def array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


@dataclass(frozen=True)
class TangentVector:
    """Coordinate components (a, b, c) of a vector based at ``base``."""

    base: Point3
    components: tuple

    def __post_init__(self):
        comps = tuple(float(c) for c in self.components)
        if len(comps) != 3 or not all(math.isfinite(c) for c in comps):
            raise ValidationError(f"bad tangent components {self.components!r}")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "base", Point3.of(self.base))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.components)

    @property
    def a(self):
        return self.components[0]

    @property
    def b(self):
        return self.components[1]

    @property
    def c(self):
        return self.components[2]


def fd_step(x, rel=1e-5):
    """Central-difference step scaled by coordinate magnitude."""
    return rel * max(1.0, float(np.max(np.abs(x))))


def _as_xyz(p) -> np.ndarray:
    if isinstance(p, Point3):
        return p.array
    return np.asarray(p, dtype=float)


def _frame_matrix(p, tau) -> np.ndarray:
    # coordinate components -> frame coefficients
    x, y, _ = _as_xyz(p)
    return np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [tau * y, -tau * x, 1.0]])


def to_frame(p, v, params: AmbientParams) -> np.ndarray:
    """Coefficients of coordinate vector(s) ``v`` at ``p`` in the frame E1, E2, E3."""
    x, y, _ = _as_xyz(p)
    v = np.asarray(v, dtype=float)
    out = v.copy()
    out[..., 2] = v[..., 2] + params.tau * (y * v[..., 0] - x * v[..., 1])
    return out


def from_frame(p, a, params: AmbientParams) -> np.ndarray:
    """Inverse of :func:`to_frame`."""
    x, y, _ = _as_xyz(p)
    a = np.asarray(a, dtype=float)
    out = a.copy()
    out[..., 2] = a[..., 2] - params.tau * (y * a[..., 0] - x * a[..., 1])
    return out


def metric_tensor(p, params: AmbientParams) -> np.ndarray:
    """Coordinate matrix g_ij at ``p``."""
    m = _frame_matrix(p, params.tau)
    return m.T @ m


def _check_base(p, *vectors):
    for v in vectors:
        if isinstance(v, TangentVector) and v.base != p:
            raise ValidationError(f"vector based at {v.base} used at {p}")


def metric_at(p, v, w, params: AmbientParams) -> float:
    """Inner product <v, w> at ``p``."""
    p = Point3.of(p)
    _check_base(p, v, w)
    va = v.array if isinstance(v, TangentVector) else np.asarray(v, float)
    wa = w.array if isinstance(w, TangentVector) else np.asarray(w, float)
    return float(to_frame(p, va, params) @ to_frame(p, wa, params))


def frame_at(p, params: AmbientParams):
    """The orthonormal frame (E1, E2, E3) at ``p`` as tangent vectors."""
    p = Point3.of(p)
    tau = params.tau
    return (
        TangentVector(p, (1.0, 0.0, -tau * p.y)),
        TangentVector(p, (0.0, 1.0, tau * p.x)),
        TangentVector(p, (0.0, 0.0, 1.0)),
    )


def connection_table(params: AmbientParams) -> np.ndarray:
    """``C[i, j]`` holds the frame coefficients of nabla_{E_i+1} E_j+1."""
    tau = params.tau
    C = np.zeros((3, 3, 3))
    C[0, 1] = (0.0, 0.0, tau)
    C[1, 0] = (0.0, 0.0, -tau)
    C[0, 2] = (0.0, -tau, 0.0)
    C[2, 0] = (0.0, -tau, 0.0)
    C[1, 2] = (tau, 0.0, 0.0)
    C[2, 1] = (tau, 0.0, 0.0)
    return C


def connection_frame(i: int, j: int, params: AmbientParams) -> np.ndarray:
    """nabla_{E_i} E_j as frame coefficients, indices 1..3."""
    if i not in (1, 2, 3) or j not in (1, 2, 3):
        raise ValidationError(f"frame indices must be in 1..3, got ({i}, {j})")
    return connection_table(params)[i - 1, j - 1].copy()


@dataclass(frozen=True)
class VectorField:
    """A smooth vector field given by coordinate-component functions.

    ``values(q)`` returns the coordinate components at the (3,) point ``q``;
    ``jacobian(q)`` returns d(values)/d(x, y, z) as a (3, 3) array with rows
    indexing components.  Without a jacobian, central differences are used.
    """

    values: Callable[[np.ndarray], np.ndarray]
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __call__(self, q) -> np.ndarray:
        return np.asarray(self.values(_as_xyz(q)), dtype=float)

    def jac(self, q) -> np.ndarray:
        q = _as_xyz(q)
        if self.jacobian is not None:
            return np.asarray(self.jacobian(q), dtype=float)
        h = fd_step(q)
        J = np.empty((3, 3))
        for k in range(3):
            e = np.zeros(3)
            e[k] = h
            J[:, k] = (self(q + e) - self(q - e)) / (2 * h)
        return J

    @classmethod
    def constant(cls, v) -> "VectorField":
        v = np.asarray(v, dtype=float)
        return cls(lambda q: v, lambda q: np.zeros((3, 3)))

    @classmethod
    def frame(cls, i: int, params: AmbientParams) -> "VectorField":
        tau = params.tau
        if i == 1:
            return cls(lambda q: np.array([1.0, 0.0, -tau * q[1]]),
                       lambda q: np.array([[0, 0, 0], [0, 0, 0], [0, -tau, 0.0]]))
        if i == 2:
            return cls(lambda q: np.array([0.0, 1.0, tau * q[0]]),
                       lambda q: np.array([[0, 0, 0], [0, 0, 0], [tau, 0, 0.0]]))
        if i == 3:
            return cls.constant([0.0, 0.0, 1.0])
        raise ValidationError(f"frame index must be in 1..3, got {i}")


def _nabla(p, xv, yv, dy_along_x, params):
    """nabla_X Y at p from X(p), Y(p) and the coordinate derivative of Y along X."""
    tau = params.tau
    a = to_frame(p, xv, params)
    b = to_frame(p, yv, params)
    # X(b_j): derivative of the frame coefficients of Y along X
    db = to_frame(p, dy_along_x, params)
    db[2] += tau * (xv[1] * yv[0] - xv[0] * yv[1])
    out = db + np.einsum("i,j,ijk->k", a, b, connection_table(params))
    return from_frame(p, out, params)


def covariant_derivative(X: VectorField, Y: VectorField, p, params: AmbientParams) -> TangentVector:
    """nabla_X Y at ``p`` via the frame table, bilinearity and Leibniz."""
    q = _as_xyz(p)
    xv = X(q)
    yv = Y(q)
    return TangentVector(Point3.of(q), tuple(_nabla(q, xv, yv, Y.jac(q) @ xv, params)))


def lie_bracket(X: VectorField, Y: VectorField, p) -> TangentVector:
    """Coordinate Lie bracket [X, Y] = DY.X - DX.Y at ``p``."""
    q = _as_xyz(p)
    return TangentVector(Point3.of(q), tuple(Y.jac(q) @ X(q) - X.jac(q) @ Y(q)))


def christoffel(p, v, w, params: AmbientParams) -> np.ndarray:
    """nabla_v W at ``p`` for the constant coordinate extension W of ``w``.

    This is the coordinate Christoffel term Gamma(v, w); the acceleration of a
    curve c is c'' + Gamma(c', c').
    """
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    return _nabla(_as_xyz(p), v, w, np.zeros(3), params)


def _vec(v):
    return v.array if isinstance(v, TangentVector) else np.asarray(v, dtype=float)


def curvature_tensor(X, Y, Z, p, params: AmbientParams) -> TangentVector:
    """R(X, Y)Z = -3 tau^2 (X^Y)Z + 4 tau^2 R1(d/dz; X, Y)Z.

    (X^Y)Z = <Y,Z>X - <X,Z>Y.  With R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y]
    the sectional curvatures <R(X,Y)Y, X> are -3 tau^2 on horizontal planes
    and tau^2 on vertical ones.
    """
    p = Point3.of(p)
    _check_base(p, X, Y, Z)
    tau2 = params.tau ** 2
    # everything in the orthonormal frame, where E3 = d/dz
    x, y, z = (to_frame(p, _vec(V), params) for V in (X, Y, Z))
    wedge = (y @ z) * x - (x @ z) * y
    e3 = np.array([0.0, 0.0, 1.0])
    r1 = (y @ z) * x[2] * e3 + y[2] * z[2] * x - (x @ z) * y[2] * e3 - x[2] * z[2] * y
    out = -3.0 * tau2 * wedge + 4.0 * tau2 * r1
    return TangentVector(p, tuple(from_frame(p, out, params)))


def sectional_curvature(X, Y, p, params: AmbientParams) -> float:
    """<R(X,Y)Y, X> / (|X|^2 |Y|^2 - <X,Y>^2)."""
    p = Point3.of(p)
    r = curvature_tensor(X, Y, Y, p, params)
    num = metric_at(p, r.array, _vec(X), params)
    den = (metric_at(p, _vec(X), _vec(X), params) * metric_at(p, _vec(Y), _vec(Y), params)
           - metric_at(p, _vec(X), _vec(Y), params) ** 2)
    if den <= 0:
        raise SingularityError("sectional curvature of a degenerate plane")
    return num / den


def scalar_curvature(p, params: AmbientParams) -> dict:
    """Traces of the curvature tensor over the orthonormal frame at ``p``.

    Returns both the sum of sectional curvatures over frame planes
    (sum_{i<j} K(E_i, E_j)) and the Ricci trace sum_{i,j} <R(E_i,E_j)E_j, E_i>,
    which is twice the former.
    """
    E = frame_at(p, params)
    pair_sum = sum(sectional_curvature(E[i], E[j], p, params)
                   for i in range(3) for j in range(i + 1, 3))
    return {"pair_sum": pair_sum, "ricci_trace": 2.0 * pair_sum}


# -- isometries -------------------------------------------------------------

_ISO_KINDS = ("translate-F1", "translate-F2", "translate-F3", "rotate-F4")


@dataclass(frozen=True)
class IsometrySpec:
    """One-parameter isometry: a translation along F1, F2, F3 or a rotation F4."""

    kind: str
    amount: float

    def __post_init__(self):
        if self.kind not in _ISO_KINDS:
            raise ValidationError(f"unknown isometry kind {self.kind!r}; expected one of {_ISO_KINDS}")
        if not math.isfinite(self.amount):
            raise ValidationError("isometry amount must be finite")

    def canonical(self):
        """Comparison key; rotation angles reduced mod 2 pi."""
        if self.kind == "rotate-F4":
            return (self.kind, math.remainder(self.amount, 2 * math.pi))
        return (self.kind, self.amount)


def _isometry_steps(iso):
    """Normalize ``iso`` to a list of :class:`IsometrySpec`.

    Accepts a spec, a ``(kind, amount)`` pair, or a sequence of either.
    """
    if isinstance(iso, IsometrySpec):
        return [iso]
    if isinstance(iso, (tuple, list)) and len(iso) == 2 and isinstance(iso[0], str):
        return [IsometrySpec(*iso)]
    if isinstance(iso, (str, bytes)) or not hasattr(iso, "__iter__"):
        raise ValidationError(f"not an isometry: {iso!r}")
    steps = []
    for step in iso:
        steps.extend(_isometry_steps(step))
    return steps


def apply_isometry(iso, p, params: AmbientParams):
    """Apply one isometry, or a sequence of them left-to-right, to ``p``.

    ``p`` may be a :class:`Point3` or an array of points with trailing axis 3.
    """
    steps = _isometry_steps(iso)
    if len(steps) != 1:
        q = p
        for step in steps:
            q = apply_isometry(step, q, params)
        return q
    iso = steps[0]
    as_point = isinstance(p, Point3)
    q = _as_xyz(p)
    x, y, z = q[..., 0], q[..., 1], q[..., 2]
    t = iso.amount
    tau = params.tau
    if iso.kind == "translate-F1":
        out = (x + t, y, z + tau * t * y)
    elif iso.kind == "translate-F2":
        out = (x, y + t, z - tau * t * x)
    elif iso.kind == "translate-F3":
        out = (x, y, z + t)
    else:
        c, s = math.cos(t), math.sin(t)
        out = (c * x - s * y, s * x + c * y, z)
    if as_point:
        return Point3(*(float(v) for v in out))
    return np.stack(out, axis=-1)


def compose_isometries(*isos):
    """Left-to-right composition as a tuple usable by :func:`apply_isometry`."""
    return tuple(_isometry_steps(list(isos)))


def isometry_jacobian(iso, p, params: AmbientParams) -> np.ndarray:
    """Differential of an isometry (or a left-to-right sequence) at ``p``."""
    steps = _isometry_steps(iso)
    if len(steps) != 1:
        q = _as_xyz(p)
        J = np.eye(3)
        for step in steps:
            J = isometry_jacobian(step, q, params) @ J
            q = _as_xyz(apply_isometry(step, q, params))
        return J
    iso = steps[0]
    t = iso.amount
    tau = params.tau
    J = np.eye(3)
    if iso.kind == "translate-F1":
        J[2, 1] = tau * t
    elif iso.kind == "translate-F2":
        J[2, 0] = -tau * t
    elif iso.kind == "rotate-F4":
        c, s = math.cos(t), math.sin(t)
        J[:2, :2] = [[c, -s], [s, c]]
    return J


# -- immersed surfaces --------------------------------------------------------

_ORIENTATIONS = ("cross", "anticross", "down")


@dataclass(frozen=True)
class ImmersionChart:
    """A parametrized surface (s, t) -> (x, y, z).

    ``jet(s, t)`` returns the six coordinate vectors
    (f, f_s, f_t, f_ss, f_st, f_tt).  Charts without a jet fall back to
    central differences of ``position``.

    ``orientation`` selects the unit normal: ``"cross"`` is the normalized
    frame cross product f_s x f_t, ``"anticross"`` its negative, and
    ``"down"`` whichever of the two has a negative E3 component.
    """

    position: Callable[[float, float], np.ndarray]
    jet: Optional[Callable[[float, float], tuple]] = None
    orientation: str = "cross"
    s_range: tuple = (-math.inf, math.inf)
    t_range: tuple = (-math.inf, math.inf)
    name: str = field(default="chart", compare=False)

    def __post_init__(self):
        if self.orientation not in _ORIENTATIONS:
            raise ValidationError(f"orientation must be one of {_ORIENTATIONS}")

    def derivatives(self, s, t):
        if self.jet is not None:
            return tuple(np.asarray(v, dtype=float) for v in self.jet(s, t))
        f = lambda a, b: np.asarray(self.position(a, b), dtype=float)
        hs = fd_step(s, 1e-4)
        ht = fd_step(t, 1e-4)
        f0 = f(s, t)
        fs = (f(s + hs, t) - f(s - hs, t)) / (2 * hs)
        ft = (f(s, t + ht) - f(s, t - ht)) / (2 * ht)
        fss = (f(s + hs, t) - 2 * f0 + f(s - hs, t)) / hs ** 2
        ftt = (f(s, t + ht) - 2 * f0 + f(s, t - ht)) / ht ** 2
        fst = (f(s + hs, t + ht) - f(s + hs, t - ht) - f(s - hs, t + ht) + f(s - hs, t - ht)) / (4 * hs * ht)
        return f0, fs, ft, fss, fst, ftt

    def contains(self, s, t) -> bool:
        return self.s_range[0] <= s <= self.s_range[1] and self.t_range[0] <= t <= self.t_range[1]


def mean_curvature_immersion(chart: ImmersionChart, s: float, t: float, params: AmbientParams) -> float:
    """Mean curvature (half the shape-operator trace) of a chart in H(tau).

    H = (1/2) g^{ij} <nabla_{f_i} f_j, N> with nabla_{f_i} f_j = f_ij + Gamma(f_i, f_j)
    and N the unit normal selected by the chart orientation.
    """
    f, fs, ft, fss, fst, ftt = chart.derivatives(s, t)
    a = to_frame(f, fs, params)
    b = to_frame(f, ft, params)
    g = np.array([[a @ a, a @ b], [a @ b, b @ b]])
    det = g[0, 0] * g[1, 1] - g[0, 1] ** 2
    scale = g[0, 0] * g[1, 1]
    if not det > 1e-24 * max(scale, 1e-300):
        raise SingularityError(f"degenerate first fundamental form at (s, t) = ({s}, {t})")
    n = np.cross(a, b)
    n /= np.linalg.norm(n)
    if chart.orientation == "anticross" or (chart.orientation == "down" and n[2] > 0):
        n = -n

    def second(u, v, uv):
        return float(to_frame(f, uv + christoffel(f, u, v, params), params) @ n)

    b11 = second(fs, fs, fss)
    b12 = second(fs, ft, fst)
    b22 = second(ft, ft, ftt)
    return 0.5 * (g[1, 1] * b11 - 2 * g[0, 1] * b12 + g[0, 0] * b22) / det
