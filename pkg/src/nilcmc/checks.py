"""Invariant suite shared by ``nilcmc verify`` and the test-suite.

Each check returns a :class:`Check` holding the worst observed error and
the tolerance it was held to.  Closed-form identities use 1e-10; checks
against a finite-difference oracle use 1e-6.
"""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass

import numpy as np

from .barriers import LogBarrier
from .curvature import (ConeSpec, cone_chart, cone_mean_curvature, cylinder_chart,
                        cylinder_mean_curvature, divergence_form_residual, graph_chart,
                        graph_mean_curvature, polynomial_jet, q_residual)
from .domain import build_boundary
from .exceptions import ValidationError
from .geometry import (AmbientParams, IsometrySpec, VectorField, apply_isometry,
                       connection_table, covariant_derivative, curvature_tensor, frame_at,
                       isometry_jacobian, lie_bracket, mean_curvature_immersion, metric_at,
                       metric_tensor, sectional_curvature, to_frame)
from .oracles import bracket_fd, koszul_derivative, riemann_fd

EXACT_TOL = 1e-10
FD_TOL = 1e-6

__all__ = ["Check", "EXACT_TOL", "FD_TOL", "random_points", "geometry_checks", "surface_checks",
           "barrier_checks", "run_suite"]


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    tolerance: float
    detail: str = ""

    def as_dict(self):
        return asdict(self)


def _check(name, value, tol, detail=""):
    value = float(value)
    return Check(name, bool(value <= tol), value, tol, detail)


def random_points(n: int, rng, scale: float = 2.0) -> np.ndarray:
    return rng.uniform(-scale, scale, size=(n, 3))


def geometry_checks(params: AmbientParams, points: np.ndarray, rng, fd_points: int = 50) -> list:
    """Frame, connection, bracket, isometry and curvature-tensor identities.

    Exact identities run at every point; oracle comparisons at the first
    ``fd_points`` points.
    """
    tau = params.tau
    tag = f"[tau={tau:g}]"
    E = [VectorField.frame(i, params) for i in (1, 2, 3)]
    table = connection_table(params)
    out = []

    # frame orthonormality, vectorised: frame coefficients of E_i are the unit vectors
    x, y = points[:, 0], points[:, 1]
    frames = np.stack([np.stack([np.ones_like(x), 0 * x, -tau * y], -1),
                       np.stack([0 * x, np.ones_like(x), tau * x], -1),
                       np.stack([0 * x, 0 * x, np.ones_like(x)], -1)], 1)  # (n, 3, 3)
    coeffs = np.stack([_to_frame_rows(points, frames[:, k], tau) for k in range(3)], 1)
    gram = np.einsum("nik,njk->nij", coeffs, coeffs)
    out.append(_check("frame orthonormality " + tag, np.max(np.abs(gram - np.eye(3))), EXACT_TOL))

    # metric_at on the frame (object API) at a subset
    err = 0.0
    for p in points[:fd_points]:
        fr = frame_at(p, params)
        for i in range(3):
            for j in range(3):
                err = max(err, abs(metric_at(p, fr[i], fr[j], params) - (i == j)))
    out.append(_check("metric_at on frame " + tag, err, EXACT_TOL))

    # connection table against the Koszul oracle
    err = 0.0
    for p in points[:fd_points]:
        for i in range(3):
            for j in range(3):
                ref = to_frame(p, koszul_derivative(E[i], E[j], p, params), params)
                err = max(err, np.max(np.abs(ref - table[i, j])))
    out.append(_check("connection table vs Koszul oracle " + tag, err, FD_TOL))

    # brackets: [E1,E2] = 2 tau E3, [E1,E3] = [E2,E3] = 0; torsion-free
    expect = {(0, 1): np.array([0.0, 0.0, 2 * tau]), (0, 2): np.zeros(3), (1, 2): np.zeros(3)}
    err_exact = err_fd = err_torsion = 0.0
    for p in points:
        for (i, j), ref in expect.items():
            br = lie_bracket(E[i], E[j], p).array
            err_exact = max(err_exact, np.max(np.abs(to_frame(p, br, params) - ref)))
    for p in points[:fd_points]:
        for (i, j), ref in expect.items():
            err_fd = max(err_fd, np.max(np.abs(to_frame(p, bracket_fd(E[i], E[j], p), params) - ref)))
            tors = (covariant_derivative(E[i], E[j], p, params).array
                    - covariant_derivative(E[j], E[i], p, params).array
                    - lie_bracket(E[i], E[j], p).array)
            err_torsion = max(err_torsion, np.max(np.abs(tors)))
    out.append(_check("frame brackets " + tag, err_exact, EXACT_TOL))
    out.append(_check("frame brackets vs differenced oracle " + tag, err_fd, FD_TOL))
    out.append(_check("torsion-free " + tag, err_torsion, EXACT_TOL))

    # isometries preserve the metric: J^T g(F p) J = g(p)
    kinds = ("translate-F1", "translate-F2", "translate-F3", "rotate-F4")
    err = 0.0
    for n, p in enumerate(points):
        iso = IsometrySpec(kinds[n % 4], float(rng.uniform(-2, 2)))
        J = isometry_jacobian(iso, p, params)
        q = apply_isometry(iso, p, params)
        err = max(err, np.max(np.abs(J.T @ metric_tensor(q, params) @ J - metric_tensor(p, params))))
    out.append(_check("isometry metric invariance " + tag, err, EXACT_TOL))

    # curvature tensor against second differences of the connection
    err = 0.0
    for p in points[: max(1, fd_points // 5)]:
        X, Y, Z = rng.normal(size=(3, 3))
        ref = riemann_fd(X, Y, Z, p, params)
        err = max(err, np.max(np.abs(curvature_tensor(X, Y, Z, p, params).array - ref)))
    out.append(_check("curvature tensor vs differenced oracle " + tag, err, FD_TOL))

    # sectional curvatures of frame planes
    err = 0.0
    for p in points[:fd_points]:
        fr = frame_at(p, params)
        err = max(err, abs(sectional_curvature(fr[0], fr[1], p, params) + 3 * tau ** 2),
                  abs(sectional_curvature(fr[0], fr[2], p, params) - tau ** 2),
                  abs(sectional_curvature(fr[1], fr[2], p, params) - tau ** 2))
    out.append(_check("sectional curvatures -3tau^2 / tau^2 " + tag, err, EXACT_TOL))
    return out


def _to_frame_rows(points, vecs, tau):
    out = vecs.copy()
    out[:, 2] = vecs[:, 2] + tau * (points[:, 1] * vecs[:, 0] - points[:, 0] * vecs[:, 1])
    return out


def surface_checks(params: AmbientParams, n_s: int = 20, n_t: int = 20) -> list:
    """Cylinder, cone and graph closed forms against the immersion oracle."""
    tau = params.tau
    tag = f"[tau={tau:g}]"
    out = []
    bases = {"circle R=0.5": build_boundary("circle", radius=0.5),
             "circle R=1": build_boundary("circle", radius=1.0),
             "circle R=2": build_boundary("circle", radius=2.0),
             "ellipse (2,1)": build_boundary("ellipse", a=2.0, b=1.0)}
    for name, base in bases.items():
        chart = cylinder_chart(base)
        s = np.linspace(0, base.length, n_s, endpoint=False)
        err = max(abs(mean_curvature_immersion(chart, si, 0.3, params) - cylinder_mean_curvature(base, si))
                  for si in s)
        out.append(_check(f"cylinder k/2 vs oracle, {name} {tag}", err, 1e-8))
    for name in ("circle R=1", "ellipse (2,1)"):
        base = bases[name]
        s = np.linspace(0, base.length, n_s, endpoint=False)
        t = np.linspace(0.2, 1.5, n_t)
        for c in (1.0, -1.0, 10.0, -10.0):
            cone = ConeSpec((0.0, 0.0, c), base)
            chart = cone_chart(cone)
            closed = cone_mean_curvature(cone, params, s[:, None], t[None, :])
            err = max(abs(mean_curvature_immersion(chart, si, ti, params) - closed[a, b])
                      for a, si in enumerate(s) for b, ti in enumerate(t))
            out.append(_check(f"cone formula vs oracle, {name} c={c:g} {tag}", err, 1e-8))
    jet = polynomial_jet([(2, 0, 0.3), (1, 1, -0.2), (0, 2, 0.1), (3, 0, 0.05), (0, 1, 0.4)])
    chart = graph_chart(jet)
    pts = np.linspace(-0.8, 0.8, 7)
    err = 0.0
    err_div = 0.0
    for xv in pts:
        for yv in pts:
            d = jet(xv, yv)
            closed = graph_mean_curvature(params, xv, yv, *d[1:])
            err = max(err, abs(mean_curvature_immersion(chart, xv, yv, params) - closed))
            div = divergence_form_residual(params, 0.0, lambda a, b: jet(a, b)[0], xv, yv, 1e-4)
            err_div = max(err_div, abs(div - q_residual(params, 0.0, xv, yv, *d[1:])))
    out.append(_check("graph mean curvature vs oracle " + tag, err, 1e-8))
    out.append(_check("divergence form equals Q_H " + tag, err_div, FD_TOL))
    return out


def barrier_checks() -> list:
    out = []
    err0 = errM = errI = 0.0
    for M in (0.5, 1.0, 3.0):
        for K in (2.0, 10.0, 1e3):
            w = LogBarrier(M, K)
            t = np.linspace(0, 1 / K, 101)
            err0 = max(err0, abs(float(w.w(0.0))))
            errM = max(errM, abs(float(w.w(1 / K)) - M) / M)
            errI = max(errI, float(np.max(np.abs(w.w_tt(t) + w.w_t(t) ** 2 / w.L) / np.abs(w.w_tt(t)))))
    out.append(_check("log barrier w(0) = 0", err0, 1e-12))
    out.append(_check("log barrier w(1/K) = M", errM, 1e-12))
    out.append(_check("log barrier w_tt = -w_t^2 / L", errI, 1e-12))
    return out


def run_suite(taus=(0.0, 0.5, -0.5, 2.0, -2.0), n_points: int = 1000, seed: int = 0,
              surfaces: bool = True, fd_points: int = 50) -> dict:
    """Run every check; returns {"checks": [...], "passed": bool, "seconds": float}."""
    if n_points < 1:
        raise ValidationError("need at least one sample point")
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    checks = []
    for tau in taus:
        params = AmbientParams(float(tau))
        pts = random_points(n_points, rng)
        checks.extend(geometry_checks(params, pts, rng, fd_points))
        if tau == 0:
            err = 0.0
            for p in pts[:fd_points]:
                X, Y, Z = rng.normal(size=(3, 3))
                err = max(err, np.max(np.abs(curvature_tensor(X, Y, Z, p, params).array)))
            checks.append(_check("curvature tensor vanishes at tau=0", err, EXACT_TOL))
        if surfaces:
            checks.extend(surface_checks(params))
    checks.extend(barrier_checks())
    return {"checks": checks, "passed": all(c.passed for c in checks),
            "seconds": time.perf_counter() - t0}
