"""Finite-difference solver for the CMC graph equation Q_H(u) = 0.

Damped Newton on the Shortley-Weller discretization, wrapped in a continuity
method (solve Q_{tH}(u_t) = 0 with trace t*phi for t = 0 .. 1) for strictly
convex data 2H < min k, and in a domain exhaustion over inward parallel
domains for the borderline case 2H = min k with zero data.
"""
from __future__ import annotations

import dataclasses
import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import sparse
from scipy.interpolate import LinearNDInterpolator
from scipy.sparse.linalg import splu
from shapely.geometry import Polygon
from sklearn.base import BaseEstimator
from sklearn.exceptions import ConvergenceWarning
from sklearn.utils.validation import check_array, check_is_fitted

from .barriers import (LogBarrier, cone_height_field, find_supersolution_K,
                       select_cone_heights)
from .curvature import graph_aux, q_partials, q_residual
from .domain import (BoundaryCurve, FermiCollar, Grid, ScalarField, build_boundary, build_grid,
                     curvature_range, fermi_coordinates, shrunk_domain)
from .exceptions import ConvergenceError, SingularityError, ValidationError
from .geometry import AmbientParams

log = logging.getLogger(__name__)

__all__ = [
    "SolveSpec",
    "SolveResult",
    "check_hypotheses",
    "discretize_residual",
    "newton_solve",
    "harmonic_extension",
    "continuity_solve",
    "exhaustion_solve",
    "cone_sandwich",
    "verify_maximum_principle",
    "gradient_diagnostic",
    "uniqueness_check",
    "CMCGraphSolver",
]

_KEYS = ("ux", "uy", "uxx", "uyy", "uxy")


def _zero(s):
    return 0.0 * np.asarray(s, dtype=float)


@dataclass
class SolveSpec:
    """Everything needed to pose and solve one Dirichlet problem.

    Parameters
    ----------
    params : AmbientParams
    H : float
        Target mean curvature.
    curve : BoundaryCurve
    data : callable
        Boundary data as a function of arclength; ``None`` means zero.
    h : float
        Lattice spacing.
    tol : float
        Newton stopping tolerance on the residual sup-norm.
    max_iter : int
        Newton iteration cap per solve.
    steps : int
        Continuation steps N.
    max_bisections : int
        How many times a failing continuation step may be halved.
    jacobian : {"newton", "picard"}
        Full linearization, or frozen coefficients (second-order terms only).
    picard_fallback : bool
        Switch to Picard steps when the Newton line search stalls.
    min_damping : float
        Smallest line-search factor tried before giving up.
    """

    params: AmbientParams
    H: float
    curve: BoundaryCurve
    data: Optional[Callable] = None
    h: float = 1.0 / 32
    tol: float = 1e-10
    max_iter: int = 50
    steps: int = 10
    max_bisections: int = 8
    jacobian: str = "newton"
    picard_fallback: bool = True
    min_damping: float = 2.0 ** -20
    _grid: Optional[Grid] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.data is None:
            self.data = _zero
        if not (self.h > 0 and self.tol > 0 and self.max_iter >= 1 and self.steps >= 1):
            raise ValidationError("h, tol must be positive; max_iter, steps at least 1")
        if self.jacobian not in ("newton", "picard"):
            raise ValidationError(f"unknown jacobian mode {self.jacobian!r}")
        if not math.isfinite(self.H):
            raise ValidationError("H must be finite")

    @property
    def grid(self) -> Grid:
        if self._grid is None:
            self._grid = build_grid(self.curve, self.h)
        return self._grid

    def replace(self, **changes) -> "SolveSpec":
        if "curve" in changes or "h" in changes:
            changes.setdefault("_grid", None)
        return dataclasses.replace(self, **changes)

    def trace(self, scale: float = 1.0):
        return scale * self.grid.trace(self.data)

    def zero_data(self, atol: float = 0.0) -> bool:
        vals = np.asarray(self.data(self.curve.s_samples), dtype=float)
        return bool(np.all(np.abs(vals) <= atol))


@dataclass
class SolveResult:
    """Outcome of a solve; ``u`` is the best iterate even when not converged."""

    u: ScalarField
    residual: float
    iterations: list
    converged: bool
    t_reached: float = 1.0
    diagnostics: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "converged": bool(self.converged),
            "residual": float(self.residual),
            "iterations": [int(i) for i in self.iterations],
            "t_reached": float(self.t_reached),
            "u_min": float(self.u.values.min()) if self.u.grid.n else 0.0,
            "u_max": float(self.u.values.max()) if self.u.grid.n else 0.0,
        }


def check_hypotheses(spec: SolveSpec, path: str = "theorem1") -> dict:
    """Validate the existence hypotheses for the chosen path.

    ``theorem1``: 0 <= 2H < min k.  ``theorem2``: |tau|/sqrt(3) < H <= min k / 2
    and zero boundary data.  Raises ValidationError otherwise.
    """
    kmin, kmax = curvature_range(spec.curve)
    H, tau = spec.H, spec.params.tau
    info = {"kmin": kmin, "kmax": kmax, "H": H, "tau": tau, "path": path}
    if path == "theorem1":
        if H < 0:
            raise ValidationError(f"existence needs 0 <= 2H < min k; got H = {H:.6g} < 0")
        if math.isclose(2 * H, kmin, rel_tol=1e-12, abs_tol=1e-14):
            raise ValidationError(f"2H = min k = {kmin:.6g} is the borderline case; the continuity "
                                  "path needs 2H < min k strictly, use the exhaustion path "
                                  "(zero boundary data) instead")
        if not 2 * H < kmin:
            raise ValidationError(f"existence needs 0 <= 2H < min k; got 2H = {2 * H:.6g}, "
                                  f"min k = {kmin:.6g}")
    elif path == "theorem2":
        lower = abs(tau) / math.sqrt(3.0)
        if not lower < H:
            raise ValidationError(f"exhaustion needs |tau|/sqrt(3) < H; got |tau|/sqrt(3) = "
                                  f"{lower:.6g} >= H = {H:.6g}")
        if not H <= 0.5 * kmin * (1 + 1e-12):
            raise ValidationError(f"exhaustion needs H <= min k / 2 = {0.5 * kmin:.6g}; got H = {H:.6g}")
        if not spec.zero_data():
            raise ValidationError("exhaustion needs zero boundary data")
    else:
        raise ValidationError(f"unknown path {path!r}")
    return info


def _residual(grid: Grid, params: AmbientParams, H: float, u, g):
    d = grid.derivatives(u, g)
    return q_residual(params, H, grid.nodes[:, 0], grid.nodes[:, 1], *d), d


def discretize_residual(spec: SolveSpec, u: ScalarField, H: Optional[float] = None) -> np.ndarray:
    """Q_H of the discrete field at every interior node."""
    if u.grid is not spec.grid and u.grid.n != spec.grid.n:
        raise ValidationError("field is not defined on the spec's grid")
    return _residual(u.grid, spec.params, spec.H if H is None else H, u.values, u.boundary_values)[0]


def _jacobian(grid: Grid, params: AmbientParams, d, mode: str):
    ops = grid.operators()
    x, y = grid.nodes[:, 0], grid.nodes[:, 1]
    parts = q_partials(params, x, y, *d)
    if mode == "picard":
        parts = (None, None) + parts[2:]
    J = None
    for p, key in zip(parts, _KEYS):
        if p is None:
            continue
        term = sparse.diags(p) @ ops[key][0]
        J = term if J is None else J + term
    return J.tocsc()


def _lsolve(J, rhs):
    try:
        lu = splu(J, permc_spec="COLAMD")
    except RuntimeError as exc:
        raise SingularityError(f"singular Jacobian: {exc}") from exc
    out = lu.solve(rhs)
    if not np.all(np.isfinite(out)):
        raise SingularityError("linear solve produced non-finite values")
    return out


def harmonic_extension(grid: Grid, g) -> np.ndarray:
    """Discrete harmonic function on the grid with boundary values ``g``."""
    g = np.asarray(g, dtype=float)
    if not np.any(g):
        return np.zeros(grid.n)
    ops = grid.operators()
    L = (ops["uxx"][0] + ops["uyy"][0]).tocsc()
    return _lsolve(L, -(ops["uxx"][1] @ g + ops["uyy"][1] @ g))


def _modes(spec):
    if spec.jacobian == "newton" and spec.picard_fallback:
        return ("newton", "picard")
    return (spec.jacobian,)


def _damped_step(spec, grid, H, u, g, F, d, norm2, mode):
    """Halve along the (mode) direction until the l2 residual drops; None if it never does."""
    du = _lsolve(_jacobian(grid, spec.params, d, mode), -F)
    lam = 1.0
    while lam >= spec.min_damping:
        trial = u + lam * du
        Ft, dt = _residual(grid, spec.params, H, trial, g)
        n2 = float(np.linalg.norm(Ft))
        if np.isfinite(n2) and n2 < norm2:
            return trial, Ft, dt, n2, lam, mode
        lam *= 0.5
    return None


def newton_solve(spec: SolveSpec, initial: ScalarField, H: Optional[float] = None) -> SolveResult:
    """Damped Newton for Q_H(u) = 0 with the trace of ``initial`` held fixed.

    Each step solves J du = -F by sparse LU and halves the step until the
    Euclidean residual norm decreases.  With ``picard_fallback`` a
    frozen-coefficient step is also tried whenever Newton needs damping
    below 1/8, and the step with the smaller residual is taken.  Stops when the sup-norm of the
    residual is at most ``spec.tol``; returns the best iterate with
    ``converged=False`` at the iteration cap or when the line search stalls.

    The reported iteration count is the number of residual evaluations, so
    an exact initial guess counts as one iteration.
    """
    grid = initial.grid
    H = spec.H if H is None else H
    g = initial.boundary_values
    u = initial.values.copy()
    F, d = _residual(grid, spec.params, H, u, g)
    norm2 = float(np.linalg.norm(F))
    history = [float(np.max(np.abs(F), initial=0.0))]
    steps = []
    it = 0
    converged = history[-1] <= spec.tol
    stalled = False
    while not converged and it < spec.max_iter:
        it += 1
        best = None
        for mode in _modes(spec):
            cand = _damped_step(spec, grid, H, u, g, F, d, norm2, mode)
            if cand is not None and (best is None or cand[3] < best[3]):
                best = cand
            if best is not None and best[4] >= 0.125:
                break
        if best is None:
            log.info("line search stalled at iteration %d", it)
            stalled = True
            break
        trial, Ft, dt, n2, lam, mode = best
        u, F, d, norm2 = trial, Ft, dt, n2
        history.append(float(np.max(np.abs(F), initial=0.0)))
        steps.append((mode, lam))
        log.debug("%s %d: |F|_inf = %.3e, damping %.3g", mode, it, history[-1], lam)
        converged = history[-1] <= spec.tol
    field_ = ScalarField(grid, u, g, {"H": H})
    diag = {"residual_history": history, "steps": steps, "stalled": stalled}
    return SolveResult(field_, history[-1], [len(history)], bool(converged), 1.0, diag)


def continuity_solve(spec: SolveSpec, path_check: bool = True) -> SolveResult:
    """March Q_{tH}(u_t) = 0, u_t = t phi on the boundary, from t = 0 to 1.

    Starts from the zero field (the minimal leaf z = 0) and Newton-solves
    each step from the previous solution.  A failing step is halved up to
    ``spec.max_bisections`` times; after that the result carries
    ``converged=False`` and the last good t.
    """
    if path_check:
        check_hypotheses(spec, "theorem1")
    grid = spec.grid
    g1 = spec.trace()
    u = np.zeros(grid.n)
    if spec.H == 0 and not np.any(g1):
        res = newton_solve(spec, ScalarField(grid, u, g1), H=0.0)
        res.diagnostics["steps"] = [{"t": 1.0, "iterations": res.iterations[0], "residual": res.residual}]
        return res
    ext = harmonic_extension(grid, g1)
    t, dt = 0.0, 1.0 / spec.steps
    steps, iters = [], []
    halvings = 0
    last = None
    while t < 1.0 - 1e-15:
        t_new = min(1.0, t + dt)
        try:
            # predictor: carry the trace increment into the interior harmonically
            start = u + (t_new - t) * ext
            res = newton_solve(spec, ScalarField(grid, start, t_new * g1), H=t_new * spec.H)
        except SingularityError as exc:
            log.info("singular Jacobian at t = %.4g: %s", t_new, exc)
            res = None
        if res is not None and res.converged:
            t, u, last = t_new, res.u.values, res
            iters.append(res.iterations[0])
            steps.append({"t": t, "iterations": res.iterations[0], "residual": res.residual,
                          "trace_error": float(np.max(np.abs(res.u.boundary_values - t * g1), initial=0.0))})
            continue
        halvings += 1
        if halvings > spec.max_bisections:
            best = last or res
            if best is None:
                best = SolveResult(ScalarField(grid, u, t * g1), math.inf, [], False)
            diag = dict(best.diagnostics, steps=steps, failed_t=t_new, halvings=halvings)
            return SolveResult(best.u, best.residual, iters, False, t, diag)
        dt *= 0.5
        log.info("continuation step to t = %.4g failed; halving to dt = %.3g", t_new, dt)
    diag = dict(last.diagnostics, steps=steps, halvings=halvings)
    return SolveResult(last.u, last.residual, iters, True, 1.0, diag)


def exhaustion_solve(spec: SolveSpec, schedule=(4, 8, 16)) -> SolveResult:
    """Borderline case via the inward parallel domains Omega(n) = shrunk_domain(1/n).

    All domains share the lattice h Z^2.  Each Omega(n) has curvature above
    2H, so its problem is solved by the continuity method.  Checks that
    u_{n+1} >= u_n - h^2 on shared nodes, and returns the last solution plus
    a geometric tail estimate sum_{j>=1} rho^j d, where d = u_last - u_prev
    and rho the ratio of successive differences.
    """
    check_hypotheses(spec, "theorem2")
    schedule = sorted(int(n) for n in schedule)
    if len(schedule) < 2:
        raise ValidationError("exhaustion needs at least two domains")
    kmax = curvature_range(spec.curve)[1]
    sols, grids, iters = [], [], []
    for n in schedule:
        delta = 1.0 / n
        if not delta * kmax < 1:
            raise ValidationError(f"shrink distance 1/{n} exceeds the focal distance 1/kmax")
        sub = spec.replace(curve=shrunk_domain(spec.curve, delta))
        res = continuity_solve(sub, path_check=False)
        if not res.converged:
            diag = {"failed_n": n, "completed": [m for m in schedule if m < n]}
            return SolveResult(res.u, res.residual, iters + res.iterations, False, res.t_reached, diag)
        sols.append(res)
        grids.append(sub.grid)
        iters.extend(res.iterations)
    tol = spec.h ** 2
    mono = []
    for (n0, r0), (n1, r1) in zip(zip(schedule, sols), zip(schedule[1:], sols[1:])):
        idx1 = r1.u.grid.index_of()
        pos = np.array([idx1[tuple(k)] for k in r0.u.grid.ij.tolist()], dtype=int)
        diff = r1.u.values[pos] - r0.u.values
        worst = int(np.argmin(diff))
        mono.append({"n": [n0, n1], "min_increase": float(diff[worst]),
                     "worst_node": r0.u.grid.nodes[worst].tolist(), "tolerance": tol,
                     "passed": bool(diff[worst] >= -tol)})
    last = sols[-1]
    gl = last.u.grid
    tail = np.zeros(gl.n)
    idx_last = gl.index_of()
    if len(sols) >= 3:
        a, b = sols[-3].u, sols[-2].u
        idx_b = b.grid.index_of()
        for k, (i, j) in enumerate(a.grid.ij.tolist()):
            p, q = idx_last[(i, j)], idx_b[(i, j)]
            d1 = last.u.values[p] - b.values[q]
            d0 = b.values[q] - a.values[k]
            if d0 > 0 and 0 <= d1 < d0:
                rho = d1 / d0
                tail[p] = d1 * rho / (1 - rho)
    limit = ScalarField(gl, last.u.values + tail, last.u.boundary_values,
                        {"kind": "exhaustion-limit", "schedule": schedule})
    # boundary decay: the limit on the outermost node ring of each Omega(n)
    decay = []
    for n, r in zip(schedule, sols):
        ring = r.u.grid.ij[r.u.grid.near_boundary].tolist()
        vals = np.abs([limit.values[idx_last[tuple(k)]] for k in ring])
        decay.append({"n": n, "ring_sup": float(vals.max()), "ring_nodes": len(ring)})
    sups = [d["ring_sup"] for d in decay]
    diag = {
        "schedule": schedule,
        "monotonicity": mono,
        "monotone": all(m["passed"] for m in mono),
        "tail_bound": float(tail.max(initial=0.0)),
        "boundary_decay": decay,
        "decay_decreasing": bool(all(b < a for a, b in zip(sups, sups[1:]))),
        "iterates": [r.u for r in sols],
        "log_barrier": _log_barrier_report(spec, limit),
    }
    return SolveResult(limit, last.residual, iters, True, 1.0, diag)


def _log_barrier_report(spec: SolveSpec, limit: ScalarField) -> dict:
    """Compare the limit with w(t) = L ln(1 + K^2 t) near the original boundary."""
    kmax = curvature_range(spec.curve)[1]
    collar = FermiCollar(spec.curve, 0.5 / kmax)
    M = max(float(limit.values.max()), 1e-12)
    try:
        K, rep = find_supersolution_K(collar, spec.params, spec.H, M=M)
    except ConvergenceError as exc:
        return {"found": False, "detail": exc.diagnostics}
    w = LogBarrier(M, K)
    excess = -math.inf
    count = 0
    for p, v in zip(limit.grid.nodes, limit.values):
        st = fermi_coordinates(collar, p)
        if st is None or st[1] > 1.0 / K:
            continue
        count += 1
        excess = max(excess, float(v - w.w(st[1])))
    return {"found": True, "K": K, "M": M, "maxQ": rep["maxQ"], "nodes_in_band": count,
            "max_excess_over_barrier": excess if count else None}


def _domain_centroid(curve: BoundaryCurve):
    c = Polygon(curve.points).centroid
    return float(c.x), float(c.y)


def cone_sandwich(spec: SolveSpec, grid: Optional[Grid] = None, vertex_xy=None):
    """Upper and lower cone fields (z1-cone, z2-cone) on ``grid`` with their heights."""
    grid = grid or spec.grid
    vxy = _domain_centroid(spec.curve) if vertex_xy is None else tuple(vertex_xy)
    z1, z2 = select_cone_heights(spec.curve, spec.params, spec.H, spec.data, vxy)
    report = dict(select_cone_heights.last_report)
    upper = cone_height_field((vxy[0], vxy[1], z1), spec.data, grid)
    lower = cone_height_field((vxy[0], vxy[1], z2), spec.data, grid)
    return upper, lower, {"z1": z1, "z2": z2, "vertex_xy": list(vxy), "search": report}


def verify_maximum_principle(result: SolveResult, spec: SolveSpec, tol: Optional[float] = None) -> dict:
    """Plane lower bound u >= min phi and the cone sandwich, each within h^2."""
    if not result.converged:
        raise ValidationError("maximum-principle check needs a converged result")
    tol = spec.h ** 2 if tol is None else tol
    u = result.u
    grid = u.grid
    trace_min = float(np.min(spec.data(spec.curve.s_samples) * np.ones(spec.curve.n_samples)))
    i = int(np.argmin(u.values))
    plane = {"min_u": float(u.values[i]), "min_trace": trace_min, "worst_node": grid.nodes[i].tolist(),
             "tolerance": tol, "passed": bool(u.values[i] >= trace_min - tol)}
    out = {"plane": plane}
    try:
        upper, lower, info = cone_sandwich(spec, grid)
    except (ValidationError, ConvergenceError) as exc:
        out["cones"] = {"passed": False, "error": str(exc)}
        out["passed"] = False
        return out
    above = u.values - upper.values
    below = lower.values - u.values
    ia, ib = int(np.argmax(above)), int(np.argmax(below))
    C0 = max(info["z1"], abs(trace_min), abs(info["z2"]))
    out["cones"] = dict(info, max_above_upper=float(above[ia]), worst_upper=grid.nodes[ia].tolist(),
                        max_below_lower=float(below[ib]), worst_lower=grid.nodes[ib].tolist(),
                        tolerance=tol, passed=bool(above[ia] <= tol and below[ib] <= tol))
    out["height_bound"] = {"C0": C0, "sup_abs_u": float(np.max(np.abs(u.values))),
                           "passed": bool(np.max(np.abs(u.values)) <= C0 + tol)}
    out["passed"] = plane["passed"] and out["cones"]["passed"] and out["height_bound"]["passed"]
    return out


def gradient_diagnostic(result: SolveResult, spec: SolveSpec, A: float = 1.0) -> dict:
    """omega = sqrt(alpha^2 + beta^2) exp(A u) from the discrete gradient.

    ``boundary_attained`` is true when the maximum sits at a node with a
    boundary neighbour, i.e. within one cell of the boundary curve.
    """
    if not A > 0:
        raise ValidationError("A must be positive")
    u = result.u
    grid = u.grid
    ux, uy, *_ = u.derivatives()
    a, b, _ = graph_aux(spec.params, grid.nodes[:, 0], grid.nodes[:, 1], ux, uy)
    omega = np.hypot(a, b) * np.exp(A * u.values)
    i = int(np.argmax(omega))
    return {"A": A, "omega": omega, "max": float(omega[i]), "argmax": grid.nodes[i].tolist(),
            "boundary_attained": bool(grid.near_boundary[i])}


def uniqueness_check(spec: SolveSpec, scale: float = 0.1, seed: int = 0) -> dict:
    """Newton from the zero field and from the zero field plus a random bump must agree.

    The bump is a Gaussian of height ``scale`` centred at a random node; the
    boundary trace is the same for both starts.  Agreement threshold is
    10 * tol in sup-norm.  A start that fails to converge makes the report
    inconclusive.
    """
    grid = spec.grid
    g = spec.trace()
    rng = np.random.default_rng(seed)
    centre = grid.nodes[rng.integers(grid.n)]
    width = 0.25 * math.sqrt(Polygon(spec.curve.points).area)
    bump = scale * np.exp(-np.sum((grid.nodes - centre) ** 2, axis=1) / (2 * width ** 2))
    out = {"scale": scale, "seed": seed, "bump_centre": centre.tolist(), "threshold": 10 * spec.tol}
    try:
        r0 = newton_solve(spec, ScalarField(grid, np.zeros(grid.n), g))
        r1 = newton_solve(spec, ScalarField(grid, bump, g))
    except SingularityError as exc:
        return dict(out, conclusive=False, passed=False, error=str(exc))
    if not (r0.converged and r1.converged):
        return dict(out, conclusive=False, passed=False,
                    converged=[bool(r0.converged), bool(r1.converged)])
    gap = float(np.max(np.abs(r0.u.values - r1.u.values), initial=0.0))
    return dict(out, conclusive=True, sup_difference=gap, passed=bool(gap <= 10 * spec.tol),
                iterations=[r0.iterations[0], r1.iterations[0]])


class CMCGraphSolver(BaseEstimator):
    """Estimator-style front end: ``fit`` a boundary curve, ``predict`` heights.

    Parameters
    ----------
    tau, H : float
        Ambient parameter and target mean curvature.
    h : float
        Lattice spacing.
    method : {"continuity", "exhaustion", "newton"}
        Continuity method (2H < min k), domain exhaustion (2H = min k allowed,
        zero data) or a single cold-start Newton solve.
    tol, max_iter, steps, jacobian : see :class:`SolveSpec`.
    schedule : tuple of int
        Exhaustion schedule n for Omega(n).
    samples : int
        Curve samples used when ``fit`` receives raw points.
    """

    def __init__(self, tau=0.0, H=0.0, h=1.0 / 32, method="continuity", tol=1e-10, max_iter=50,
                 steps=10, jacobian="newton", schedule=(4, 8, 16), samples=2048):
        self.tau = tau
        self.H = H
        self.h = h
        self.method = method
        self.tol = tol
        self.max_iter = max_iter
        self.steps = steps
        self.jacobian = jacobian
        self.schedule = schedule
        self.samples = samples

    def _curve(self, curve):
        if isinstance(curve, BoundaryCurve):
            return curve
        xy = check_array(curve, ensure_min_samples=16)
        if xy.shape[1] != 2:
            raise ValidationError("boundary samples must have two columns")
        return build_boundary("user-parametric", self.samples, xy=xy)

    def fit(self, curve, boundary_data=None):
        """Solve on the domain bounded by ``curve``.

        ``boundary_data`` is a callable of arclength, a constant, or None (zero).
        """
        if self.method not in ("continuity", "exhaustion", "newton"):
            raise ValidationError(f"unknown method {self.method!r}")
        bc = self._curve(curve)
        if boundary_data is None or callable(boundary_data):
            data = boundary_data
        else:
            const = float(boundary_data)
            data = lambda s: const + _zero(s)  # noqa: E731
        spec = SolveSpec(AmbientParams(float(self.tau)), float(self.H), bc, data, h=float(self.h),
                         tol=self.tol, max_iter=self.max_iter, steps=self.steps, jacobian=self.jacobian)
        if self.method == "continuity":
            res = continuity_solve(spec)
        elif self.method == "exhaustion":
            res = exhaustion_solve(spec, self.schedule)
        else:
            check_hypotheses(spec, "theorem1")
            res = newton_solve(spec, ScalarField(spec.grid, np.zeros(spec.grid.n), spec.trace()))
        if not res.converged:
            warnings.warn(f"solve did not converge (residual {res.residual:.3e})", ConvergenceWarning)
        self.spec_ = spec
        self.result_ = res
        self.grid_ = res.u.grid
        self.converged_ = res.converged
        self.n_iter_ = int(sum(res.iterations))
        pts = res.u.all_points()
        self._interp = LinearNDInterpolator(pts[:, :2], pts[:, 2])
        return self

    def predict(self, X):
        """Piecewise-linear heights at (x, y) rows; NaN outside the sampled hull."""
        check_is_fitted(self, "result_")
        X = check_array(X)
        if X.shape[1] != 2:
            raise ValidationError("X must have two columns (x, y)")
        return self._interp(X)
