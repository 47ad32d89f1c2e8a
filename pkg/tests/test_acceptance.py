"""Acceptance criteria 1-8, one PASS/FAIL line each at the stated tolerances."""
import math
import time

import numpy as np
import pytest

from nilcmc import cli
from nilcmc.barriers import LogBarrier, find_supersolution_K
from nilcmc.checks import run_suite
from nilcmc.curvature import (ConeSpec, cone_chart, cone_large_vertex_limit, cone_mean_curvature,
                              cylinder_chart, cylinder_mean_curvature)
from nilcmc.domain import FermiCollar, build_boundary
from nilcmc.exceptions import ValidationError
from nilcmc.geometry import AmbientParams, mean_curvature_immersion
from nilcmc.solver import (SolveSpec, continuity_solve, exhaustion_solve, uniqueness_check,
                           verify_maximum_principle)

TAUS = (0.0, 0.5, -0.5, 2.0, -2.0)


@pytest.fixture
def criterion(acceptance_log):
    def record(number, title, passed, detail, seconds, limit):
        ok = passed and seconds < limit
        acceptance_log(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}  "
                       f"[{detail}; {seconds:.2f} s of {limit:g} s]")
        return ok
    return record


def test_criterion_1_geometry_suite(criterion):
    t0 = time.perf_counter()
    res = run_suite(TAUS, n_points=1000, seed=0, surfaces=False)
    dt = time.perf_counter() - t0
    failed = [c.name for c in res["checks"] if not c.passed]
    worst = max((c.value / c.tolerance for c in res["checks"] if c.tolerance), default=0.0)
    ok = criterion(1, "geometry suite at 1000 points", not failed,
                   f"{len(res['checks'])} checks, worst value/tolerance {worst:.2e}", dt, 5.0)
    assert ok, failed


def test_criterion_2_cylinder(criterion):
    t0 = time.perf_counter()
    bases = [build_boundary("circle", radius=R) for R in (0.5, 1.0, 2.0)]
    bases.append(build_boundary("ellipse", a=2.0, b=1.0))
    worst, identical = 0.0, True
    for base in bases:
        s = np.linspace(0.0, base.length, 12, endpoint=False)
        chart = cylinder_chart(base)
        closed = [cylinder_mean_curvature(base, s) for _ in TAUS]
        identical &= all(np.array_equal(closed[0], c) for c in closed)
        for tau in TAUS:
            p = AmbientParams(tau)
            for si, hc in zip(s, closed[0]):
                worst = max(worst, abs(hc - mean_curvature_immersion(chart, si, 0.4, p)))
    dt = time.perf_counter() - t0
    ok = criterion(2, "cylinder k/2 vs oracle", worst <= 1e-8 and identical,
                   f"max |closed - oracle| = {worst:.2e}, bit-identical across tau: {identical}", dt, 5.0)
    assert ok


def test_criterion_3_cone(criterion):
    t0 = time.perf_counter()
    worst = 0.0
    for base in (build_boundary("circle"), build_boundary("ellipse", a=2.0, b=1.0)):
        s = np.linspace(0.0, base.length, 20, endpoint=False)
        t = np.linspace(0.2, 1.5, 20)
        for c in (1.0, -1.0, 10.0, -10.0):
            cone = ConeSpec((0.0, 0.0, c), base)
            chart = cone_chart(cone)
            for tau in (0.0, 1.0):
                p = AmbientParams(tau)
                closed = cone_mean_curvature(cone, p, s[:, None], t[None, :])
                oracle = np.array([[mean_curvature_immersion(chart, si, ti, p) for ti in t] for si in s])
                worst = max(worst, float(np.max(np.abs(closed - oracle))))
    circle = build_boundary("circle")
    ell = build_boundary("ellipse", a=2.0, b=1.0)
    p = AmbientParams(1.0)
    s = np.linspace(0.0, ell.length, 16, endpoint=False)
    # the c = 1e3 claim is posed on the unit circle; off-circle bases carry an O(tau/c) term
    sc = np.linspace(0.0, circle.length, 16, endpoint=False)
    lim1 = float(np.max(np.abs(cone_mean_curvature(ConeSpec((0, 0, 1e3), circle), p, sc, 1.0) - 0.5)))
    lim1_ell = float(np.max(np.abs(cone_mean_curvature(ConeSpec((0, 0, 1e3), ell), p, s, 1.0)
                                   - cone_large_vertex_limit(ell, s))))
    lim2 = float(np.min(cone_mean_curvature(ConeSpec((0, 0, 1.0), circle), p,
                                            np.linspace(0, circle.length, 16), 1e-3)))
    _, d1, d2 = ell.derivatives(s, 2)
    kappa = d2[:, 1] * d1[:, 0] - d2[:, 0] * d1[:, 1]
    lim3 = float(np.max(np.abs(2 * cone_mean_curvature(ConeSpec((0, 0, 1e6), ell), p, s, 1.0) - kappa)))
    dt = time.perf_counter() - t0
    passed = worst <= 1e-8 and lim1 <= 1e-3 and lim2 > 1e2 and lim3 <= 1e-3
    ok = criterion(3, "cone closed form and limits", passed,
                   f"oracle gap {worst:.2e}; |H-k/2| at c=1e3 {lim1:.2e} "
                   f"(ellipse, info only: {lim1_ell:.2e}); min H at t=1e-3 {lim2:.1f}; "
                   f"|2H-kappa| at c=1e6, t0=1 {lim3:.2e}", dt, 10.0)
    assert ok


def test_criterion_4_spherical_cap(criterion):
    t0 = time.perf_counter()
    circle = build_boundary("circle")
    R = 1 / 0.3
    errs, residuals = [], []
    hs = (1 / 32, 1 / 64)
    for h in hs:
        spec = SolveSpec(AmbientParams(0.0), 0.3, circle, h=h)
        res = continuity_solve(spec)
        x, y = spec.grid.nodes.T
        exact = np.sqrt(R * R - x * x - y * y) - math.sqrt(R * R - 1)
        errs.append(float(np.max(np.abs(res.u.values - exact))))
        residuals.append(res.residual if res.converged else math.inf)
    order = math.log(errs[0] / errs[1]) / math.log(2)
    dt = time.perf_counter() - t0
    passed = (max(residuals) <= 1e-8 and all(e <= 4 * h * h for e, h in zip(errs, hs)) and order >= 1.8)
    ok = criterion(4, "spherical cap regression", passed,
                   f"errors {errs[0]:.2e} (4h^2={4 * hs[0] ** 2:.2e}), {errs[1]:.2e} "
                   f"(4h^2={4 * hs[1] ** 2:.2e}); order {order:.2f}; residual {max(residuals):.1e}", dt, 60.0)
    assert ok


def test_criterion_5_heisenberg_solve(criterion):
    t0 = time.perf_counter()
    circle = build_boundary("circle")
    h = 1 / 64
    data = {"zero": None,
            "0.1 sin 2s": lambda s: 0.1 * np.sin(2 * 2 * np.pi * np.asarray(s, dtype=float) / circle.length)}
    passed, parts = True, []
    for label, phi in data.items():
        spec = SolveSpec(AmbientParams(0.2), 0.3, circle, phi, h=h)
        res = continuity_solve(spec)
        if not res.converged:
            passed = False
            parts.append(f"{label}: no convergence")
            continue
        mp = verify_maximum_principle(res, spec, tol=h * h)
        uq = uniqueness_check(spec, scale=0.1, seed=0)
        gap = uq.get("sup_difference", math.inf)
        passed &= mp["plane"]["passed"] and mp["cones"]["passed"] and uq["conclusive"] and gap <= 1e-7
        parts.append(f"{label}: min(u - min phi) {mp['plane']['min_u'] - mp['plane']['min_trace']:.1e}, "
                     f"cone excess {max(mp['cones']['max_above_upper'], mp['cones']['max_below_lower']):.1e}, "
                     f"uniqueness gap {gap:.1e}")
    dt = time.perf_counter() - t0
    ok = criterion(5, "Heisenberg solve tau=0.2 H=0.3 h=1/64", passed, "; ".join(parts), dt, 120.0)
    assert ok


def test_criterion_6_log_barrier(criterion):
    t0 = time.perf_counter()
    circle = build_boundary("circle")
    collar = FermiCollar(circle, 0.5)
    K, rep = find_supersolution_K(collar, AmbientParams(0.2), 0.5, M=1.0, margin=1e-3)
    w = LogBarrier(1.0, K)
    t = np.linspace(0.0, 1.0 / K, 101)
    ident = max(abs(float(w.w(0.0))), abs(float(w.w(1.0 / K)) - 1.0),
                float(np.max(np.abs(w.w_tt(t) + w.w_t(t) ** 2 / w.L) / np.abs(w.w_tt(t)))))
    dt = time.perf_counter() - t0
    ok = criterion(6, "log-barrier supersolution at H=k/2", rep["maxQ"] < -1e-3 and ident <= 1e-12,
                   f"K = {K:g}, max Q_H(w) = {rep['maxQ']:.3e}, identity error {ident:.1e}", dt, 30.0)
    assert ok


def test_criterion_7_exhaustion(criterion):
    t0 = time.perf_counter()
    circle = build_boundary("circle")
    spec = SolveSpec(AmbientParams(0.4), 0.5, circle, h=1 / 32)
    res = exhaustion_solve(spec, (4, 8, 16))
    dg = res.diagnostics
    try:
        exhaustion_solve(spec.replace(params=AmbientParams(1.0)), (4, 8, 16))
        gate = False
    except ValidationError:
        gate = True
    sups = [d["ring_sup"] for d in dg["boundary_decay"]]
    incs = [m["min_increase"] for m in dg["monotonicity"]]
    dt = time.perf_counter() - t0
    passed = res.converged and dg["monotone"] and dg["decay_decreasing"] and gate
    ok = criterion(7, "exhaustion on Omega(4, 8, 16)", passed,
                   f"min increases {', '.join(f'{v:.1e}' for v in incs)} (tol h^2); ring sups "
                   f"{', '.join(f'{v:.4f}' for v in sups)}; tau=1 rejected: {gate}", dt, 300.0)
    assert ok


def test_criterion_8_determinism(criterion, tmp_path):
    t0 = time.perf_counter()
    cfg = tmp_path / "run.toml"
    cfg.write_text('[ambient]\ntau = 0.2\n\n[domain]\nboundary_sin = [0.0, 0.1]\n\n'
                   '[solver]\nH = 0.3\nh = 0.0625\n')
    codes, blobs = [], []
    for name in ("first", "second"):
        codes.append(cli.main(["solve", "--config", str(cfg), "--out", str(tmp_path / name)]))
        blobs.append((tmp_path / name / "solution.csv").read_bytes())
    dt = time.perf_counter() - t0
    ok = criterion(8, "byte-identical solve CSV", codes == [0, 0] and blobs[0] == blobs[1],
                   f"exit codes {codes}, {len(blobs[0])} bytes", dt, math.inf)
    assert ok
