"""Command-line driver: ``nilcmc {solve,curvature,verify} --config C --out DIR``.

Exit codes: 0 success, 1 a verification check failed, 2 invalid input or a
violated existence hypothesis, 3 numerical non-convergence.
"""
from __future__ import annotations

import argparse
import logging
import math
import os
import platform
import sys
import time
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from . import __version__
from .checks import run_suite
from .config import RunConfig, load_config, parse_config
from .curvature import (ConeSpec, cone_chart, cone_mean_curvature, cylinder_chart,
                        cylinder_mean_curvature, graph_chart, graph_mean_curvature, polynomial_jet)
from .domain import ScalarField, build_boundary, fourier_data
from .exceptions import ConvergenceError, SingularityError, ValidationError
from .geometry import AmbientParams, mean_curvature_immersion
from .io import write_csv, write_json, write_solution_csv, write_vtk
from .solver import (SolveSpec, check_hypotheses, continuity_solve, exhaustion_solve,
                     gradient_diagnostic, newton_solve, uniqueness_check, verify_maximum_principle)

log = logging.getLogger("nilcmc")

SCHEMA_VERSION = "1.0"
EXIT_OK, EXIT_VERIFY, EXIT_INVALID, EXIT_NONCONVERGED = 0, 1, 2, 3

__all__ = ["main", "cmd_solve", "cmd_curvature", "cmd_verify", "build_spec", "thread_limit"]


def thread_limit():
    """Value of NILCMC_THREADS as a positive int, or None when unset."""
    raw = os.environ.get("NILCMC_THREADS", "").strip()
    if not raw:
        return None
    try:
        n = int(raw)
    except ValueError:
        raise ValidationError(f"NILCMC_THREADS must be a positive integer; got {raw!r}") from None
    if n < 1:
        raise ValidationError(f"NILCMC_THREADS must be a positive integer; got {raw!r}")
    return n


def _curve(cfg: RunConfig):
    d = cfg["domain"]
    return build_boundary(d["kind"], d["samples"], radius=d["radius"], center=d["center"],
                          a=d["a"], b=d["b"], path=cfg.domain_path())


def build_spec(cfg: RunConfig) -> SolveSpec:
    curve = _curve(cfg)
    d, s = cfg["domain"], cfg["solver"]
    data = fourier_data(curve, d["boundary_constant"], d["boundary_cos"], d["boundary_sin"])
    return SolveSpec(AmbientParams(cfg["ambient"]["tau"]), s["H"], curve, data, h=s["h"], tol=s["tol"],
                     max_iter=s["max_iter"], steps=s["steps"], max_bisections=s["max_bisections"],
                     jacobian=s["jacobian"], picard_fallback=s["picard_fallback"])


def _report(cfg: RunConfig, command: str) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "nilcmc_version": __version__,
        "config": cfg.to_dict(),
        "environment": {"python": platform.python_version(), "numpy": np.__version__,
                        "threads": thread_limit()},
        "checks": [],
        "timings": {},
    }


def _check(name, passed, tolerance, **values):
    return dict(name=name, passed=bool(passed), tolerance=tolerance, **values)


def _finish(report, out: Path, cfg: RunConfig, code: int, message: str = "") -> int:
    report["exit_code"] = code
    report["message"] = message
    report["all_checks_passed"] = all(c["passed"] for c in report["checks"])
    if cfg["output"]["report"]:
        write_json(out / "report.json", report)
    return code


def cmd_solve(cfg: RunConfig, out: Path) -> int:
    report = _report(cfg, "solve")
    t_start = time.perf_counter()
    s = cfg["solver"]
    try:
        spec = build_spec(cfg)
        path = "theorem2" if s["method"] == "exhaustion" else "theorem1"
        report["hypotheses"] = check_hypotheses(spec, path)
        report["grid"] = {"h": spec.h, "nodes": spec.grid.n, "boundary_points": len(spec.grid.boundary_s)}
    except ValidationError as exc:
        print(f"nilcmc solve: invalid input: {exc}", file=sys.stderr)
        return _finish(report, out, cfg, EXIT_INVALID, str(exc))
    report["timings"]["setup_s"] = time.perf_counter() - t_start
    t0 = time.perf_counter()
    try:
        if s["method"] == "continuity":
            res = continuity_solve(spec, path_check=False)
        elif s["method"] == "exhaustion":
            res = exhaustion_solve(spec, s["schedule"])
        else:
            res = newton_solve(spec, ScalarField(spec.grid, np.zeros(spec.grid.n), spec.trace()))
    except (SingularityError, ConvergenceError) as exc:
        print(f"nilcmc solve: numerical failure: {exc}", file=sys.stderr)
        report["result"] = {"converged": False, "error": str(exc)}
        return _finish(report, out, cfg, EXIT_NONCONVERGED, str(exc))
    report["timings"]["solve_s"] = time.perf_counter() - t0
    report["result"] = res.summary()
    report["result"]["steps"] = res.diagnostics.get("steps", [])
    _emit(cfg, out, res.u)
    if not res.converged:
        msg = f"no convergence: residual {res.residual:.3e}, reached t = {res.t_reached:.4g}"
        print(f"nilcmc solve: {msg}", file=sys.stderr)
        return _finish(report, out, cfg, EXIT_NONCONVERGED, msg)
    report["checks"].append(_check("residual below tolerance", res.residual <= spec.tol, spec.tol,
                                   value=res.residual))
    t0 = time.perf_counter()
    if s["method"] == "exhaustion":
        dg = res.diagnostics
        for m in dg["monotonicity"]:
            report["checks"].append(_check(f"monotone exhaustion n={m['n'][0]}->{m['n'][1]}", m["passed"],
                                           m["tolerance"], value=m["min_increase"]))
        report["checks"].append(_check("boundary ring sup decreasing", dg["decay_decreasing"], 0.0,
                                       value=[d["ring_sup"] for d in dg["boundary_decay"]]))
        report["exhaustion"] = {k: dg[k] for k in ("schedule", "boundary_decay", "tail_bound", "log_barrier")}
    elif s["check_barriers"]:
        mp = verify_maximum_principle(res, spec)
        report["checks"].append(_check("plane lower bound u >= min phi", mp["plane"]["passed"],
                                       mp["plane"]["tolerance"], value=mp["plane"]["min_u"] - mp["plane"]["min_trace"]))
        cones = mp["cones"]
        report["checks"].append(_check("cone sandwich", cones["passed"], cones.get("tolerance"),
                                       value=[cones.get("max_above_upper"), cones.get("max_below_lower")]))
        report["checks"].append(_check("height bound |u| <= C0", mp["height_bound"]["passed"], spec.h ** 2,
                                       value=mp["height_bound"]))
        report["barriers"] = {k: v for k, v in cones.items() if k not in ("passed",)}
    if s["method"] != "exhaustion":
        gd = gradient_diagnostic(res, spec, s["gradient_A"])
        report["gradient_diagnostic"] = {k: gd[k] for k in ("A", "max", "argmax", "boundary_attained")}
        if s["uniqueness"]:
            uq = uniqueness_check(spec, s["uniqueness_scale"], s["seed"])
            report["checks"].append(_check("uniqueness", uq["passed"], uq["threshold"],
                                           value=uq.get("sup_difference")))
    report["timings"]["checks_s"] = time.perf_counter() - t0
    report["timings"]["total_s"] = time.perf_counter() - t_start
    return _finish(report, out, cfg, EXIT_OK)


def _emit(cfg, out: Path, u):
    if cfg["output"]["csv"]:
        write_solution_csv(out / "solution.csv", u)
    if cfg["output"]["vtk"]:
        write_vtk(out / "solution.vtk", u)


def cmd_curvature(cfg: RunConfig, out: Path) -> int:
    """Closed-form against oracle mean curvature on a sample table."""
    report = _report(cfg, "curvature")
    c = cfg["curvature"]
    params = AmbientParams(cfg["ambient"]["tau"])
    try:
        surface = c["surface"]
        if surface == "graph":
            jet = polynomial_jet(c["graph_coeffs"] or [(0, 0, 0.0)])
            chart = graph_chart(jet)
            s_vals = c["s"] or list(np.linspace(-0.5, 0.5, c["n_s"]))

            def closed(si, ti):
                return float(graph_mean_curvature(params, si, ti, *jet(si, ti)[1:]))
        else:
            base = _curve(cfg)
            s_vals = c["s"] or list(np.linspace(0.0, base.length, c["n_s"], endpoint=False))
            if surface == "cylinder":
                chart = cylinder_chart(base)

                def closed(si, ti):
                    return float(cylinder_mean_curvature(base, si))
            else:
                cone = ConeSpec((0.0, 0.0, c["vertex_height"]), base)
                chart = cone_chart(cone)

                def closed(si, ti):
                    return float(cone_mean_curvature(cone, params, si, ti))
    except ValidationError as exc:
        print(f"nilcmc curvature: invalid input: {exc}", file=sys.stderr)
        return _finish(report, out, cfg, EXIT_INVALID, str(exc))
    rows, worst, flagged = [], 0.0, 0
    for si in s_vals:
        for ti in c["t"]:
            try:
                hc = closed(si, ti)
                ho = float(mean_curvature_immersion(chart, si, ti, params))
                diff = hc - ho
                flag = "ok"
                worst = max(worst, abs(diff))
            except (SingularityError, ValidationError) as exc:
                hc = ho = diff = math.nan
                flag = "singular"
                flagged += 1
                log.info("singular sample (s=%g, t=%g): %s", si, ti, exc)
            rows.append([float(si), float(ti), hc, ho, diff, flag])
    write_csv(out / "curvature.csv", ("s", "t", "H_closed", "H_oracle", "difference", "flag"), rows)
    report["result"] = {"rows": len(rows), "singular_rows": flagged, "max_abs_difference": worst}
    report["checks"].append(_check("closed form matches oracle", worst <= 1e-8, 1e-8, value=worst))
    return _finish(report, out, cfg, EXIT_OK)


def cmd_verify(cfg: RunConfig, out: Path) -> int:
    report = _report(cfg, "verify")
    v = cfg["verify"]
    try:
        res = run_suite(tuple(v["taus"]), v["points"], v["seed"], v["surfaces"], v["fd_points"])
    except ValidationError as exc:
        print(f"nilcmc verify: invalid input: {exc}", file=sys.stderr)
        return _finish(report, out, cfg, EXIT_INVALID, str(exc))
    report["checks"] = [c.as_dict() for c in res["checks"]]
    report["timings"]["suite_s"] = res["seconds"]
    failed = [c.name for c in res["checks"] if not c.passed]
    for name in failed:
        print(f"nilcmc verify: FAILED {name}", file=sys.stderr)
    if failed:
        return _finish(report, out, cfg, EXIT_VERIFY, "failed: " + "; ".join(failed))
    return _finish(report, out, cfg, EXIT_OK)


COMMANDS = {"solve": cmd_solve, "curvature": cmd_curvature, "verify": cmd_verify}


def _parser():
    p = argparse.ArgumentParser(prog="nilcmc", description="Constant mean curvature graphs in H(tau).")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (("solve", "solve the Dirichlet problem"),
                        ("curvature", "tabulate closed-form vs oracle mean curvature"),
                        ("verify", "run the geometric invariant suite")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", type=Path, help="TOML configuration (defaults if omitted)")
        sp.add_argument("--out", type=Path, default=Path("."), help="output directory")
        sp.add_argument("-v", "--verbose", action="count", default=0)
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, args.command) if args.config else parse_config({}, None, args.command)
        threads = thread_limit()
        args.out.mkdir(parents=True, exist_ok=True)
    except (ValidationError, OSError) as exc:
        print(f"nilcmc {args.command}: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    with threadpool_limits(limits=threads):
        return COMMANDS[args.command](cfg, args.out)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
