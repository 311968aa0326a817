"""Scenario execution: checks, solvers, analysis, and the run manifest.

A run works through four stages: hypothesis checks, the grid solver, the
optional kernel-based cross-check, and the requested analysis operations.
Every stage contributes a verdict under a named tag.  Verdicts are
conditional in one direction only: when the hypothesis checks fail, failing
conclusion checks are reported "inconclusive" rather than "violated",
because nothing was promised for inputs outside the hypotheses.
"""

from __future__ import annotations

import logging
import traceback
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (component_bound_mk, default_battery, detect_monotone,
                       elliptic_weak_residual, extinction_check,
                       extract_steady_state, gronwall_extinction_bound,
                       lv_limit_coefficients, max_principle_bound)
from .checker import run_checks
from .duhamel import PicardConfig, picard_solve
from .errors import NonConvergence, ParaposError, SpecError
from .fdm import solve, solve_cauchy_nested
from .io import (sha256_file, write_diagnostics_csv, write_json,
                 write_residuals_csv, write_snapshots, write_trajectory_csv)

logger = logging.getLogger("parapos")

POSITIVITY_FACTOR = 1e-8     # negative part allowed per unit of sup norm
BOUND_SLACK = 1e-6           # additive slack on sup-norm barriers
RESIDUAL_TOL = 5e-4          # weak-residual magnitude at base resolution

_CONCLUSION_NOTE = "hypotheses unverified; conclusion cannot be falsified here"


@dataclass
class Verdict:
    status: str              # verified | violated | inconclusive
    note: str = ""
    data: dict = field(default_factory=dict)

    def to_json(self):
        return {"status": self.status, "note": self.note, "data": self.data}


@dataclass
class RunManifest:
    name: str
    status: str              # ok | error
    config_hash: str
    tool_version: str
    seed: int
    started: str
    finished: str
    verdicts: dict
    files: list
    error: str | None = None

    @property
    def all_verified(self):
        return self.status == "ok" and all(
            v.status == "verified" for v in self.verdicts.values())

    @property
    def any_violated(self):
        return any(v.status == "violated" for v in self.verdicts.values())

    def to_json(self):
        return {
            "name": self.name,
            "status": self.status,
            "config_hash": self.config_hash,
            "tool_version": self.tool_version,
            "seed": self.seed,
            "started": self.started,
            "finished": self.finished,
            "verdicts": {k: v.to_json() for k, v in sorted(self.verdicts.items())},
            "files": self.files,
            "error": self.error,
        }


def _now():
    return datetime.now(timezone.utc).isoformat()


def _component_sups(trajectory, component):
    flat = trajectory.values[:, component].reshape(len(trajectory.times), -1)
    return np.abs(flat).max(axis=1)


def _positivity_verdict(trajectory):
    worst = 0.0
    for rep in trajectory.reports:
        slack = POSITIVITY_FACTOR * (1.0 + rep.sup_norm)
        worst = max(worst, rep.negpart_norm - slack)
    status = "verified" if worst <= 0.0 else "violated"
    return Verdict(status, data={"worst_excess": worst,
                                 "steps": len(trajectory.reports)})


def _sup_bound_verdict(trajectory, bound, label):
    sups = [rep.sup_norm for rep in trajectory.reports]
    observed = max(sups) if sups else float(np.abs(trajectory.values[0]).max())
    ok = observed <= bound + BOUND_SLACK
    return Verdict("verified" if ok else "violated",
                   note=label,
                   data={"bound": bound, "observed_sup": observed})


def _dual_route(problem, trajectory, analysis, out, formats):
    pic_conf = PicardConfig(**analysis.get("picard", {}))
    result = picard_solve(problem, pic_conf)

    tc = float(analysis.get("crosscheck_time", problem.horizon))
    c_const = float(analysis.get("crosscheck_constant", 2.0))
    it = int(np.argmin(np.abs(trajectory.times - tc)))
    ip = int(np.argmin(np.abs(result.times - tc)))
    if abs(trajectory.times[it] - tc) > 1e-9 or abs(result.times[ip] - tc) > 1e-9:
        raise SpecError(f"crosscheck time {tc} is not on both stored time lattices")

    a = trajectory.values[it]
    b = result.values[ip]
    scale = float(np.abs(a).max())
    diff = float(np.abs(a - b).max()) / (scale if scale > 0 else 1.0)
    h = max(trajectory.grid.spacing)
    tol = max(1e-3, c_const * (h * h + trajectory.dt))

    ratios = [r for window in result.contraction_ratios for r in window]
    contracting = all(r < 1.0 for r in ratios)

    if "csv" in formats:
        write_trajectory_csv(out / "trajectory_duhamel.csv", result,
                             source="duhamel")

    ok = diff <= tol and contracting
    note = "" if ok else ("kernel route disagrees" if diff > tol
                          else "picard sweeps failed to contract")
    return Verdict("verified" if ok else "violated", note=note,
                   data={"rel_sup_diff": diff, "tolerance": tol,
                         "crosscheck_time": tc, "contracting": contracting,
                         "sweep_ratios_max": max(ratios) if ratios else None,
                         "jacobian_sup": result.jacobian_sup})


def _nested(problem, scheme, analysis):
    block = analysis["nested"]
    try:
        _, report = solve_cauchy_nested(
            problem, tuple(block["radii"]), scheme,
            cutoff_width=float(block.get("cutoff_width", 1.0)),
            tol_nested=float(block.get("tol_nested", 1e-6)),
            compare_radius=block.get("compare_radius"),
        )
    except NonConvergence as exc:
        return Verdict("violated", note=str(exc))
    status = "verified" if report.converged else "violated"
    return Verdict(status,
                   note="" if report.converged else "final difference above tolerance",
                   data={"radii": list(report.radii),
                         "core_diffs": [float(d) for d in report.diffs],
                         "tolerance": report.tol})


def _weak_residuals(config, problem, steady, out, formats):
    analysis = config.analysis_data
    limits = analysis.get("limits")
    if limits is None:
        limits = lv_limit_coefficients(problem.lv)
    tests = config.battery() or default_battery(problem.domain)
    grid = problem.initial.grid
    residuals = elliptic_weak_residual(
        steady.values[0], steady.values[1], tuple(limits), tests,
        tuple(problem.lv.diffusion), grid=grid)
    steady.attach_residuals(residuals)
    if "csv" in formats:
        write_residuals_csv(out / "residuals.csv", residuals)
    worst = float(np.abs(residuals).max())
    ok = worst <= RESIDUAL_TOL
    return Verdict("verified" if ok else "violated",
                   data={"worst_residual": worst, "tolerance": RESIDUAL_TOL,
                         "battery_size": len(tests),
                         "coverage": "finite battery only"})


def _run_analysis(config, problem, scheme, trajectory, verdicts, out, formats,
                  d_hats):
    analysis = config.analysis_data
    ops = analysis.get("ops", [])
    steady = None

    if "max_principle" in ops:
        d1, d2 = d_hats
        if d1 is None or d2 is None:
            verdicts["sup-bound"] = Verdict(
                "inconclusive", note="no dissipativity constants; request A2'")
        else:
            bound = max_principle_bound(d1, d2, problem.horizon, problem.initial)
            verdicts["sup-bound"] = _sup_bound_verdict(
                trajectory, bound, "dissipativity barrier")

    if "gronwall" in ops:
        k = int(analysis.get("gronwall_component", 0))
        beta = problem.lv.growth[k]
        bound = gronwall_extinction_bound(problem.initial.values[k], beta,
                                          domain=problem.domain)
        sups = _component_sups(trajectory, k)
        ok = bool(np.all(sups <= bound + BOUND_SLACK))
        verdicts["sup-bound"] = Verdict(
            "verified" if ok else "violated",
            note="integrated-growth barrier",
            data={"bound": bound, "observed_sup": float(sups.max())})

    if "extinction" in ops:
        k = int(analysis.get("extinction_component", 0))
        verdict = extinction_check(
            trajectory, k,
            tol_ext=float(analysis.get("tol_ext", 1e-3)),
            window_fraction=float(analysis.get("window_fraction", 0.1)))
        verdicts["extinction"] = Verdict(
            "verified" if verdict.extinct else "violated",
            data={"final_sup": verdict.final_sup, "peak_sup": verdict.peak_sup,
                  "tail_decreasing": verdict.tail_decreasing})

    if "monotone" in ops:
        signs = analysis.get("monotone_signs")
        if signs is None:
            signs = [1] * problem.components
        worst = None
        witness = None
        passed = True
        for k, sign in enumerate(signs):
            res = detect_monotone(trajectory, k, sign)
            if worst is None or res.worst_margin < worst:
                worst, witness = res.worst_margin, res.witness
            passed = passed and res.passed
        verdicts["monotone-flow"] = Verdict(
            "verified" if passed else "violated",
            data={"worst_margin": worst, "witness": witness})

    if "steady_state" in ops or "weak_residuals" in ops:
        steady = extract_steady_state(
            trajectory,
            window_fraction=float(analysis.get("window_fraction", 0.1)),
            steady_tol=float(analysis.get("steady_tol", 1e-8)))
        if "steady_state" in ops:
            verdicts["steady-state"] = Verdict(
                "verified" if steady.reached else "violated",
                data={"tail_slope": steady.tail_slope, "window": steady.window})

    if "weak_residuals" in ops:
        verdicts["weak-residuals"] = _weak_residuals(
            config, problem, steady, out, formats)

    if steady is not None and "json" in formats:
        write_json(out / "steady_state.json", steady.to_json())

    if "component_bound" in ops:
        k = int(analysis.get("bound_component", 0))
        beta = problem.lv.growth[k]
        gamma = problem.lv.interaction[k][k]
        bound = component_bound_mk(trajectory, beta, gamma,
                                   float(analysis["t_split"]), component=k)
        sups = _component_sups(trajectory, k)
        ok = bool(np.all(sups <= bound + BOUND_SLACK))
        verdicts["component-bound"] = Verdict(
            "verified" if ok else "violated",
            data={"bound": float(bound), "observed_sup": float(sups.max())})

    if "dual_route" in ops:
        verdicts["dual-route-match"] = _dual_route(
            problem, trajectory, analysis, out, formats)

    if "nested" in ops:
        verdicts["nested-boxes"] = _nested(problem, scheme, analysis)


def _downgrade(verdicts):
    hyp = verdicts.get("hypotheses")
    if hyp is None or hyp.status == "verified":
        return
    for tag, verdict in verdicts.items():
        if tag == "hypotheses" or verdict.status != "violated":
            continue
        verdict.status = "inconclusive"
        verdict.note = (verdict.note + "; " if verdict.note else "") + _CONCLUSION_NOTE


def _sweep_files(out):
    entries = []
    for path in sorted(out.rglob("*")):
        if path.is_file() and path.name != "manifest.json":
            entries.append({"path": str(path.relative_to(out)),
                            "sha256": sha256_file(path)})
    entries.append({"path": "manifest.json", "sha256": None})
    return entries


def run_scenario(config, out_dir=None, seed=None):
    """Execute one validated scenario and write its artifacts.

    Returns the RunManifest; ``manifest.json`` and every other artifact land
    in ``out_dir`` (default ``parapos_out/<name>``).  Module errors are
    captured into a manifest with status "error" instead of propagating.
    """
    started = _now()
    out = Path(out_dir) if out_dir is not None else Path("parapos_out") / config.name
    out.mkdir(parents=True, exist_ok=True)
    formats = tuple(config.outputs_data.get("formats", ("csv", "binary", "json")))

    verdicts = {}
    status, error = "ok", None

    try:
        problem = config.build_problem()
        scheme = config.scheme()
        budget = config.budget(seed_override=seed)

        logger.info("%s: running %d hypothesis checks", config.name,
                    len(config.assumptions()))
        report = run_checks(problem, budget, config.assumptions(),
                            majorants=config.majorants(),
                            tolerances=config.tolerances())
        if "json" in formats:
            write_json(out / "checks.json", report.to_json())
        failed = [e.assumption for e in report.entries if e.status == "fail"]
        verdicts["hypotheses"] = Verdict(
            "verified" if not failed else "violated",
            note="" if not failed else "failed: " + ", ".join(failed),
            data={"requested": list(config.assumptions()),
                  "kappa_hat": report.kappa_hat,
                  "d1_hat": report.d1_hat, "d2_hat": report.d2_hat})

        logger.info("%s: solving (%s, dt=%g)", config.name, scheme.scheme, scheme.dt)
        trajectory = solve(problem, scheme)
        verdicts["positivity"] = _positivity_verdict(trajectory)

        if "csv" in formats:
            write_trajectory_csv(out / "trajectory.csv", trajectory)
            write_diagnostics_csv(out / "diagnostics.csv", trajectory)
        if "binary" in formats:
            write_snapshots(out / "snapshots.bin", trajectory)

        _run_analysis(config, problem, scheme, trajectory, verdicts, out,
                      formats, d_hats=(report.d1_hat, report.d2_hat))
    except ParaposError as exc:
        status, error = "error", f"{type(exc).__name__}: {exc}"
        logger.error("%s: %s", config.name, error)
    except Exception as exc:  # noqa: BLE001 - the manifest must always land
        status, error = "error", f"{type(exc).__name__}: {exc}"
        logger.error("%s: unexpected failure\n%s", config.name,
                     traceback.format_exc())

    _downgrade(verdicts)

    manifest = RunManifest(
        name=config.name,
        status=status,
        config_hash=config.config_hash(),
        tool_version=__version__,
        seed=seed if seed is not None else config.budget().seed,
        started=started,
        finished=_now(),
        verdicts=verdicts,
        files=_sweep_files(out),
        error=error,
    )
    write_json(out / "manifest.json", manifest.to_json())
    for tag, verdict in sorted(verdicts.items()):
        logger.info("%s: %s -> %s", config.name, tag, verdict.status)
    return manifest


def manifest_exit_code(manifest):
    """Exit-code contract: 0 all verified, 1 violated or unproven, 3 error."""
    if manifest.status == "error":
        return 3
    if manifest.all_verified:
        return 0
    return 1
