"""Run, verify and sweep drivers behind the command line interface.

Reports are flat dicts with a fixed field list; anything downstream
(verify, the determinism checks, external tooling) can rely on exactly
these keys and no others.
"""
from __future__ import annotations

import csv
import io
import json
import time

import numpy as np

from .baselines import gilbert_baseline, meb_baseline
from .config import RunConfig
from .instances import gen_ses, gen_svm, load
from .ses import SesInstance, solve_ses
from .svm import SvmInstance, solve_svm

REPORT_FIELDS = ("problem", "n", "d", "eps", "value_primal", "value_dual",
                 "gap", "iterations_total", "search_steps", "wall_ms",
                 "termination", "threads")

VERIFY_MAX_N = 10 ** 5


def run_instance(inst: SesInstance | SvmInstance, config: RunConfig) -> dict:
    t0 = time.perf_counter()
    if isinstance(inst, SesInstance):
        problem, n, d = "ses", inst.n, inst.d
        report, _ = solve_ses(inst, config.eps, config)
    else:
        problem, n, d = "svm", inst.n1 + inst.n2, inst.d
        report, _ = solve_svm(inst, config.eps, config)
    wall_ms = (time.perf_counter() - t0) * 1000.0
    return {
        "problem": problem,
        "n": n,
        "d": d,
        "eps": config.eps,
        "value_primal": report.primal_value,
        "value_dual": report.dual_value,
        "gap": report.dual_value - report.primal_value,
        "iterations_total": report.total_iterations,
        "search_steps": report.search_steps,
        "wall_ms": wall_ms,
        "termination": report.termination.value,
        "threads": config.threads,
    }


def run_file(instance_path: str, config: RunConfig) -> dict:
    return run_instance(load(instance_path), config)


def format_report(report: dict, fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps({k: report[k] for k in REPORT_FIELDS}, indent=2) + "\n"
    if fmt == "csv":
        out = io.StringIO()
        w = csv.DictWriter(out, fieldnames=list(REPORT_FIELDS), lineterminator="\n")
        w.writeheader()
        w.writerow({k: report[k] for k in REPORT_FIELDS})
        return out.getvalue()
    raise ValueError(f"unknown format {fmt!r}")


def verify_report(inst: SesInstance | SvmInstance, report: dict,
                  bound: float = 0.01, eps_base: float = 1e-3,
                  gap_tol: float = 1e-6) -> tuple[float, bool]:
    """Recompute the reference value with the independent baseline and
    return (error, pass).  Error is (ours - ref)/ref for the enclosing
    radius and (ref - ours)/ref for the margin; negative errors mean the
    main solver beat the baseline."""
    if isinstance(inst, SesInstance):
        if inst.n > VERIFY_MAX_N:
            raise ValueError(f"baseline guarded to n <= {VERIFY_MAX_N}")
        ref = meb_baseline(inst.centers, inst.radii, eps_base=eps_base).value
        error = (report["value_dual"] - ref) / ref
    else:
        if inst.n1 + inst.n2 > VERIFY_MAX_N:
            raise ValueError(f"baseline guarded to n <= {VERIFY_MAX_N}")
        ref = gilbert_baseline(inst.P, inst.Q, gap_tol=gap_tol).value
        error = (ref - report["value_primal"]) / ref
    return float(error), error <= bound


SWEEP_FIELDS = ("problem", "n", "d", "rep", "status", "wall_ms",
                "iterations", "value", "error")

# baseline cost grows fast; skip the error column beyond these sizes
SWEEP_BASELINE_MAX = {"ses": 2048, "svm": 20000}
SWEEP_EPS_BASE = 1e-2


def sweep(problem: str, sizes, dims, reps: int, config: RunConfig,
          gap: float = 1.0, with_baseline: bool = True) -> list[dict]:
    """One row per (size, dim, rep) plus a mean row per (size, dim).
    Failures are recorded in the row's status and the sweep continues."""
    if problem not in ("ses", "svm"):
        raise ValueError("problem must be ses or svm")
    rows = []
    for n in sizes:
        for d in dims:
            group = []
            for rep in range(reps):
                seed = (config.seed * 1000003 + int(n) * 8191
                        + int(d) * 131 + rep) % (2 ** 63)
                row = {"problem": problem, "n": int(n), "d": int(d),
                       "rep": rep, "status": "ok", "wall_ms": "",
                       "iterations": "", "value": "", "error": ""}
                try:
                    if problem == "ses":
                        inst = gen_ses(int(n), int(d), seed)
                    else:
                        inst, _ = gen_svm(int(n) // 2, int(n) - int(n) // 2,
                                          int(d), seed, gap)
                    rep_dict = run_instance(inst, config)
                    row["wall_ms"] = rep_dict["wall_ms"]
                    row["iterations"] = rep_dict["iterations_total"]
                    row["value"] = (rep_dict["value_dual"] if problem == "ses"
                                    else rep_dict["value_primal"])
                    if with_baseline and int(n) <= SWEEP_BASELINE_MAX[problem]:
                        err, _ = verify_report(inst, rep_dict,
                                               eps_base=SWEEP_EPS_BASE)
                        row["error"] = err
                except Exception as exc:  # noqa: BLE001 - recorded per row
                    row["status"] = f"error: {exc}"
                group.append(row)
                rows.append(row)
            ok = [r for r in group if r["status"] == "ok"]
            if ok:
                mean_row = {"problem": problem, "n": int(n), "d": int(d),
                            "rep": "mean", "status": "ok",
                            "wall_ms": float(np.mean([r["wall_ms"] for r in ok])),
                            "iterations": float(np.mean([r["iterations"] for r in ok])),
                            "value": float(np.mean([r["value"] for r in ok])),
                            "error": ""}
                errs = [r["error"] for r in ok if r["error"] != ""]
                if errs:
                    mean_row["error"] = float(np.mean(errs))
                rows.append(mean_row)
    return rows


def sweep_csv(rows: list[dict]) -> str:
    out = io.StringIO()
    w = csv.DictWriter(out, fieldnames=list(SWEEP_FIELDS), lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow(row)
    return out.getvalue()


def fit_loglog_slope(xs, ys) -> float:
    """Least-squares slope of log(y) against log(x)."""
    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    return float(np.polyfit(lx, ly, 1)[0])
