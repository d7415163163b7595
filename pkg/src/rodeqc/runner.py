"""Command execution: artifacts, checksums and reproducible run records.

Every command writes CSV artifacts plus a ``run_record.json`` echoing the
config, listing each emitted file with its SHA-256 checksum, and collecting
summary scalars.  Artifacts are write-once: an existing file of the same
name aborts the run instead of being overwritten.
"""

from __future__ import annotations

import hashlib
import json
import os
import time

import numpy as np

from . import __version__, config as cfgmod
from .error_bounds import (
    WorstCaseConfig,
    bound_chain,
    construct_worst_case,
    decorrelation_study,
    tightness_gap,
    wcnc_tube_probability,
)
from .errors import ConfigError
from .geodesics import fit_polynomial_control, shoot_geodesic
from .integrator import (
    apply_to_state,
    error_process,
    propagate,
    uniform_grid,
)
from .metrics import NoiseMetric
from .noise_process import build_noise_trajectory
from .optimizer import (
    OptimizationProblem,
    OptimizerOptions,
    experiment_noise_aware_vs_blind,
    snr_sweep,
)


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


class ArtifactWriter:
    """Write-once CSV/JSON emission with checksum bookkeeping."""

    def __init__(self, out_dir: str):
        self.out_dir = out_dir
        self.files: list[dict] = []
        os.makedirs(out_dir, exist_ok=True)

    def _path(self, name: str) -> str:
        path = os.path.join(self.out_dir, name)
        if os.path.exists(path):
            raise ConfigError(
                f"artifact {path} already exists; runs never overwrite outputs"
            )
        return path

    def write_csv(self, name: str, header: list[str], rows) -> str:
        path = self._path(name)
        lines = [",".join(header)]
        for row in rows:
            lines.append(",".join(_fmt(x) for x in row))
        data = ("\n".join(lines) + "\n").encode()
        with open(path, "wb") as fh:
            fh.write(data)
        self.files.append(
            {"path": name, "sha256": hashlib.sha256(data).hexdigest()}
        )
        return path

    def write_json(self, name: str, payload: dict) -> str:
        path = self._path(name)
        data = (json.dumps(payload, indent=2, sort_keys=True) + "\n").encode()
        with open(path, "wb") as fh:
            fh.write(data)
        self.files.append(
            {"path": name, "sha256": hashlib.sha256(data).hexdigest()}
        )
        return path


def _matrix_columns(dim: int, prefix: str = "") -> list[str]:
    cols = []
    for i in range(dim):
        for j in range(dim):
            cols += [f"{prefix}re_{i}{j}", f"{prefix}im_{i}{j}"]
    return cols


def _matrix_row(M: np.ndarray) -> list[float]:
    out = []
    for i in range(M.shape[0]):
        for j in range(M.shape[1]):
            out += [M[i, j].real, M[i, j].imag]
    return out


def _grid(cfg) -> np.ndarray:
    horizon = cfg.get("problem", {}).get("horizon", 1.0)
    steps = cfg.get("numeric", {}).get("steps_per_unit", 400)
    return uniform_grid(horizon, steps)


def _coupling(cfg) -> tuple[NoiseMetric | None, float]:
    metric = cfgmod.build_metric(cfg)
    eta = cfg.get("problem", {}).get("eta", 1.0)
    return metric, eta


def run_simulate(cfg, writer: ArtifactWriter) -> dict:
    ctrl = cfgmod.build_control(cfg)
    spec = cfgmod.build_noise_spec(cfg)
    metric, eta = _coupling(cfg)
    grid = _grid(cfg)
    seed = cfg.get("seed", 0)
    n_samples = cfg.get("numeric", {}).get("samples", 10)

    u0 = propagate(ctrl, grid=grid)
    noises = [
        build_noise_trajectory(spec, ctrl, metric, eta, grid, seed + i)
        for i in range(n_samples)
    ]
    ensemble = [propagate(ctrl, noise=n) for n in noises]
    for traj in ensemble:
        traj.validate()

    dim = ctrl.frame.dim
    traj_rows = []
    for i, traj in enumerate(ensemble):
        for k, t in enumerate(grid):
            traj_rows.append([t, i, traj.flavor] + _matrix_row(traj.values[k]))
    writer.write_csv(
        "trajectories.csv",
        ["t", "sample_index", "flavor"] + _matrix_columns(dim),
        traj_rows,
    )

    psi0 = np.zeros(dim, dtype=complex)
    psi0[0] = 1.0
    state_rows = []
    for i, traj in enumerate(ensemble):
        states = apply_to_state(traj, psi0)
        for k, t in enumerate(grid):
            row = [t, i]
            for a in range(dim):
                row += [states[k, a].real, states[k, a].imag]
            state_rows.append(row)
    writer.write_csv(
        "states.csv",
        ["t", "sample_index"]
        + [c for a in range(dim) for c in (f"re_a{a}", f"im_a{a}")],
        state_rows,
    )

    noise0 = noises[0]
    writer.write_csv(
        "noise_sample0.csv",
        ["t"] + _matrix_columns(dim) + ["envelope"],
        [
            [t] + _matrix_row(noise0.values[k]) + [noise0.envelope[k]]
            for k, t in enumerate(grid)
        ],
    )

    stats = error_process(ensemble, u0, norm="operator")
    K = float(np.max(noise0.envelope))
    int_env = np.concatenate(
        [[0.0], np.cumsum(0.5 * (noise0.envelope[:-1] + noise0.envelope[1:]) * np.diff(grid))]
    )
    writer.write_csv(
        "summary.csv",
        ["t", "max_err", "mean_err", "q05", "q95", "bound_linear", "bound_integral"],
        [
            [grid[k], stats.max[k], stats.mean[k], stats.q05[k], stats.q95[k],
             K * grid[k], int_env[k]]
            for k in range(len(grid))
        ],
    )
    return {
        "max_error_at_horizon": float(stats.max[-1]),
        "mean_error_at_horizon": float(stats.mean[-1]),
        "n_samples": n_samples,
    }


def run_bounds(cfg, writer: ArtifactWriter) -> dict:
    ctrl = cfgmod.build_control(cfg)
    spec = cfgmod.build_noise_spec(cfg)
    metric, eta = _coupling(cfg)
    grid = _grid(cfg)
    numeric = cfg.get("numeric", {})
    seed = cfg.get("seed", 0)
    n_samples = numeric.get("samples", 100)

    noises = [
        build_noise_trajectory(spec, ctrl, metric, eta, grid, seed + i)
        for i in range(n_samples)
    ]
    K = float(np.max(noises[0].envelope))
    report = bound_chain(ctrl, noises, K)
    writer.write_csv(
        "bounds_chain.csv",
        ["t", "max_err_op", "max_err_fro", "max_dF", "max_int_h1i",
         "int_envelope", "bound_linear"],
        [
            [grid[k], report.max_err_op[k], report.max_err_fro[k],
             report.max_dist[k], report.max_int_h1i[k],
             report.int_envelope[k], report.linear[k]]
            for k in range(len(grid))
        ],
    )
    summary = {
        "chain_violations": report.violations(1e-4),
        "n_samples": n_samples,
    }

    eps = numeric.get("worst_case_epsilon", 0.0)
    direction = ctrl.frame.basis[ctrl.frame.size - 1]
    wc = construct_worst_case(
        ctrl, WorstCaseConfig(direction, eps, 1.0), grid, seed=seed
    )
    gaps = tightness_gap(ctrl, wc)
    writer.write_csv(
        "tightness.csv",
        ["t", "gap"],
        [[grid[k], gaps[k]] for k in range(len(grid))],
    )
    summary["tightness_gap_at_horizon"] = float(gaps[-1])
    summary["worst_case_epsilon"] = eps

    deltas = numeric.get("deltas")
    if deltas:
        res = decorrelation_study(
            numeric.get("amplitude_k", 1.0), deltas, ctrl, n_samples, grid, seed
        )
        writer.write_csv(
            "decorrelation.csv",
            ["delta", "deviation", "n_samples", "amplitude"],
            [
                [res.deltas[i], res.deviations[i], res.n_samples, res.amplitude]
                for i in range(len(res.deltas))
            ],
        )
        summary["decorrelation_slope"] = res.slope
    return summary


def run_geodesic(cfg, writer: ArtifactWriter) -> dict:
    metric = cfgmod.build_metric(cfg)
    if metric is None:
        raise ConfigError("geodesic command requires metric.diag")
    target = cfgmod.build_target(cfg)
    numeric = cfg.get("numeric", {})
    sol = shoot_geodesic(
        metric,
        target,
        tol=numeric.get("tolerance", 1e-6),
        max_restarts=numeric.get("max_restarts", 4),
        seed=cfg.get("seed", 0),
        steps=numeric.get("steps_per_unit", 400),
    )
    grid = sol.trajectory.grid
    m = metric.frame.size
    writer.write_csv(
        "geodesic.csv",
        ["t"] + [f"v_{a}" for a in range(m)] + _matrix_columns(metric.frame.dim),
        [
            [grid[k]] + list(sol.velocities[k]) + _matrix_row(sol.trajectory.values[k])
            for k in range(len(grid))
        ],
    )
    degree = cfg.get("problem", {}).get("degree", 5)
    coeffs, fit_err = fit_polynomial_control(sol, degree)
    writer.write_json(
        "control_coefficients.json",
        {
            "degree": degree,
            "coefficients": coeffs.tolist(),
            "fit_max_error": fit_err,
            "length": sol.length,
            "frame_labels": list(metric.frame.labels),
        },
    )
    # nonconvergence is reported through the record (CLI exits 4 on it),
    # with the best-effort artifacts kept for inspection
    return {
        "length": sol.length,
        "endpoint_residual": sol.endpoint_residual,
        "converged": bool(sol.converged),
        "restarts": sol.restarts,
        "speed_drift": sol.speed_drift,
    }


def _problem_from_config(cfg) -> OptimizationProblem:
    metric = cfgmod.build_metric(cfg)
    if metric is None:
        raise ConfigError("optimize/sweep commands require metric.diag")
    problem = cfg.get("problem", {})
    numeric = cfg.get("numeric", {})
    return OptimizationProblem(
        target=cfgmod.build_target(cfg),
        frame=cfgmod.build_frame(cfg),
        drift=cfgmod.build_drift(cfg),
        metric=metric,
        eta=problem.get("eta", 1.0),
        horizon=problem.get("horizon", 1.0),
        degree=problem.get("degree", 5),
        steps_per_unit=numeric.get("steps_per_unit", 200),
        noise=cfgmod.build_noise_spec(cfg) if cfg.get("noise") else None,
    )


def _optimizer_options(cfg) -> OptimizerOptions:
    numeric = cfg.get("numeric", {})
    return OptimizerOptions(
        max_iters=numeric.get("max_iters", 1200),
        restarts=numeric.get("restarts", 1),
        seed=cfg.get("seed", 0),
    )


def run_optimize(cfg, writer: ArtifactWriter) -> dict:
    problem = _problem_from_config(cfg)
    numeric = cfg.get("numeric", {})
    exp = experiment_noise_aware_vs_blind(
        problem,
        num_controls=numeric.get("num_controls", 100),
        n_samples=numeric.get("samples", 100),
        seed=cfg.get("seed", 0),
        opts=_optimizer_options(cfg),
    )
    writer.write_csv(
        "fig2_errors.csv",
        ["control_index", "mode", "sample_index", "err_op", "err_fro"],
        exp.rows,
    )
    gap_lo, gap_hi = exp.paired_gap_interval()
    return {
        "blind_mean_err_op": float(exp.blind_means.mean()),
        "aware_mean_err_op": float(exp.aware_means.mean()),
        "ratio_blind_over_aware": exp.ratio,
        "paired_gap_ci95": [gap_lo, gap_hi],
        "aware_not_worse_95": bool(exp.aware_not_worse()),
        "num_controls": len(exp.blind_means),
    }


def run_sweep(cfg, writer: ArtifactWriter) -> dict:
    problem = _problem_from_config(cfg)
    numeric = cfg.get("numeric", {})
    eta_grid = numeric.get("eta_grid", [0.25 * k for k in range(9)])
    points = snr_sweep(
        problem,
        eta_grid,
        num_controls=numeric.get("num_controls", 40),
        n_samples=numeric.get("samples", 60),
        seed=cfg.get("seed", 0),
        opts=_optimizer_options(cfg),
    )
    rows = []
    for pt in points:
        for mode in ("blind", "aware"):
            mean, lo, hi = pt.mode_summary(mode)
            rows.append([pt.eta, mode, mean, lo, hi])
    writer.write_csv(
        "fig3_sweep.csv", ["eta", "mode", "mean_err_op", "ci_lo", "ci_hi"], rows
    )
    aware_means = np.array([pt.aware_means.mean() for pt in points])
    etas = np.array([pt.eta for pt in points])
    r2 = float("nan")
    if len(etas) >= 3:
        fit = np.polyfit(etas, aware_means, 1)
        pred = np.polyval(fit, etas)
        ss_res = float(np.sum((aware_means - pred) ** 2))
        ss_tot = float(np.sum((aware_means - aware_means.mean()) ** 2))
        r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return {
        "eta_grid": [float(e) for e in etas],
        "aware_linear_r2": r2,
        "aware_below_blind_everywhere": bool(
            all(pt.aware_means.mean() <= pt.blind_means.mean() + 1e-12 for pt in points)
        ),
    }


def run_wcnc(cfg, writer: ArtifactWriter) -> dict:
    ctrl = cfgmod.build_control(cfg)
    spec = cfgmod.build_noise_spec(cfg)
    metric, eta = _coupling(cfg)
    numeric = cfg.get("numeric", {})
    grid = _grid(cfg)
    estimates = wcnc_tube_probability(
        spec,
        ctrl,
        metric,
        eta,
        numeric.get("epsilons", [0.5, 0.25, 0.125]),
        numeric.get("samples", 200),
        grid,
        cfg.get("seed", 0),
    )
    writer.write_csv(
        "wcnc.csv",
        ["epsilon", "n_samples", "hits", "estimate", "wilson_low", "wilson_high"],
        [
            [e.epsilon, e.n_samples, e.hits, e.estimate, e.wilson_low, e.wilson_high]
            for e in estimates
        ],
    )
    return {
        "estimates": {format(e.epsilon, "g"): e.estimate for e in estimates},
    }


_RUNNERS = {
    "simulate": run_simulate,
    "bounds": run_bounds,
    "geodesic": run_geodesic,
    "optimize": run_optimize,
    "sweep": run_sweep,
    "wcnc": run_wcnc,
}


def execute(cfg: dict, out_dir: str | None = None) -> dict:
    """Validate and run a config; returns the run record (also written to
    ``run_record.json`` in the output directory)."""
    cfgmod.require_valid(cfg)
    out_dir = out_dir or cfg.get("output_dir")
    if not out_dir:
        raise ConfigError("no output directory (config.output_dir or --out)")
    writer = ArtifactWriter(out_dir)
    start = time.monotonic()
    summary = _RUNNERS[cfg["command"]](cfg, writer)
    record = {
        "command": cfg["command"],
        "config": cfg,
        "artifacts": writer.files,
        "summary": summary,
        "wall_clock_seconds": time.monotonic() - start,
        "version": __version__,
    }
    writer.write_json("run_record.json", record)
    return record
