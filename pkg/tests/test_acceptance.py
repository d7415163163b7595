"""Acceptance suite: one test per headline criterion, each printing a
PASS/FAIL line (run with ``pytest tests/test_acceptance.py -v -s``).

Tolerances are fixed here, not tuned at runtime; stochastic criteria use
frozen seeds and the sample sizes quoted in the criterion.
"""

import json

import numpy as np
import pytest

import rodeqc as r
from rodeqc.metrics import coefficient_speeds
from rodeqc.su_algebra import SIGMA_X, SIGMA_Y

from conftest import random_su2

MATERN = r.MaternConfig(nu=0.6, length_scale=0.2, amplitude=1.0)
ANISO_DIAG = np.array([1.0, 0.01, 0.01])


def report(name: str, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


@pytest.fixture(scope="module")
def frame():
    return r.pauli_frame(1)


@pytest.fixture(scope="module")
def drift_ctrl(frame):
    return r.zero_control(frame, 1.0, drift=0.5 * SIGMA_Y)


@pytest.fixture(scope="module")
def matern_ensemble(frame, drift_ctrl):
    """100 squashed-Matern paths (nu=0.6, K=1, T=1) on the 400-step grid."""
    grid = r.uniform_grid(1.0, 400)
    spec = r.NoiseModelSpec(kind="squashed-matern", matern=MATERN, bound=1.0)
    noises = [
        r.build_noise_trajectory(spec, drift_ctrl, None, 1.0, grid, 1000 + i)
        for i in range(100)
    ]
    return grid, noises


def test_unitarity_and_integrator_order(frame, drift_ctrl):
    # unitarity defect < 1e-10 everywhere on a noisy propagation
    grid = r.uniform_grid(1.0, 400)
    spec = r.NoiseModelSpec(kind="squashed-matern", matern=MATERN, bound=1.0)
    noise = r.build_noise_trajectory(spec, drift_ctrl, None, 1.0, grid, 7)
    traj = r.propagate(drift_ctrl, noise=noise)
    defect = max(
        np.linalg.norm(U.conj().T @ U - np.eye(2)) for U in traj.values
    )
    # step-halving order on H0 = cos(t) sigma_y against exp(-i sin(T) sy)
    zc = r.zero_control(frame, 1.0)
    errs = []
    for steps in (100, 200, 400):
        g = r.uniform_grid(1.0, steps)
        vals = np.array([np.cos(t) * SIGMA_Y for t in g])
        nt = r.NoiseTrajectory(g, vals, 1.5 * np.ones(len(g)), None)
        tr = r.propagate(zc, noise=nt)
        errs.append(np.linalg.norm(tr.values[-1] - r.expm_skew(SIGMA_Y, np.sin(1.0))))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    ok = defect < 1e-10 and np.all(orders >= 1.9)
    report(
        "unitarity & integrator order",
        ok,
        f"max defect {defect:.2e}, observed orders {np.round(orders, 3)}",
    )


def test_thm_linear_bound_monte_carlo(drift_ctrl, matern_ensemble):
    # operator-norm error never exceeds K t + 1e-4 on 100 paths
    grid, noises = matern_ensemble
    violations = 0
    worst = -np.inf
    u0 = r.propagate(drift_ctrl, grid=grid)
    for noise in noises:
        us = r.propagate(drift_ctrl, noise=noise)
        errs = np.array(
            [np.linalg.norm(d, ord=2) for d in us.values - u0.values]
        )
        slack = errs - (1.0 * grid + 1e-4)
        violations += int(np.sum(slack > 0))
        worst = max(worst, float(slack.max()))
    report(
        "linear error bound (Monte Carlo, 100 paths)",
        violations == 0,
        f"{violations} violations, worst slack {worst:.2e}",
    )


def test_geometric_bound_chain(drift_ctrl, matern_ensemble):
    # op <= fro <= d_F <= int ||H_I||_F <= int envelope, pointwise
    grid, noises = matern_ensemble
    reportobj = r.bound_chain(drift_ctrl, noises, K=1.0)
    nviol = reportobj.violations(1e-4)
    report(
        "geometric bound chain (100 paths)",
        nviol == 0,
        f"{nviol} pointwise violations at slack 1e-4",
    )


def test_worst_case_tightness(frame, drift_ctrl):
    grid = r.uniform_grid(1.0, 400)
    cfg0 = r.WorstCaseConfig(frame.basis[2], 0.0, 1.0)
    gap0 = r.tightness_gap(drift_ctrl, r.construct_worst_case(drift_ctrl, cfg0, grid))
    ok = abs(gap0[-1]) < 1e-6
    detail = f"eps=0 gap {gap0[-1]:.2e}"
    for eps in (1e-1, 1e-2, 1e-3):
        cfg = r.WorstCaseConfig(frame.basis[2], eps, 1.0)
        noise = r.construct_worst_case(drift_ctrl, cfg, grid, seed=5)
        gap = r.tightness_gap(drift_ctrl, noise)[-1]
        ok = ok and gap <= 10 * eps
        detail += f"; eps={eps:g} gap {gap:.2e} (<= {10 * eps:g})"
    report("worst-case construction tightness", ok, detail)


def test_decorrelation_slope(drift_ctrl):
    # block amplitude K=0.5 frozen from the pilot run: at K=1 the O(delta)
    # mean-shift term dominates the sqrt(delta) Monte Carlo term and the
    # slope leaves the window, so the sqrt regime is probed at K=0.5
    grid = r.uniform_grid(1.0, 400)
    res = r.decorrelation_study(0.5, [0.2, 0.05, 0.0125], drift_ctrl, 500, grid, 11)
    ok = 0.3 <= res.slope <= 0.7
    monotone = bool(np.all(np.diff(res.deviations) < 0))
    report(
        "decorrelation of centered block noise",
        ok and monotone,
        f"slope {res.slope:.3f} in [0.3, 0.7], deviations {np.round(res.deviations, 5)}",
    )


def test_mixed_state_bitflip(frame):
    grid = r.uniform_grid(1.0, 100)
    spec = r.NoiseModelSpec(
        kind="mixed-unitary",
        branches=((0.3, (np.pi / 2) * SIGMA_X), (0.7, np.zeros((2, 2)))),
    )
    zc = r.zero_control(frame, 1.0)
    branches = r.noise_process.enumerate_mixed_unitary(spec, grid)
    psi0 = np.array([1.0, 0.0])
    states = [r.propagate(zc, noise=t).values[-1] @ psi0 for _, t in branches]
    rho = r.ensemble_density(states, [w for w, _ in branches])
    err_rho = np.max(np.abs(rho - np.diag([0.7, 0.3])))
    err_pur = abs(r.purity(rho) - 0.58)
    ok = err_rho < 1e-12 and err_pur < 1e-12
    report(
        "exact bit-flip mixture",
        ok,
        f"rho error {err_rho:.2e}, purity error {err_pur:.2e}",
    )


def _competitor_length(sol, metric, frame, rng, scale=0.25):
    grid = sol.trajectory.grid
    T = grid[-1]
    a, b = rng.normal(size=2)
    P = rng.normal(size=3)
    P /= np.linalg.norm(P)
    Pm = frame.assemble(P)
    s = scale * grid * (T - grid) * (a + b * grid)
    xc = np.array(
        [x @ r.expm_skew(Pm, sk) for x, sk in zip(sol.trajectory.values, s)]
    )
    dts = np.diff(grid)
    coeffs = np.array(
        [
            frame.coefficients(r.logm_su(xc[k + 1] @ xc[k].conj().T)) / dts[k]
            for k in range(len(grid) - 1)
        ]
    )
    return float(np.sum(coefficient_speeds(metric, coeffs) * dts))


def test_geodesics(frame):
    iso = r.NoiseMetric(frame, np.ones(3))
    aniso = r.NoiseMetric(frame, ANISO_DIAG)

    # (a) isotropic shooting on 20 random targets
    rng = np.random.default_rng(42)
    residuals = []
    first_sol = None
    for _ in range(20):
        V = random_su2(rng)
        sol = r.shoot_geodesic(iso, V, max_restarts=1, steps=400)
        residuals.append(sol.endpoint_residual)
        if first_sol is None:
            first_sol = sol
    ok_res = max(residuals) < 1e-6

    # (b) Euler-Arnold vs exponential chart on the anisotropic metric
    v0 = np.array([0.3, 0.8, -0.5])
    sol_ea = r.euler_arnold_flow(aniso, v0, 0.5, 2000)
    _, endpoint = r.chart_geodesic(aniso, v0, 0.5, steps=400)
    route_gap = r.frobenius_distance(sol_ea.endpoint(), endpoint)
    ok_routes = route_gap < 1e-4

    # (c) constant speed
    ok_speed = sol_ea.speed_drift < 1e-8

    # (d) competitor paths never shorter (isotropic + cheap-direction case)
    comp_rng = np.random.default_rng(0)
    margins = [
        _competitor_length(first_sol, iso, frame, comp_rng) - first_sol.length
        for _ in range(20)
    ]
    cheap = r.euler_arnold_flow(aniso, np.array([0.0, 0.9, 0.0]), 1.0, 400)
    margins += [
        _competitor_length(cheap, aniso, frame, comp_rng, scale=0.2) - cheap.length
        for _ in range(20)
    ]
    ok_min = min(margins) >= -1e-5

    ok = ok_res and ok_routes and ok_speed and ok_min
    report(
        "geodesics (shooting, cross-method, speed, minimality)",
        ok,
        f"max residual {max(residuals):.2e}, route gap {route_gap:.2e}, "
        f"speed drift {sol_ea.speed_drift:.2e}, min competitor margin "
        f"{min(margins):.2e}",
    )


@pytest.fixture(scope="module")
def control_problem(frame):
    return r.OptimizationProblem(
        target=np.array([[0, -1j], [-1j, 0]]),  # X gate in SU(2)
        frame=frame,
        drift=0.5 * SIGMA_Y,
        metric=r.NoiseMetric(frame, ANISO_DIAG),
        eta=1.0,
    )


def test_noise_aware_vs_blind(control_problem):
    # headline comparison: noise-aware optimization must cut the mean
    # operator-norm error by at least 1.5x, with aware below blind at
    # paired 95% confidence
    exp = r.experiment_noise_aware_vs_blind(
        control_problem,
        num_controls=100,
        n_samples=100,
        seed=0,
        opts=r.OptimizerOptions(max_iters=1200, restarts=1),
    )
    ok = exp.ratio >= 1.5 and exp.aware_not_worse(0.95)
    lo, hi = exp.paired_gap_interval()
    report(
        "noise-aware vs noise-blind control",
        ok,
        f"achieved ratio {exp.ratio:.2f} (>= 1.5), paired blind-aware gap "
        f"95% CI [{lo:.4f}, {hi:.4f}]",
    )


def test_snr_sweep(control_problem):
    etas = [0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0]
    points = r.snr_sweep(
        control_problem,
        etas,
        num_controls=40,
        n_samples=60,
        seed=1,
        opts=r.OptimizerOptions(max_iters=1000, restarts=0),
    )
    not_worse = []
    for pt in points:
        diffs = pt.aware_means - pt.blind_means
        if np.allclose(diffs, diffs[0] if len(diffs) else 0.0):
            not_worse.append(float(diffs.mean()) <= 1e-12)
        else:
            import scipy.stats

            bound = scipy.stats.t.ppf(0.95, len(diffs) - 1) * diffs.std(
                ddof=1
            ) / np.sqrt(len(diffs))
            not_worse.append(float(diffs.mean()) <= bound)
    aware_means = np.array([pt.aware_means.mean() for pt in points])
    fit = np.polyfit(etas, aware_means, 1)
    pred = np.polyval(fit, etas)
    ss_tot = np.sum((aware_means - aware_means.mean()) ** 2)
    r2 = 1.0 - np.sum((aware_means - pred) ** 2) / ss_tot
    ok = all(not_worse) and r2 >= 0.9
    report(
        "signal-to-noise sweep",
        ok,
        f"aware <= blind at {sum(not_worse)}/{len(etas)} etas, aware-mode "
        f"linear fit R^2 = {r2:.3f}",
    )


def test_cli_determinism(tmp_path):
    cfg = {
        "command": "simulate",
        "system": {"num_qubits": 1, "drift": {"pauli": "y", "scale": 0.5}},
        "noise": {"kind": "squashed-matern", "nu": 0.6, "length_scale": 0.2,
                  "amplitude": 1.0, "bound": 1.0},
        "problem": {"horizon": 1.0, "eta": 1.0},
        "numeric": {"steps_per_unit": 120, "samples": 6},
        "seed": 99,
    }
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    from rodeqc.cli import main

    assert main(["simulate", "--config", str(cfg_path), "--out", str(tmp_path / "r1")]) == 0
    assert main(["simulate", "--config", str(cfg_path), "--out", str(tmp_path / "r2")]) == 0
    rec1 = json.loads((tmp_path / "r1" / "run_record.json").read_text())
    rec2 = json.loads((tmp_path / "r2" / "run_record.json").read_text())
    sums1 = {a["path"]: a["sha256"] for a in rec1["artifacts"]}
    sums2 = {a["path"]: a["sha256"] for a in rec2["artifacts"]}
    ok = sums1 == sums2 and len(sums1) == 4
    report(
        "CLI determinism",
        ok,
        f"{len(sums1)} artifacts byte-identical across repeated runs",
    )
