"""Error bounds for noisy unitary propagation and their tightness.

Covers the linear bound ``||U_S(t) - U0(t)|| <= K t``, the geometric
refinement ``d_F(U_I(t), 1) <= int ||H_{1,I}||_F <= int Lambda``, the
deterministic worst-case construction that saturates it, tube-probability
estimation for the worst-case noise condition, and the decorrelation study
showing that short-correlation centered noise self-cancels.

Essential suprema are throughout estimated by sample maxima with the sample
count reported; no extreme-value extrapolation is attempted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .controls import ControlHamiltonian
from .errors import BranchCutError
from .integrator import (
    interaction_transform,
    propagate,
    propagate_interaction,
    _propagate_midpoints,
)
from .metrics import NoiseMetric
from .noise_process import NoiseModelSpec, NoiseTrajectory, build_noise_trajectory
from .su_algebra import frobenius_norm, logm_su, operator_norm


def linear_bound(K: float, t) -> np.ndarray | float:
    """Worst-case error bound K*t for noise of norm at most K."""
    if K < 0:
        raise ValueError(f"K must be nonnegative, got {K}")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be nonnegative")
    out = K * t
    return float(out) if out.ndim == 0 else out


def running_integral(values, grid) -> np.ndarray:
    """Cumulative trapezoidal integral aligned with the grid (first entry 0)."""
    values = np.asarray(values, dtype=float)
    grid = np.asarray(grid, dtype=float)
    if values.shape != grid.shape:
        raise ValueError("integrand and grid shapes differ")
    increments = 0.5 * (values[:-1] + values[1:]) * np.diff(grid)
    return np.concatenate([[0.0], np.cumsum(increments)])


def geometric_bound(values, grid) -> np.ndarray:
    """Running ``int_0^t`` of a nonnegative integrand (envelope or pathwise
    ||H1(s)||_F samples) on the grid."""
    values = np.asarray(values, dtype=float)
    if np.any(values < 0):
        raise ValueError("geometric bound integrand must be nonnegative")
    return running_integral(values, grid)


@dataclass(frozen=True)
class WorstCaseConfig:
    """Adversarial-noise parameters: a unit-Frobenius direction, the WCNC
    tolerance epsilon, and the envelope sampled on (or callable over) the
    grid."""

    direction: np.ndarray
    epsilon: float
    envelope: object  # array over the grid, scalar, or callable t -> Lambda(t)

    def __post_init__(self):
        direction = np.asarray(self.direction, dtype=complex)
        if abs(np.linalg.norm(direction) - 1.0) > 1e-10:
            raise ValueError("worst-case direction must have unit Frobenius norm")
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be nonnegative, got {self.epsilon}")
        object.__setattr__(self, "direction", direction)

    def envelope_on(self, grid: np.ndarray) -> np.ndarray:
        if callable(self.envelope):
            lam = np.array([float(self.envelope(t)) for t in grid])
        else:
            lam = np.broadcast_to(np.asarray(self.envelope, dtype=float), grid.shape)
        if np.any(lam < 0):
            raise ValueError("envelope must be nonnegative")
        return np.array(lam, dtype=float)


def construct_worst_case(
    ctrl: ControlHamiltonian, cfg: WorstCaseConfig, grid, seed: int = 0
) -> NoiseTrajectory:
    """Deterministic noise saturating the geometric bound.

    ``H_{1,S}(t) = U0(t) (Lambda(t) D) U0(t)^dag`` plus, for epsilon > 0, a
    seeded random Hermitian disturbance of norm ``epsilon * Lambda(t)``
    resampled per grid point.  Its interaction picture is exactly
    ``Lambda(t) D`` when epsilon = 0.
    """
    grid = np.asarray(grid, dtype=float)
    lam = cfg.envelope_on(grid)
    u0 = propagate(ctrl, grid=grid)
    centered = np.einsum(
        "kia,ab,kjb->kij", u0.values, cfg.direction, u0.values.conj()
    )
    values = lam[:, None, None] * centered
    envelope = lam.copy()
    if cfg.epsilon > 0:
        rng = np.random.default_rng(seed)
        m = ctrl.frame.size
        coeffs = rng.standard_normal((len(grid), m))
        norms = np.linalg.norm(coeffs, axis=1)
        norms[norms == 0.0] = 1.0
        coeffs /= norms[:, None]
        disturb = np.einsum("ka,aij->kij", coeffs, ctrl.frame.basis)
        values = values + (cfg.epsilon * lam)[:, None, None] * disturb
        envelope = (1.0 + cfg.epsilon) * lam
    return NoiseTrajectory(grid, values, envelope, seed)


def tightness_gap(ctrl: ControlHamiltonian, noise: NoiseTrajectory) -> np.ndarray:
    """Per-time gap ``int_0^t Lambda - d_F(U_I(t), 1)`` (>= 0 up to
    integration error).

    Raises :class:`BranchCutError` once the accumulated interaction rotation
    reaches the cut at d_F = pi*sqrt(2); shorten the horizon or split the
    path multiplicatively in that case.
    """
    u0 = propagate(ctrl, grid=noise.grid)
    h1i = interaction_transform(u0, noise)
    ui = propagate_interaction(h1i)
    int_lam = running_integral(noise.envelope, noise.grid)
    # beyond 0.9 pi sqrt(2) of accumulated envelope the principal log can
    # wrap silently between grid points, so the check refuses outright
    cut = 0.9 * np.pi * np.sqrt(2.0)
    if int_lam[-1] >= cut:
        k = int(np.argmax(int_lam >= cut))
        raise BranchCutError(
            f"accumulated envelope reaches {int_lam[-1]:.3f} >= {cut:.3f} "
            f"(first at t={noise.grid[k]}); shorten the horizon or split the "
            "path multiplicatively"
        )
    gaps = np.empty(len(noise.grid))
    for k, U in enumerate(ui.values):
        gaps[k] = int_lam[k] - frobenius_norm(logm_su(U))
    return gaps


@dataclass(frozen=True)
class TubeEstimate:
    epsilon: float
    n_samples: int
    hits: int
    estimate: float
    wilson_low: float
    wilson_high: float


def _wilson_interval(hits: int, n: int, z: float = 1.959963984540054) -> tuple[float, float]:
    if n == 0:
        return 0.0, 1.0
    p = hits / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * np.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    lo = 0.0 if hits == 0 else max(0.0, center - half)
    hi = 1.0 if hits == n else min(1.0, center + half)
    return lo, hi


def wcnc_tube_probability(
    spec: NoiseModelSpec,
    ctrl: ControlHamiltonian,
    metric: NoiseMetric | None,
    eta: float,
    epsilons,
    n_samples: int,
    grid,
    seed: int,
) -> list[TubeEstimate]:
    """Estimate P[noise stays in the worst-case tube] for each epsilon.

    A sample is inside the epsilon-tube when, at every positive grid time,
    its amplitude deficit ``Lambda(t) - ||H1(t)||_F`` stays below epsilon and
    its interaction-picture direction stays within Frobenius distance epsilon
    of the direction at the first noisy grid point.  t = 0 carries the
    deterministic initial condition of the pre-squash process and is
    excluded; grid points where both amplitude and envelope vanish are
    vacuous.  All epsilons are evaluated on a common set of sample paths so
    the estimates are monotone by construction.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    epsilons = [float(e) for e in np.atleast_1d(epsilons)]
    if any(e <= 0 for e in epsilons):
        raise ValueError("epsilons must be positive")
    grid = np.asarray(grid, dtype=float)
    u0 = propagate(ctrl, grid=grid)
    tiny = 1e-12

    amp_deficits = np.empty(n_samples)
    dir_drifts = np.empty(n_samples)
    for i in range(n_samples):
        traj = build_noise_trajectory(spec, ctrl, metric, eta, grid, seed + i)
        h1i = interaction_transform(u0, traj)
        amps = h1i.amplitudes()
        lam = h1i.envelope
        active = slice(1, None)
        amp_deficits[i] = np.max(lam[active] - amps[active], initial=0.0)
        noisy = np.where(amps > tiny)[0]
        noisy = noisy[noisy >= 1]
        if len(noisy) == 0:
            # no direction to track; violation only if the envelope says
            # there should have been noise
            dir_drifts[i] = 0.0 if np.all(lam[active] <= tiny) else np.inf
            continue
        ref = h1i.values[noisy[0]] / amps[noisy[0]]
        dirs = h1i.values[noisy] / amps[noisy][:, None, None]
        dir_drifts[i] = np.max(np.linalg.norm(dirs - ref[None], axis=(1, 2)))
        if np.any((amps[active] <= tiny) & (lam[active] > tiny)):
            dir_drifts[i] = np.inf

    out = []
    for eps in epsilons:
        hits = int(np.sum((amp_deficits < eps) & (dir_drifts < eps)))
        lo, hi = _wilson_interval(hits, n_samples)
        out.append(TubeEstimate(eps, n_samples, hits, hits / n_samples, lo, hi))
    return out


@dataclass(frozen=True)
class DecorrelationResult:
    deltas: np.ndarray
    deviations: np.ndarray  # ||mean_N U_S(T) - U0(T)||_F per delta
    n_samples: int
    amplitude: float
    slope: float  # log-log fit of deviation against delta


def decorrelation_study(
    amplitude: float,
    deltas,
    ctrl: ControlHamiltonian,
    n_samples: int,
    grid,
    seed: int,
) -> DecorrelationResult:
    """Mean-propagator deviation under block-wise independent centered noise.

    For each block size delta the noise is constant on ``[i delta, (i+1)
    delta)`` with an independent uniformly random direction of Frobenius norm
    ``amplitude``; the reported deviation is ``||mean(U_S(T)) - U0(T)||_F``.
    Shrinking delta decorrelates the noise and the deviation decays.
    """
    grid = np.asarray(grid, dtype=float)
    deltas = np.asarray(sorted(deltas, reverse=True), dtype=float)
    T = grid[-1]
    dts = np.diff(grid)
    if np.max(np.abs(dts - dts[0])) > 1e-12:
        raise ValueError("decorrelation study requires a uniform grid")
    dt = dts[0]
    for d in deltas:
        if abs(d / dt - round(d / dt)) > 1e-9 or abs(T / d - round(T / d)) > 1e-9:
            raise ValueError(
                f"block size {d} must divide the horizon and be a multiple "
                f"of the grid step {dt}"
            )

    u0 = propagate(ctrl, grid=grid)
    tmids = 0.5 * (grid[:-1] + grid[1:])
    u = ctrl.control_coefficients(tmids)
    ctrl_mids = ctrl.drift[None, :, :] + np.einsum("jk,jab->kab", u, ctrl.frame.basis)
    m = ctrl.frame.size

    deviations = np.empty(len(deltas))
    for di, delta in enumerate(deltas):
        block_of = np.floor(tmids / delta).astype(int)
        n_blocks = int(round(T / delta))
        block_of = np.clip(block_of, 0, n_blocks - 1)
        acc = np.zeros((ctrl.frame.dim, ctrl.frame.dim), dtype=complex)
        for i in range(n_samples):
            rng = np.random.default_rng(seed + i)
            coeffs = rng.standard_normal((n_blocks, m))
            coeffs *= amplitude / np.linalg.norm(coeffs, axis=1)[:, None]
            blocks = np.einsum("ba,aij->bij", coeffs, ctrl.frame.basis)
            mids = ctrl_mids + blocks[block_of]
            acc += _propagate_midpoints(grid, mids)[-1]
        deviations[di] = np.linalg.norm(acc / n_samples - u0.values[-1])

    if len(deltas) >= 2 and np.all(deviations > 0):
        slope = fit_loglog_slope(deltas, deviations)
    else:
        slope = float("nan")
    return DecorrelationResult(deltas, deviations, n_samples, amplitude, slope)


def fit_loglog_slope(xs, ys) -> float:
    """Least-squares slope of log(y) against log(x)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValueError("log-log fit requires positive data")
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


@dataclass(frozen=True)
class BoundChainReport:
    """Pointwise maxima of every link in the inequality chain
    ``||.||_op <= ||.||_F <= d_F <= int ||H_{1,I}||_F <= int Lambda <= K t``.
    """

    grid: np.ndarray
    max_err_op: np.ndarray
    max_err_fro: np.ndarray
    max_dist: np.ndarray
    max_int_h1i: np.ndarray
    int_envelope: np.ndarray
    linear: np.ndarray
    n_samples: int

    def violations(self, slack: float = 1e-4) -> int:
        """Number of grid points where any adjacent link is violated."""
        chains = [
            self.max_err_op,
            self.max_err_fro,
            self.max_dist,
            self.max_int_h1i,
            self.int_envelope,
            self.linear,
        ]
        count = 0
        for lo, hi in zip(chains[:-1], chains[1:]):
            count += int(np.sum(lo > hi + slack))
        return count


def bound_chain(
    ctrl: ControlHamiltonian, noises: list[NoiseTrajectory], K: float
) -> BoundChainReport:
    """Evaluate the full error-bound chain on an ensemble of noise paths.

    The chain compares, per sample and per time, the realized Schrodinger
    error against the interaction-picture distance, the pathwise integral,
    the envelope integral and the linear bound; maxima over the ensemble are
    reported.
    """
    if not noises:
        raise ValueError("bound_chain requires at least one noise path")
    grid = noises[0].grid
    u0 = propagate(ctrl, grid=grid)
    npts = len(grid)
    ns = len(noises)

    err_op = np.empty((ns, npts))
    err_fro = np.empty((ns, npts))
    dists = np.empty((ns, npts))
    int_h1i = np.empty((ns, npts))
    for i, noise in enumerate(noises):
        us = propagate(ctrl, noise=noise)
        diff = us.values - u0.values
        err_fro[i] = np.linalg.norm(diff, axis=(1, 2))
        err_op[i] = [operator_norm(d) for d in diff]
        h1i = interaction_transform(u0, noise)
        ui = propagate_interaction(h1i)
        dists[i] = [frobenius_norm(logm_su(U)) for U in ui.values]
        int_h1i[i] = running_integral(h1i.amplitudes(), grid)

    return BoundChainReport(
        grid=grid,
        max_err_op=err_op.max(axis=0),
        max_err_fro=err_fro.max(axis=0),
        max_dist=dists.max(axis=0),
        max_int_h1i=int_h1i.max(axis=0),
        int_envelope=running_integral(noises[0].envelope, grid),
        linear=linear_bound(K, grid),
        n_samples=ns,
    )
