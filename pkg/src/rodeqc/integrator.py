"""Pathwise unitary propagation of dU/dt = -i (H0(t) + H1(t, w)) U.

The stepper is the midpoint-exponential (order-2 Magnus) rule
``U_{k+1} = exp(-i H(t_k + dt/2) dt) U_k``: each factor is exactly unitary,
so trajectories never leave SU(n) regardless of step size.  Noise values are
interpolated linearly between grid points, which makes the midpoint value
the average of the two endpoint values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .controls import ControlHamiltonian
from .noise_process import NoiseTrajectory
from .su_algebra import expm_skew, operator_norm

FLAVORS = ("noiseless", "schrodinger", "interaction")


@dataclass(frozen=True)
class UnitaryTrajectory:
    grid: np.ndarray
    values: np.ndarray  # (len(grid), n, n)
    flavor: str

    def __post_init__(self):
        if self.flavor not in FLAVORS:
            raise ValueError(f"unknown flavor {self.flavor!r}")

    def validate(self) -> None:
        n = self.values.shape[1]
        if np.max(np.abs(self.values[0] - np.eye(n))) > 1e-12:
            raise ValueError("trajectory does not start at the identity")
        eye = np.eye(n)
        for k, U in enumerate(self.values):
            defect = np.linalg.norm(U.conj().T @ U - eye)
            if defect >= 1e-10:
                raise ValueError(
                    f"unitarity defect {defect:.3e} at t={self.grid[k]}"
                )

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def endpoint(self) -> np.ndarray:
        return self.values[-1]


def uniform_grid(horizon: float, steps_per_unit: int = 400) -> np.ndarray:
    """Default propagation grid: uniform with ceil(T * steps_per_unit) steps."""
    if horizon <= 0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    steps = max(1, int(np.ceil(horizon * steps_per_unit)))
    return np.linspace(0.0, horizon, steps + 1)


def _propagate_midpoints(grid: np.ndarray, mids: np.ndarray) -> np.ndarray:
    """Midpoint-exponential products for precomputed midpoint Hamiltonians."""
    npts = len(grid)
    n = mids.shape[1]
    dts = np.diff(grid)
    out = np.empty((npts, n, n), dtype=complex)
    out[0] = np.eye(n)
    if n == 2:
        # Closed-form SU(2) steps composed with scalar arithmetic; the
        # (phase, a, b) parametrization keeps each factor exactly unitary.
        ax = mids[:, 0, 1].real
        ay = -mids[:, 0, 1].imag
        az = 0.5 * (mids[:, 0, 0].real - mids[:, 1, 1].real)
        c0 = 0.5 * (mids[:, 0, 0].real + mids[:, 1, 1].real)
        r = np.sqrt(ax * ax + ay * ay + az * az)
        theta = r * dts
        safe_r = np.where(r > 0.0, r, 1.0)
        s = np.where(r > 0.0, np.sin(theta) / safe_r, dts)
        a_steps = (np.cos(theta) - 1j * az * s).tolist()
        b_steps = (-(ay + 1j * ax) * s).tolist()
        phases = np.concatenate([[0.0], np.cumsum(-c0 * dts)])
        a_cur, b_cur = 1.0 + 0.0j, 0.0j
        avals = [a_cur]
        bvals = [b_cur]
        for k in range(npts - 1):
            a_s, b_s = a_steps[k], b_steps[k]
            a_cur, b_cur = (
                a_s * a_cur - b_s * b_cur.conjugate(),
                a_s * b_cur + b_s * a_cur.conjugate(),
            )
            if (k + 1) % 1024 == 0:
                norm = abs(a_cur) ** 2 + abs(b_cur) ** 2
                a_cur /= norm**0.5
                b_cur /= norm**0.5
            avals.append(a_cur)
            bvals.append(b_cur)
        a = np.array(avals) * np.exp(1j * phases)
        b = np.array(bvals) * np.exp(1j * phases)
        out[:, 0, 0] = a
        out[:, 0, 1] = b
        out[:, 1, 0] = -np.conj(b) * np.exp(2j * phases)
        out[:, 1, 1] = np.conj(a) * np.exp(2j * phases)
        return out
    U = np.eye(n, dtype=complex)
    for k in range(npts - 1):
        U = expm_skew(mids[k], dts[k]) @ U
        out[k + 1] = U
    return out


def propagate(
    ctrl: ControlHamiltonian,
    noise: NoiseTrajectory | None = None,
    grid: np.ndarray | None = None,
    flavor: str | None = None,
) -> UnitaryTrajectory:
    """Propagate the (noisy) Schrodinger equation along the grid.

    When ``noise`` is given its grid must equal the propagation grid;
    the returned flavor is ``noiseless`` without noise and ``schrodinger``
    with it.
    """
    if grid is None:
        grid = noise.grid if noise is not None else uniform_grid(ctrl.horizon)
    grid = np.asarray(grid, dtype=float)
    if grid[0] != 0.0:
        raise ValueError("propagation grid must start at t=0")
    if noise is not None and not np.array_equal(noise.grid, grid):
        raise ValueError("noise grid does not match propagation grid")

    tmids = 0.5 * (grid[:-1] + grid[1:])
    u = ctrl.control_coefficients(tmids)  # (m, M)
    mids = ctrl.drift[None, :, :] + np.einsum("jk,jab->kab", u, ctrl.frame.basis)
    if noise is not None:
        mids = mids + 0.5 * (noise.values[:-1] + noise.values[1:])
    values = _propagate_midpoints(grid, mids)
    if flavor is None:
        flavor = "noiseless" if noise is None else "schrodinger"
    return UnitaryTrajectory(grid, values, flavor)


def propagate_interaction(noise: NoiseTrajectory) -> UnitaryTrajectory:
    """Integrate dU_I/dt = -i H_{1,I}(t) U_I directly from an
    interaction-picture noise trajectory."""
    mids = 0.5 * (noise.values[:-1] + noise.values[1:])
    values = _propagate_midpoints(noise.grid, mids)
    return UnitaryTrajectory(noise.grid, values, "interaction")


def interaction_transform(u0: UnitaryTrajectory, noise: NoiseTrajectory) -> NoiseTrajectory:
    """Conjugate the noise into the frame co-rotating with the noiseless
    propagator: H_{1,I}(t) = U0(t)^dag H_{1,S}(t) U0(t)."""
    if u0.flavor != "noiseless":
        raise ValueError(f"interaction transform needs the noiseless trajectory, "
                         f"got flavor {u0.flavor!r}")
    if not np.array_equal(u0.grid, noise.grid):
        raise ValueError("trajectory grids do not match")
    vals = np.einsum("kai,kab,kbj->kij", u0.values.conj(), noise.values, u0.values)
    return NoiseTrajectory(noise.grid, vals, noise.envelope.copy(), noise.seed)


def schrodinger_to_interaction(
    u0: UnitaryTrajectory, us: UnitaryTrajectory
) -> UnitaryTrajectory:
    """U_I(t) = U0(t)^dag U_S(t)."""
    if not np.array_equal(u0.grid, us.grid):
        raise ValueError("trajectory grids do not match")
    vals = np.einsum("kai,kaj->kij", u0.values.conj(), us.values)
    return UnitaryTrajectory(us.grid, vals, "interaction")


def apply_to_state(traj: UnitaryTrajectory, psi0: np.ndarray) -> np.ndarray:
    """State path |psi(t_k)> = U(t_k) |psi0>, shape (len(grid), n)."""
    psi0 = np.asarray(psi0, dtype=complex)
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-10:
        raise ValueError("initial state must be normalized")
    return np.einsum("kij,j->ki", traj.values, psi0)


def ensemble_density(states, weights=None) -> np.ndarray:
    """Ensemble density matrix sum_i w_i |psi_i><psi_i| (uniform w_i by
    default)."""
    states = [np.asarray(s, dtype=complex) for s in states]
    if len(states) == 0:
        raise ValueError("ensemble_density requires at least one state")
    for s in states:
        if abs(np.linalg.norm(s) - 1.0) > 1e-10:
            raise ValueError("all states must be unit vectors")
    if weights is None:
        weights = np.full(len(states), 1.0 / len(states))
    else:
        weights = np.asarray(weights, dtype=float)
        if abs(weights.sum() - 1.0) > 1e-10 or np.any(weights < 0):
            raise ValueError("weights must be nonnegative and sum to 1")
    rho = sum(w * np.outer(s, s.conj()) for w, s in zip(weights, states))
    return rho


def purity(rho: np.ndarray) -> float:
    """Tr(rho^2); below 1 for genuinely mixed states."""
    return float(np.trace(rho @ rho).real)


def require_density(rho: np.ndarray) -> np.ndarray:
    """Validate Hermiticity, unit trace, and positivity of a density matrix."""
    rho = np.asarray(rho, dtype=complex)
    if np.max(np.abs(rho - rho.conj().T)) > 1e-12:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > 1e-10:
        raise ValueError("density matrix trace differs from 1")
    if np.min(np.linalg.eigvalsh(rho)) < -1e-10:
        raise ValueError("density matrix has a negative eigenvalue")
    return rho


@dataclass(frozen=True)
class ErrorStats:
    """Per-time ensemble deviation from the noiseless propagator.

    The maximum is the sample estimate of the essential supremum; the number
    of samples is attached because no extrapolation beyond the sample is
    attempted.
    """

    grid: np.ndarray
    max: np.ndarray
    mean: np.ndarray
    q05: np.ndarray
    q95: np.ndarray
    norm: str
    n_samples: int


def error_process(
    ensemble, u0: UnitaryTrajectory, norm: str = "operator"
) -> ErrorStats:
    """Statistics of ||U_S(t, w) - U0(t)|| across an ensemble of trajectories."""
    if norm not in ("operator", "frobenius"):
        raise ValueError(f"norm must be 'operator' or 'frobenius', got {norm!r}")
    ensemble = list(ensemble)
    if not ensemble:
        raise ValueError("error_process requires a nonempty ensemble")
    for traj in ensemble:
        if not np.array_equal(traj.grid, u0.grid):
            raise ValueError("ensemble grids do not match the reference grid")
    errs = np.empty((len(ensemble), len(u0.grid)))
    for i, traj in enumerate(ensemble):
        diff = traj.values - u0.values
        if norm == "frobenius":
            errs[i] = np.linalg.norm(diff, axis=(1, 2))
        else:
            errs[i] = [operator_norm(d) for d in diff]
    return ErrorStats(
        grid=u0.grid,
        max=errs.max(axis=0),
        mean=errs.mean(axis=0),
        q05=np.quantile(errs, 0.05, axis=0),
        q95=np.quantile(errs, 0.95, axis=0),
        norm=norm,
        n_samples=len(ensemble),
    )
