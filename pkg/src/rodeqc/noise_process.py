"""Bounded Hermitian noise sample paths.

Supported models:

* ``squashed-matern`` -- per-direction Matern Gaussian processes squashed
  coordinate-wise through ``(2/pi) arctan`` and assembled in the frame.
* ``squashed-wiener`` -- same squash applied to per-direction scaled random
  walks (Markov pre-squash process).
* ``mixed-unitary`` -- a random choice among finitely many deterministic
  Hamiltonian branches (bit flips and friends).
* ``zero`` -- the noiseless trajectory.

Every generated trajectory satisfies ``||H1(t_k)||_F <= envelope[k]`` at all
grid points, and is a pure function of ``(spec, grid, seed)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bessel import kv
from .controls import ControlHamiltonian
from .errors import NumericError
from .metrics import NoiseMetric, control_envelope
from .su_algebra import require_hermitian

NOISE_KINDS = ("squashed-matern", "squashed-wiener", "mixed-unitary", "zero")


@dataclass(frozen=True)
class MaternConfig:
    """Matern covariance hyperparameters: smoothness nu, length scale (time
    units) and marginal standard deviation."""

    nu: float
    length_scale: float
    amplitude: float = 1.0

    def __post_init__(self):
        if self.nu <= 0:
            raise ValueError(f"nu must be positive, got {self.nu}")
        if self.length_scale <= 0:
            raise ValueError(f"length_scale must be positive, got {self.length_scale}")
        if self.amplitude < 0:
            raise ValueError(f"amplitude must be nonnegative, got {self.amplitude}")


@dataclass(frozen=True)
class NoiseModelSpec:
    """Declarative description of a noise model.

    ``bound`` is the Frobenius bound E of the raw (uncoupled) process;
    ``branches`` holds (probability, Hamiltonian) pairs for the
    mixed-unitary kind, where each Hamiltonian is either a constant matrix
    or a per-grid-point stack; ``coupled`` requests the control-coupled
    envelope ``eta * sqrt(g(H0(t), H0(t)))``; ``envelope_prefactor`` rescales
    the envelope (default 1; set 1/(2 pi) to reproduce the literal recipe
    from the one-qubit experiments).
    """

    kind: str
    matern: MaternConfig | None = None
    bound: float = 1.0
    branches: tuple = ()
    coupled: bool = False
    envelope_prefactor: float = 1.0

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}, expected {NOISE_KINDS}")
        if self.bound < 0:
            raise ValueError(f"bound must be nonnegative, got {self.bound}")
        if self.kind == "squashed-matern" and self.matern is None:
            raise ValueError("squashed-matern requires a MaternConfig")
        if self.kind == "mixed-unitary":
            probs = np.array([p for p, _ in self.branches], dtype=float)
            if len(probs) == 0:
                raise ValueError("mixed-unitary requires at least one branch")
            if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-12:
                raise ValueError(
                    f"branch probabilities must be nonnegative and sum to 1, got {probs}"
                )


@dataclass(frozen=True)
class NoiseTrajectory:
    """Time-gridded Hermitian noise path with its envelope.

    ``values[k]`` is the noise Hamiltonian at ``grid[k]``; ``envelope[k]``
    bounds its Frobenius norm.
    """

    grid: np.ndarray
    values: np.ndarray  # (len(grid), n, n)
    envelope: np.ndarray  # (len(grid),)
    seed: int | None = None
    branch_index: int | None = field(default=None, compare=False)

    def validate(self, tol: float = 1e-12) -> None:
        norms = self.amplitudes()
        excess = norms - self.envelope
        if np.max(excess) > tol:
            k = int(np.argmax(excess))
            raise ValueError(
                f"noise exceeds envelope at t={self.grid[k]}: "
                f"||H||={norms[k]:.6e} > {self.envelope[k]:.6e}"
            )
        for k in range(len(self.grid)):
            require_hermitian(self.values[k], name=f"H1(t={self.grid[k]})")

    def amplitudes(self) -> np.ndarray:
        """Frobenius norm of the noise at each grid point."""
        return np.linalg.norm(self.values, axis=(1, 2))

    @property
    def dim(self) -> int:
        return self.values.shape[1]


def matern_covariance(tau: float, cfg: MaternConfig) -> float:
    """Matern covariance at time lag tau:
    ``sigma^2 2^(1-nu)/Gamma(nu) (sqrt(2 nu) tau/l)^nu K_nu(sqrt(2 nu) tau/l)``.
    """
    if tau < 0:
        raise ValueError(f"tau must be nonnegative, got {tau}")
    var = cfg.amplitude**2
    if tau == 0.0:
        return var
    arg = math.sqrt(2.0 * cfg.nu) * tau / cfg.length_scale
    k = kv(cfg.nu, arg)
    if k == 0.0:  # exp(-arg) underflow: numerically decorrelated
        return 0.0
    return var * (2.0 ** (1.0 - cfg.nu) / math.gamma(cfg.nu)) * arg**cfg.nu * k


def _check_grid(grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 2 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be a strictly increasing 1-d array")
    return grid


_JITTER_LADDER = (1e-10, 1e-8, 1e-6)
_chol_cache: dict = {}


def _matern_cholesky(grid: np.ndarray, cfg: MaternConfig) -> np.ndarray:
    key = (grid.tobytes(), cfg.nu, cfg.length_scale, cfg.amplitude)
    hit = _chol_cache.get(key)
    if hit is not None:
        return hit
    taus = np.abs(grid[:, None] - grid[None, :])
    uniq, inverse = np.unique(np.round(taus, 12), return_inverse=True)
    vals = np.array([matern_covariance(t, cfg) for t in uniq])
    C = vals[inverse].reshape(taus.shape)
    var = cfg.amplitude**2
    for jitter in _JITTER_LADDER:
        try:
            L = np.linalg.cholesky(C + jitter * var * np.eye(len(grid)))
            if len(_chol_cache) > 64:
                _chol_cache.clear()
            _chol_cache[key] = L
            return L
        except np.linalg.LinAlgError:
            continue
    raise NumericError(
        f"Matern covariance not positive definite after jitter escalation "
        f"to {_JITTER_LADDER[-1]} * sigma^2 (nu={cfg.nu}, l={cfg.length_scale})"
    )


def sample_scalar_gp(grid, cfg: MaternConfig, seed: int) -> np.ndarray:
    """One zero-mean Gaussian path with Matern covariance on the grid.

    Deterministic in (grid, cfg, seed): repeated calls are bit-identical.
    """
    grid = _check_grid(grid)
    if cfg.amplitude == 0.0:
        return np.zeros(len(grid))
    L = _matern_cholesky(grid, cfg)
    z = np.random.default_rng(seed).standard_normal(len(grid))
    return L @ z


def sample_scalar_wiener(grid, sigma: float, seed: int) -> np.ndarray:
    """Scaled random walk on the grid: W(0)=0, independent N(0, sigma^2 dt)
    increments."""
    grid = _check_grid(grid)
    dts = np.diff(grid)
    z = np.random.default_rng(seed).standard_normal(len(dts))
    path = np.concatenate([[0.0], np.cumsum(sigma * np.sqrt(dts) * z)])
    return path


def squash_arctan(x, bound: float):
    """(2E/pi) arctan(x): odd, monotone, strictly inside (-E, E)."""
    if bound < 0:
        raise ValueError(f"bound must be nonnegative, got {bound}")
    return (2.0 * bound / math.pi) * np.arctan(x)


def build_noise_trajectory(
    spec: NoiseModelSpec,
    control: ControlHamiltonian,
    metric: NoiseMetric | None,
    eta: float,
    grid,
    seed: int,
) -> NoiseTrajectory:
    """Sample one noise trajectory for the given model.

    For the squashed kinds, each frame direction carries an independent
    scalar process squashed into [-1, 1]; the combination
    ``sum_j x_j(t) H_j / sqrt(m)`` has Frobenius norm at most 1 and is scaled
    by the envelope, which is ``eta * sqrt(g(H0(t), H0(t)))`` when coupled
    and ``eta * E`` otherwise (times ``envelope_prefactor``).
    """
    if eta < 0:
        raise ValueError(f"eta must be nonnegative, got {eta}")
    grid = _check_grid(grid)
    n = control.frame.dim
    npts = len(grid)

    if spec.kind == "mixed-unitary":
        return sample_mixed_unitary(spec, grid, seed)
    if spec.kind == "zero" or eta == 0.0:
        return NoiseTrajectory(
            grid, np.zeros((npts, n, n), dtype=complex), np.zeros(npts), seed
        )

    if spec.coupled:
        if metric is None:
            raise ValueError("coupled noise requires a NoiseMetric")
        envelope = eta * control_envelope(metric, control, grid)
    else:
        envelope = np.full(npts, eta * spec.bound)
    envelope = spec.envelope_prefactor * envelope

    m = control.frame.size
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((m, npts))
    if spec.kind == "squashed-matern":
        L = _matern_cholesky(grid, spec.matern)
        raw = z @ L.T  # row j = L @ z[j]
    else:  # squashed-wiener
        sigma = spec.matern.amplitude if spec.matern is not None else 1.0
        dts = np.sqrt(np.diff(grid))
        raw = np.zeros((m, npts))
        raw[:, 1:] = np.cumsum(sigma * dts[None, :] * z[:, 1:], axis=1)
    x = squash_arctan(raw, 1.0)  # coordinates in (-1, 1)

    combo = np.einsum("jk,jab->kab", x, control.frame.basis) / math.sqrt(m)
    values = envelope[:, None, None] * combo
    return NoiseTrajectory(grid, values, envelope, seed)


def _branch_values(hamiltonian, grid: np.ndarray) -> np.ndarray:
    H = np.asarray(hamiltonian, dtype=complex)
    if H.ndim == 2:
        require_hermitian(H, name="branch Hamiltonian")
        return np.broadcast_to(H, (len(grid),) + H.shape).copy()
    if H.ndim == 3:
        if H.shape[0] != len(grid):
            raise ValueError(
                f"branch path has {H.shape[0]} points, grid has {len(grid)}"
            )
        for k in range(H.shape[0]):
            require_hermitian(H[k], name=f"branch Hamiltonian at index {k}")
        return H
    raise ValueError("branch Hamiltonian must be a matrix or a stack of matrices")


def enumerate_mixed_unitary(
    spec: NoiseModelSpec, grid
) -> list[tuple[float, NoiseTrajectory]]:
    """All branches with their weights, for exact-mixture computations."""
    if spec.kind != "mixed-unitary":
        raise ValueError("enumerate_mixed_unitary requires kind='mixed-unitary'")
    grid = _check_grid(grid)
    stacks = [_branch_values(H, grid) for _, H in spec.branches]
    envelope = np.max(
        [np.linalg.norm(s, axis=(1, 2)) for s in stacks], axis=0
    )
    out = []
    for j, (p, _) in enumerate(spec.branches):
        out.append(
            (float(p), NoiseTrajectory(grid, stacks[j], envelope, None, branch_index=j))
        )
    return out


def sample_mixed_unitary(spec: NoiseModelSpec, grid, seed: int) -> NoiseTrajectory:
    """Draw one branch with its probability; the trajectory is that branch's
    deterministic Hamiltonian path."""
    branches = enumerate_mixed_unitary(spec, grid)
    u = np.random.default_rng(seed).random()
    acc = 0.0
    j = len(branches) - 1
    for idx, (p, _) in enumerate(branches):
        acc += p
        if u < acc:
            j = idx
            break
    _, traj = branches[j]
    return NoiseTrajectory(
        traj.grid, traj.values, traj.envelope, seed, branch_index=j
    )
