"""Control Hamiltonians: drift plus polynomial frame coefficients.

A control is ``H0(t) = H_d + sum_j u_j(t) H_j`` with ``u_j`` real
polynomials in ``t`` over a fixed horizon; the ``H_j`` are an orthonormal
traceless Hermitian frame.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .su_algebra import PauliFrame, require_hermitian, traceless


@dataclass(frozen=True)
class ControlHamiltonian:
    frame: PauliFrame
    drift: np.ndarray
    coeff_polys: np.ndarray  # (frame.size, degree+1), u_j(t) = sum_k c[j,k] t^k
    horizon: float
    _drift_coeffs: np.ndarray = field(init=False, repr=False)
    _drift_trace: float = field(init=False, repr=False)

    def __post_init__(self):
        drift = require_hermitian(np.asarray(self.drift, dtype=complex), name="drift")
        if drift.shape[0] != self.frame.dim:
            raise ValueError(
                f"drift dim {drift.shape[0]} does not match frame dim {self.frame.dim}"
            )
        coeffs = np.atleast_2d(np.asarray(self.coeff_polys, dtype=float))
        if coeffs.shape[0] != self.frame.size:
            raise ValueError(
                f"coeff_polys has {coeffs.shape[0]} rows, frame needs {self.frame.size}"
            )
        if self.horizon <= 0:
            raise ValueError(f"horizon must be positive, got {self.horizon}")
        object.__setattr__(self, "drift", drift)
        object.__setattr__(self, "coeff_polys", coeffs)
        object.__setattr__(self, "_drift_coeffs", self.frame.coefficients(drift))
        object.__setattr__(
            self, "_drift_trace", float(np.trace(drift).real) / self.frame.dim
        )

    @property
    def degree(self) -> int:
        return self.coeff_polys.shape[1] - 1

    @property
    def drift_coefficients(self) -> np.ndarray:
        """Frame expansion of the traceless part of the drift."""
        return self._drift_coeffs

    @property
    def drift_trace_part(self) -> float:
        """Identity component Tr(H_d)/n (global phase only)."""
        return self._drift_trace

    def control_coefficients(self, ts) -> np.ndarray:
        """u_j evaluated at times ``ts``; shape (frame.size, len(ts))."""
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        powers = ts[None, :] ** np.arange(self.coeff_polys.shape[1])[:, None]
        return self.coeff_polys @ powers

    def frame_coefficients(self, ts) -> np.ndarray:
        """Full frame coefficients h_j(t) = u_j(t) + drift_j, shape (m, len(ts)).

        The identity component of the drift is excluded (it only contributes
        a global phase and carries no noise weight).
        """
        return self.control_coefficients(ts) + self._drift_coeffs[:, None]


def evaluate_control(ctrl: ControlHamiltonian, t: float) -> np.ndarray:
    """Hamiltonian matrix ``H_d + sum_j u_j(t) H_j`` at a single time."""
    if not (-1e-9 <= t <= ctrl.horizon + 1e-9):
        raise ValueError(f"t={t} outside control horizon [0, {ctrl.horizon}]")
    u = ctrl.control_coefficients(t)[:, 0]
    return ctrl.drift + ctrl.frame.assemble(u)


def zero_control(
    frame: PauliFrame, horizon: float, drift: np.ndarray | None = None, degree: int = 5
) -> ControlHamiltonian:
    """Control with all polynomial coefficients zero (drift optional)."""
    if drift is None:
        drift = np.zeros((frame.dim, frame.dim), dtype=complex)
    return ControlHamiltonian(
        frame, drift, np.zeros((frame.size, degree + 1)), horizon
    )


def sampled_frame_coefficients(hams: np.ndarray, frame: PauliFrame) -> np.ndarray:
    """Frame expansion of a stack of Hamiltonians; shape (npoints, frame.size)."""
    hams = np.asarray(hams, dtype=complex)
    return np.stack([frame.coefficients(traceless(H)) for H in hams])
