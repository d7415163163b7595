"""Noise metrics: left-invariant diagonal metrics weighing control directions.

A noise metric assigns a positive weight ``l_j`` to each frame direction; the
instantaneous envelope of coupled noise is ``sqrt(sum_j l_j h_j(t)^2)`` where
``h_j`` are the lab-frame coefficients of the control Hamiltonian.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .controls import ControlHamiltonian
from .su_algebra import PauliFrame


@dataclass(frozen=True)
class NoiseMetric:
    frame: PauliFrame
    diag: np.ndarray  # positive weights l_j, one per frame direction

    def __post_init__(self):
        diag = np.asarray(self.diag, dtype=float)
        if diag.shape != (self.frame.size,):
            raise ValueError(
                f"metric diag has shape {diag.shape}, frame needs ({self.frame.size},)"
            )
        if np.any(diag <= 0):
            raise ValueError("metric weights must be strictly positive "
                             "(the sub-Riemannian limit is out of scope)")
        object.__setattr__(self, "diag", diag)


def metric_norm(metric: NoiseMetric, h: np.ndarray) -> float:
    """sqrt(sum_j l_j h_j^2) for a single coefficient vector."""
    h = np.asarray(h, dtype=float)
    if h.shape != (metric.frame.size,):
        raise ValueError(f"coefficient vector has shape {h.shape}, "
                         f"expected ({metric.frame.size},)")
    return float(np.sqrt(np.sum(metric.diag * h * h)))


def coefficient_speeds(metric: NoiseMetric, coeffs: np.ndarray) -> np.ndarray:
    """Metric norms of a stack of coefficient vectors, shape (npoints, m) -> (npoints,)."""
    coeffs = np.asarray(coeffs, dtype=float)
    return np.sqrt(np.sum(metric.diag[None, :] * coeffs * coeffs, axis=1))


def control_envelope(metric: NoiseMetric, ctrl: ControlHamiltonian, ts: np.ndarray) -> np.ndarray:
    """sqrt(g(H0(t), H0(t))) sampled at the given times (drift included)."""
    if ctrl.frame.dim != metric.frame.dim or ctrl.frame.size != metric.frame.size:
        raise ValueError("control frame does not match metric frame")
    h = ctrl.frame_coefficients(ts)  # (m, len(ts))
    return np.sqrt(np.sum(metric.diag[:, None] * h * h, axis=0))


def path_length(ctrl: ControlHamiltonian, metric: NoiseMetric, grid: np.ndarray) -> float:
    """Trapezoidal ``int_0^T sqrt(g(H0(t), H0(t))) dt`` along the control path."""
    grid = np.asarray(grid, dtype=float)
    return float(np.trapezoid(control_envelope(metric, ctrl, grid), grid))


def path_length_from_coefficients(
    coeffs: np.ndarray, metric: NoiseMetric, grid: np.ndarray
) -> float:
    """Trapezoidal metric length for coefficients sampled on the grid
    (shape (len(grid), m))."""
    grid = np.asarray(grid, dtype=float)
    return float(np.trapezoid(coefficient_speeds(metric, coeffs), grid))
