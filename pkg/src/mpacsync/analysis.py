"""Closed-form fixed point of MPAC and residual-error predictions.

MPAC minimises ``sum_n w_n (x_n - z_n)^2 + gamma * sum_{(m,n)} (x_m - x_n)^2``
whose unique minimiser is ``x* = (gamma*L + W)^{-1} W z``.  For large gamma
that system is nearly singular along the all-ones direction, so the solve
is split: the weighted mean of ``z`` is taken exactly, and only the small
correction ``u`` in ``(L + W/gamma) u = (W/gamma)(z - zbar)`` goes through a
Cholesky factorisation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .oscillator import NoiseModel, SimulationParams

__all__ = [
    "ConsensusProblem",
    "closed_form_consensus",
    "weighted_mean_limit",
    "objective",
    "offset_error_variance",
    "accumulated_error_prediction",
]


@dataclass(frozen=True)
class ConsensusProblem:
    laplacian: np.ndarray
    weight_diag: np.ndarray
    gamma: float
    targets: np.ndarray
    offset_error_var: float = 0.0

    def __post_init__(self):
        L = np.asarray(self.laplacian, dtype=float)
        w = np.asarray(self.weight_diag, dtype=float)
        z = np.asarray(self.targets, dtype=float)
        n = len(w)
        if L.shape != (n, n) or z.shape != (n,):
            raise ValueError("laplacian, weights and targets disagree in size")
        if not np.allclose(L, L.T, atol=0):
            raise ValueError("laplacian must be symmetric")
        if np.any(np.abs(L.sum(axis=1)) > 1e-9 * max(1.0, np.abs(L).max())):
            raise ValueError("laplacian rows must sum to zero")
        if np.any(w <= 0):
            raise ValueError("weights must be positive")
        if not (self.gamma > 0 and math.isfinite(self.gamma)):
            raise ValueError("gamma must be finite and positive")
        if self.offset_error_var < 0:
            raise ValueError("offset_error_var must be non-negative")
        object.__setattr__(self, "laplacian", L)
        object.__setattr__(self, "weight_diag", w)
        object.__setattr__(self, "targets", z)

    @property
    def n_nodes(self) -> int:
        return len(self.weight_diag)


def weighted_mean_limit(weights, targets) -> float:
    """``sum w z / sum w`` -- the gamma -> infinity consensus value."""
    w = np.asarray(weights, dtype=float)
    z = np.asarray(targets, dtype=float)
    if np.any(w <= 0):
        raise ValueError("weights must be positive")
    return float(np.dot(w, z) / w.sum())


def closed_form_consensus(problem: ConsensusProblem) -> np.ndarray:
    """Minimiser of the penalised least-squares consensus objective.

    Raises ``numpy.linalg.LinAlgError`` when ``L + W/gamma`` is not positive
    definite to working precision.
    """
    w = problem.weight_diag
    z = problem.targets
    zbar = weighted_mean_limit(w, z)
    a = problem.laplacian + np.diag(w / problem.gamma)
    rhs = (w / problem.gamma) * (z - zbar)
    c, low = scipy.linalg.cho_factor(a, check_finite=True)
    u = scipy.linalg.cho_solve((c, low), rhs)
    return zbar + u


def objective(problem: ConsensusProblem, x) -> float:
    x = np.asarray(x, dtype=float)
    fit = np.dot(problem.weight_diag, (x - problem.targets) ** 2)
    # x^T L x == sum over edges of (x_m - x_n)^2
    smooth = float(x @ problem.laplacian @ x)
    return float(fit + problem.gamma * smooth)


def offset_error_variance(noise: NoiseModel, params: SimulationParams, channel: str) -> float:
    """Per-interval variance of the observed-value increment.

    ``channel='freq'``: drift plus frequency estimation error.
    ``channel='phase'``: drift-induced ramp, estimation error and jitter.
    """
    if channel == "freq":
        return noise.sigma_f**2 + noise.sigma_f_meas**2
    if channel == "phase":
        ramp = math.pi * params.update_interval * noise.sigma_f
        return ramp**2 + noise.sigma_theta_meas**2 + noise.sigma_theta**2
    raise ValueError(f"channel must be 'freq' or 'phase', got {channel!r}")


def accumulated_error_prediction(problem: ConsensusProblem, n_intervals: int) -> float:
    """Variance of the consensus offset after ``n_intervals`` of accumulated errors.

    Uses the large-gamma limit where the consensus is the weighted mean of
    the targets: ``I * sigma_e^2 * sum(w^2) / sum(w)^2``, which is
    ``I * sigma_e^2 / N`` for unit weights.
    """
    if n_intervals < 1:
        raise ValueError("n_intervals must be positive")
    w = problem.weight_diag
    return float(n_intervals * problem.offset_error_var * np.sum(w**2) / np.sum(w) ** 2)
