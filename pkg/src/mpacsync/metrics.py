"""Phase-error statistics and the convergence test.

Two disagreement signals are used:

* the *state* reading, sigma of ``2*pi*f_n*T + theta_n`` over the nodes'
  current (frequency, phase) -- the phase each node reaches at the end of a
  common interval.  This drives the stopping rule.
* the *components* reading, sigma of the per-node total phase error built
  from the noise drawn in the current interval (:func:`total_phase_error`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "PhaseErrorReport",
    "total_phase_error",
    "interval_phase",
    "sigma_phi",
    "check_convergence",
    "deg2rad",
    "rad2deg",
    "COHERENT_GAIN_ETA_DEG",
    "DEFAULT_ETA_DEG",
]

# Spread below which at least 90% of ideal coherent gain survives.
COHERENT_GAIN_ETA_DEG = 18.0
DEFAULT_ETA_DEG = 1.0


def deg2rad(x):
    return np.deg2rad(x)


def rad2deg(x):
    return np.rad2deg(x)


def total_phase_error(drift, freq_meas_err, jitter, phase_meas_err, update_interval):
    """Five-term total phase error of a node over one interval (radians).

    ``2*pi*df*T + 2*pi*ef*T - pi*T*df + dtheta + etheta``.  Works on scalars
    or per-node arrays.
    """
    T = update_interval
    ramp = -math.pi * T * np.asarray(drift)
    return (
        2 * math.pi * np.asarray(drift) * T
        + 2 * math.pi * np.asarray(freq_meas_err) * T
        + ramp
        + np.asarray(jitter)
        + np.asarray(phase_meas_err)
    )


def interval_phase(freqs, phases, update_interval):
    """Phase reached at the end of the interval, ``2*pi*f*T + theta``.

    Frequencies may be absolute or detuned; the common offset cancels in
    :func:`sigma_phi`.
    """
    return 2 * math.pi * np.asarray(freqs, dtype=float) * update_interval + np.asarray(
        phases, dtype=float
    )


def sigma_phi(values) -> float:
    """Sample standard deviation (``N - 1`` denominator) across nodes."""
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or len(v) < 2:
        raise ValueError("need a 1-D array of at least two values")
    return float(np.std(v, ddof=1))


@dataclass(frozen=True)
class PhaseErrorReport:
    per_node_total_phase: np.ndarray
    sigma_phi: float
    mean_phase: float
    converged: bool
    eta: float

    @property
    def sigma_phi_deg(self) -> float:
        return float(np.rad2deg(self.sigma_phi))

    @property
    def eta_deg(self) -> float:
        return float(np.rad2deg(self.eta))


def check_convergence(values, eta: float) -> PhaseErrorReport:
    """Compare the spread of ``values`` (radians) against ``eta`` (radians)."""
    v = np.asarray(values, dtype=float)
    s = sigma_phi(v)
    return PhaseErrorReport(v, s, float(v.mean()), s <= eta, float(eta))
