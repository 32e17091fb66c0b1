"""Oscillator state, noise magnitudes and stochastic transitions.

Each node carries a local oscillator whose frequency random-walks with the
Allan deviation over one update interval ``T`` and whose phase picks up the
drift-induced ramp ``-pi*T*df`` plus white jitter.  Observations of another
node's frequency/phase are corrupted by estimation errors whose standard
deviations are the Cramer-Rao bounds for a single tone observed over
``L = T*f_s`` samples.

Two flavours of the same transitions live here:

* per-node, pure functions over :class:`OscillatorState` values
  (:func:`evolve`, :func:`observe`), and
* :class:`OscillatorBank`, a vectorised array of N oscillators used by the
  Monte Carlo harness.  The bank stores frequencies as *detuning* from a
  reference (normally the carrier) so that sub-picohertz disagreement is not
  lost to the 1e9 Hz magnitude of the carrier.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "SimulationParams",
    "NoiseModel",
    "OscillatorState",
    "OscillatorBank",
    "build_noise_model",
    "init_states",
    "init_bank",
    "apply_drift",
    "evolve",
    "observe",
    "NOISE_CHANNELS",
]

TWO_PI = 2.0 * math.pi

# Column order of the per-iteration standard-normal draws consumed by the bank.
NOISE_CHANNELS = ("drift", "jitter", "freq_meas", "phase_meas")


@dataclass(frozen=True)
class SimulationParams:
    """Radio and oscillator parameters.

    Defaults are the 1 GHz / 10 MHz / 0.1 ms operating point with
    beta1 = beta2 = 5e-19 and an integrated phase-noise power of -53.46 dB.
    ``snr`` is a linear power ratio.
    """

    carrier_freq: float = 1e9
    sample_rate: float = 1e7
    update_interval: float = 1e-4
    snr: float = 1.0
    beta1: float = 5e-19
    beta2: float = 5e-19
    jitter_power_db: float = -53.46
    init_freq_rel_sd: float = 1e-4
    crlb_freq_scaled_by_fs: bool = True

    def __post_init__(self):
        for name in ("carrier_freq", "sample_rate", "update_interval", "snr"):
            v = getattr(self, name)
            if not v > 0:
                raise ValueError(f"{name} must be positive, got {v!r}")
        if self.n_samples < 1:
            raise ValueError(
                f"update_interval * sample_rate must be >= 1, got {self.n_samples!r}"
            )
        if self.beta1 < 0 or self.beta2 < 0 or self.init_freq_rel_sd < 0:
            raise ValueError("beta1, beta2 and init_freq_rel_sd must be non-negative")

    @property
    def n_samples(self) -> float:
        """Samples per observation window, ``L = T * f_s``."""
        return self.update_interval * self.sample_rate

    @property
    def snr_db(self) -> float:
        return 10.0 * math.log10(self.snr)

    def with_snr_db(self, snr_db: float) -> "SimulationParams":
        return replace(self, snr=10.0 ** (snr_db / 10.0))


@dataclass(frozen=True)
class NoiseModel:
    """Standard deviations of the four noise channels.

    sigma_f, sigma_f_meas in Hz; sigma_theta, sigma_theta_meas in radians.
    """

    sigma_f: float
    sigma_theta: float
    sigma_f_meas: float
    sigma_theta_meas: float

    def __post_init__(self):
        for name in ("sigma_f", "sigma_theta", "sigma_f_meas", "sigma_theta_meas"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {v!r}")

    @classmethod
    def zero(cls) -> "NoiseModel":
        return cls(0.0, 0.0, 0.0, 0.0)

    def as_array(self) -> np.ndarray:
        """Sds in :data:`NOISE_CHANNELS` order."""
        return np.array(
            [self.sigma_f, self.sigma_theta, self.sigma_f_meas, self.sigma_theta_meas]
        )


def build_noise_model(params: SimulationParams) -> NoiseModel:
    """Evaluate drift (ADEV), jitter and the two estimation CRLBs.

    The frequency CRLB is a normalised (cycles/sample) quantity; it is
    converted to Hz by multiplying with ``f_s`` unless
    ``params.crlb_freq_scaled_by_fs`` is false.
    """
    fc, T, L, snr = params.carrier_freq, params.update_interval, params.n_samples, params.snr
    with np.errstate(all="ignore"):
        sigma_f = fc * math.sqrt(params.beta1 / T + params.beta2 * T)
        sigma_theta = math.sqrt(2.0 * 10.0 ** (params.jitter_power_db / 10.0))
        sigma_theta_meas = 2.0 / (L * snr)
        sigma_f_meas = math.sqrt(6.0 / (TWO_PI**2 * L**3 * snr))
    if params.crlb_freq_scaled_by_fs:
        sigma_f_meas *= params.sample_rate
    vals = (sigma_f, sigma_theta, sigma_f_meas, sigma_theta_meas)
    if not all(math.isfinite(v) for v in vals):
        raise ValueError(f"degenerate parameters give non-finite noise levels {vals}")
    return NoiseModel(*vals)


@dataclass(frozen=True)
class OscillatorState:
    """One node's true and observed (frequency, phase) plus the noise drawn last."""

    freq_true: float
    phase_true: float
    freq_obs: float
    phase_obs: float
    last_drift: float = 0.0
    last_jitter: float = 0.0
    last_freq_meas_err: float = 0.0
    last_phase_meas_err: float = 0.0


def init_states(
    params: SimulationParams, n_nodes: int, rng: np.random.Generator
) -> list[OscillatorState]:
    """Draw initial frequencies ~ N(f_c, (rel_sd*f_c)^2) and phases ~ U(0, 2pi).

    Observations start equal to the truth.
    """
    if n_nodes < 2:
        raise ValueError("need at least two nodes")
    sd = params.init_freq_rel_sd * params.carrier_freq
    out = []
    for _ in range(n_nodes):
        f = params.carrier_freq + sd * rng.standard_normal()
        th = TWO_PI * rng.random()
        out.append(OscillatorState(f, th, f, th))
    return out


def apply_drift(
    state: OscillatorState, drift: float, jitter: float, update_interval: float
) -> OscillatorState:
    """Advance one interval with a given frequency drift and phase jitter."""
    return replace(
        state,
        freq_true=state.freq_true + drift,
        phase_true=state.phase_true - math.pi * update_interval * drift + jitter,
        last_drift=drift,
        last_jitter=jitter,
    )


def evolve(
    state: OscillatorState,
    noise: NoiseModel,
    params: SimulationParams,
    rng: np.random.Generator,
) -> OscillatorState:
    drift = noise.sigma_f * rng.standard_normal()
    jitter = noise.sigma_theta * rng.standard_normal()
    return apply_drift(state, drift, jitter, params.update_interval)


def observe(
    state: OscillatorState, noise: NoiseModel, rng: np.random.Generator
) -> OscillatorState:
    """Re-observe the oscillator with fresh estimation errors."""
    ef = noise.sigma_f_meas * rng.standard_normal()
    et = noise.sigma_theta_meas * rng.standard_normal()
    return replace(
        state,
        freq_obs=state.freq_true + ef,
        phase_obs=state.phase_true + et,
        last_freq_meas_err=ef,
        last_phase_meas_err=et,
    )


@dataclass
class OscillatorBank:
    """Vectorised state of N oscillators.

    All ``freq_*`` arrays are detuning in Hz relative to ``reference``;
    absolute frequency is ``reference + freq_true``.  Arrays are replaced,
    never written in place, by :meth:`evolve`, :meth:`observe` and
    :meth:`steer`.
    """

    reference: float
    freq_true: np.ndarray
    phase_true: np.ndarray
    freq_obs: np.ndarray
    phase_obs: np.ndarray
    last_drift: np.ndarray
    last_jitter: np.ndarray
    last_freq_meas_err: np.ndarray
    last_phase_meas_err: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.freq_true)

    def evolve(self, noise: NoiseModel, update_interval: float, z_drift, z_jitter):
        """Apply one interval of drift/jitter from standard-normal draws."""
        drift = noise.sigma_f * np.asarray(z_drift, dtype=float)
        jitter = noise.sigma_theta * np.asarray(z_jitter, dtype=float)
        self.freq_true = self.freq_true + drift
        self.phase_true = self.phase_true - math.pi * update_interval * drift + jitter
        self.last_drift = drift
        self.last_jitter = jitter

    def observe(self, noise: NoiseModel, z_freq, z_phase):
        ef = noise.sigma_f_meas * np.asarray(z_freq, dtype=float)
        et = noise.sigma_theta_meas * np.asarray(z_phase, dtype=float)
        self.freq_obs = self.freq_true + ef
        self.phase_obs = self.phase_true + et
        self.last_freq_meas_err = ef
        self.last_phase_meas_err = et

    def steer(self, freqs, phases):
        """Retune every oscillator to the given (detuning, phase) values."""
        self.freq_true = np.array(freqs, dtype=float)
        self.phase_true = np.array(phases, dtype=float)

    def node(self, n: int) -> OscillatorState:
        """Absolute-frequency snapshot of node ``n``."""
        return OscillatorState(
            self.reference + self.freq_true[n],
            float(self.phase_true[n]),
            self.reference + self.freq_obs[n],
            float(self.phase_obs[n]),
            float(self.last_drift[n]),
            float(self.last_jitter[n]),
            float(self.last_freq_meas_err[n]),
            float(self.last_phase_meas_err[n]),
        )


def init_bank(params: SimulationParams, z_freq, u_phase) -> OscillatorBank:
    """Bank referenced to the carrier from standard-normal / unit-uniform draws."""
    sd = params.init_freq_rel_sd * params.carrier_freq
    f = sd * np.asarray(z_freq, dtype=float)
    th = TWO_PI * np.asarray(u_phase, dtype=float)
    zeros = np.zeros_like(f)
    return OscillatorBank(
        params.carrier_freq, f, th, f.copy(), th.copy(), zeros, zeros, zeros, zeros
    )
