"""Decentralized frequency/phase synchronization by message-passing consensus.

Submodules: :mod:`graph` (random topologies), :mod:`oscillator` (noise and
state transitions), :mod:`mpac` (message-passing consensus), :mod:`dfpc`
(Metropolis linear-consensus baseline), :mod:`analysis` (closed-form fixed
point), :mod:`metrics` (sigma_phi and convergence) and :mod:`experiment`
(Monte Carlo harness).
"""
from . import analysis, dfpc, experiment, graph, metrics, mpac, oscillator
from .analysis import ConsensusProblem, closed_form_consensus, weighted_mean_limit
from .dfpc import MixingMatrix, dfpc_step, metropolis_weights
from .experiment import Cell, ExperimentConfig, parse_config, run_sweep, run_trial
from .graph import NetworkTopology, generate_random_topology, laplacian, neighbors
from .metrics import check_convergence, sigma_phi, total_phase_error
from .mpac import MpacConfig, f_gamma, init_mpac, mpac_iteration
from .oscillator import NoiseModel, SimulationParams, build_noise_model

__version__ = "0.1.0"
