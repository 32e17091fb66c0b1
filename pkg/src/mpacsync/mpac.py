"""Message-passing average consensus (MPAC).

Every directed edge ``m -> n`` carries a message ``(mu_f, mu_theta, s)``:
the weighted average of node ``m``'s own observation and everything ``m``
heard in the previous round *except* what came from ``n``, together with
the total weight behind that average.  Weight sums pass through the
damping map ``f_gamma(x) = gamma*x / (gamma + x)`` before being sent, which
keeps them below ``gamma`` on graphs with cycles.

This is Gaussian belief propagation for the quadratic objective
``sum_n w_n (x_n - z_n)^2 + gamma * sum_{(m,n) in E} (x_m - x_n)^2``; on
trees it reaches the exact minimiser after ``diameter + 1`` rounds.

Rounds are synchronous: every node update and every outgoing message of
round ``k`` reads only round ``k-1`` messages and round ``k`` observations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import NetworkTopology, neighbors

__all__ = [
    "MpacConfig",
    "MpacMessage",
    "MpacState",
    "f_gamma",
    "init_mpac",
    "update_node",
    "compute_outgoing",
    "mpac_iteration",
]

DEFAULT_GAMMA = 1e12


def f_gamma(x, gamma: float):
    """Damping map ``gamma*x / (gamma + x)``; accepts scalars or arrays."""
    return gamma * x / (gamma + x)


@dataclass(frozen=True)
class MpacConfig:
    gamma: float
    node_weights: np.ndarray

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise ValueError(f"gamma must be finite and positive, got {self.gamma!r}")
        w = np.asarray(self.node_weights, dtype=float)
        if w.ndim != 1 or not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ValueError("node weights must be a 1-D array of positive finite values")
        w.setflags(write=False)
        object.__setattr__(self, "node_weights", w)

    @classmethod
    def uniform(cls, n_nodes: int, gamma: float = DEFAULT_GAMMA, weight: float = 1.0):
        return cls(gamma, np.full(n_nodes, float(weight)))

    @property
    def n_nodes(self) -> int:
        return len(self.node_weights)


@dataclass(frozen=True)
class MpacMessage:
    mu_f: float
    mu_theta: float
    scale: float


@dataclass(frozen=True)
class MpacState:
    """Messages on all directed edges plus the latest per-node consensus.

    Message arrays are indexed like ``topology.directed_edges``.
    """

    topology: NetworkTopology
    mu_f: np.ndarray
    mu_theta: np.ndarray
    scale: np.ndarray
    consensus_freq: np.ndarray
    consensus_phase: np.ndarray
    iteration: int = 0

    def message(self, src: int, dst: int) -> MpacMessage:
        """Message currently held on ``src -> dst``."""
        i = self.topology.directed_index[(src, dst)]
        return MpacMessage(float(self.mu_f[i]), float(self.mu_theta[i]), float(self.scale[i]))

    @property
    def inbox(self) -> dict[tuple[int, int], MpacMessage]:
        return {key: self.message(*key) for key in self.topology.directed_index}

    @property
    def n_messages(self) -> int:
        return len(self.scale)


def _check_config(topology: NetworkTopology, config: MpacConfig):
    if config.n_nodes != topology.n_nodes:
        raise ValueError(
            f"config has {config.n_nodes} weights for a {topology.n_nodes}-node topology"
        )


def init_mpac(topology: NetworkTopology, config: MpacConfig, f_c: float) -> MpacState:
    """Round-0 messages: ``(f_c, pi, f_gamma(w_m))`` on every edge ``m -> n``.

    Consensus values start at ``(f_c, pi)`` too.  Pass ``f_c=0`` when
    frequencies are expressed as detuning from the carrier.
    """
    _check_config(topology, config)
    src, _, _ = topology.directed_edges
    n_msg = len(src)
    n = topology.n_nodes
    return MpacState(
        topology=topology,
        mu_f=np.full(n_msg, float(f_c)),
        mu_theta=np.full(n_msg, math.pi),
        scale=f_gamma(config.node_weights[src], config.gamma),
        consensus_freq=np.full(n, float(f_c)),
        consensus_phase=np.full(n, math.pi),
        iteration=0,
    )


def update_node(
    node: int,
    observations: tuple[float, float],
    state: MpacState,
    config: MpacConfig,
) -> tuple[float, float]:
    """Combine a node's fresh observation with all incoming messages.

    Returns the node's new ``(frequency, phase)``: the weighted average of
    ``(f_obs, theta_obs)`` at weight ``w_n`` and each incoming ``mu`` at
    weight ``s_{m->n}``.
    """
    f_obs, th_obs = observations
    w = config.node_weights[node]
    num_f, num_t, den = w * f_obs, w * th_obs, w
    for m in neighbors(state.topology, node):
        msg = state.message(m, node)
        num_f += msg.scale * msg.mu_f
        num_t += msg.scale * msg.mu_theta
        den += msg.scale
    return float(num_f / den), float(num_t / den)


def compute_outgoing(
    node: int,
    recipient: int,
    observations: tuple[float, float],
    state: MpacState,
    config: MpacConfig,
) -> MpacMessage:
    """Message ``node -> recipient``: the exclusive weighted average.

    Same sums as :func:`update_node` but leaving out whatever ``recipient``
    sent; the outgoing scale is ``f_gamma`` of the exclusive weight sum.
    """
    nbrs = neighbors(state.topology, node)
    if recipient not in nbrs:
        raise ValueError(f"{recipient} is not a neighbour of {node}")
    f_obs, th_obs = observations
    w = config.node_weights[node]
    num_f, num_t, den = w * f_obs, w * th_obs, w
    for m in nbrs:
        if m == recipient:
            continue
        msg = state.message(m, node)
        num_f += msg.scale * msg.mu_f
        num_t += msg.scale * msg.mu_theta
        den += msg.scale
    return MpacMessage(float(num_f / den), float(num_t / den), float(f_gamma(den, config.gamma)))


def mpac_iteration(
    state: MpacState, freq_obs, phase_obs, config: MpacConfig
) -> MpacState:
    """One synchronous round over all nodes and all directed edges."""
    topo = state.topology
    n = topo.n_nodes
    freq_obs = np.asarray(freq_obs, dtype=float)
    phase_obs = np.asarray(phase_obs, dtype=float)
    if freq_obs.shape != (n,) or phase_obs.shape != (n,):
        raise ValueError(f"observations must have shape ({n},)")
    src, dst, rev = topo.directed_edges
    w = config.node_weights
    s, mf, mt = state.scale, state.mu_f, state.mu_theta

    s_in = np.bincount(dst, weights=s, minlength=n)
    pf_in = np.bincount(dst, weights=s * mf, minlength=n)
    pt_in = np.bincount(dst, weights=s * mt, minlength=n)

    wf = w * freq_obs
    wt = w * phase_obs
    s_node = w + s_in
    cons_f = (wf + pf_in) / s_node
    cons_t = (wt + pt_in) / s_node

    # Exclusive sums for src -> dst drop the message dst -> src.
    s_back = s[rev]
    den = s_node[src] - s_back
    new_mf = (wf[src] + pf_in[src] - s_back * mf[rev]) / den
    new_mt = (wt[src] + pt_in[src] - s_back * mt[rev]) / den
    new_s = f_gamma(den, config.gamma)

    return MpacState(
        topology=topo,
        mu_f=new_mf,
        mu_theta=new_mt,
        scale=new_s,
        consensus_freq=cons_f,
        consensus_phase=cons_t,
        iteration=state.iteration + 1,
    )
