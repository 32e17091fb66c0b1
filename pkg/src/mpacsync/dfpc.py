"""Linear average-consensus baseline with a Metropolis-Hastings mixing matrix.

Each round every node replaces its (frequency, phase) by a weighted average
of its own and its neighbours' observed values, i.e. the observed state
vector is multiplied by a doubly-stochastic matrix with the sparsity of
the graph.  Metropolis-Hastings weights need only the two endpoint degrees,
so every node can build its row locally.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import NetworkTopology

__all__ = ["MixingMatrix", "metropolis_weights", "dfpc_step", "slem"]


@dataclass(frozen=True)
class MixingMatrix:
    entries: np.ndarray
    topology: NetworkTopology

    @property
    def n_nodes(self) -> int:
        return self.entries.shape[0]

    def is_doubly_stochastic(self, tol: float = 1e-12) -> bool:
        w = self.entries
        return bool(
            np.all(np.abs(w.sum(axis=0) - 1.0) <= tol)
            and np.all(np.abs(w.sum(axis=1) - 1.0) <= tol)
        )

    def respects_topology(self) -> bool:
        """True when every non-zero off-diagonal entry sits on an edge."""
        mask = np.eye(self.n_nodes, dtype=bool)
        for m, n in self.topology.edges:
            mask[m, n] = mask[n, m] = True
        return bool(np.all(self.entries[~mask] == 0.0))


def metropolis_weights(topology: NetworkTopology) -> MixingMatrix:
    """``W[m, n] = 1 / (1 + max(d_m, d_n))`` on edges, self-weight fills the row."""
    n = topology.n_nodes
    deg = topology.degrees
    w = np.zeros((n, n))
    for a, b in topology.edges:
        w[a, b] = w[b, a] = 1.0 / (1.0 + max(deg[a], deg[b]))
    w[np.diag_indices(n)] = 1.0 - w.sum(axis=1)
    w.setflags(write=False)
    return MixingMatrix(w, topology)


def dfpc_step(freqs_obs, phases_obs, mix: MixingMatrix) -> tuple[np.ndarray, np.ndarray]:
    """One mixing round applied to observed frequencies and phases."""
    f = np.asarray(freqs_obs, dtype=float)
    t = np.asarray(phases_obs, dtype=float)
    n = mix.n_nodes
    if f.shape != (n,) or t.shape != (n,):
        raise ValueError(
            f"expected vectors of length {n}, got shapes {f.shape} and {t.shape}"
        )
    return mix.entries @ f, mix.entries @ t


def slem(mix: MixingMatrix) -> float:
    """Second-largest eigenvalue modulus of a symmetric mixing matrix.

    Disagreement of noiseless iterates shrinks at least this fast per round.
    """
    ev = np.linalg.eigvalsh(mix.entries)  # ascending; ev[-1] == 1
    return float(np.max(np.abs(ev[:-1]))) if len(ev) > 1 else 0.0
