"""Monte Carlo harness: trials, sweeps, config files and result files.

A *cell* is one (algorithm, N, c, SNR) combination.  Each trial in a cell
draws a fresh random topology and fresh oscillators, then iterates

1. every oscillator drifts over one interval,
2. every node re-observes its oscillator,
3. the consensus algorithm produces new per-node (frequency, phase),
4. oscillators are steered to those values,

until the state-reading sigma_phi first drops to ``eta`` (the convergence
iteration) and then for ``settle_iterations`` more, or until
``max_iterations``.  The sigma_phi left at the end is the trial's residual.

Seeding
-------
Streams come from :class:`numpy.random.SeedSequence` with
``entropy=seed`` and a spawn key ``(cell_key, trial, purpose[, node])``,
where ``cell_key`` is a hash of (N, c) only.  Cells that differ only in
algorithm or SNR therefore see the same topologies and the same
standard-normal noise draws, which makes comparisons paired, and adding
cells to a sweep never changes another cell's numbers.
"""
from __future__ import annotations

import configparser
import csv
import dataclasses
import hashlib
import itertools
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .dfpc import dfpc_step, metropolis_weights
from .graph import InfeasibleTopologyError, NetworkTopology, edge_budget, generate_random_topology, min_connectivity
from .metrics import interval_phase, sigma_phi, total_phase_error
from .mpac import MpacConfig, init_mpac, mpac_iteration
from .oscillator import NoiseModel, SimulationParams, build_noise_model, init_bank

__all__ = [
    "ALGORITHMS",
    "RESULT_COLUMNS",
    "TRACE_COLUMNS",
    "ConfigError",
    "ExperimentConfig",
    "Cell",
    "TrialRecord",
    "CellSummary",
    "SweepResult",
    "NodeNoiseStreams",
    "cell_key",
    "run_trial",
    "run_cell",
    "run_sweep",
    "summarize",
    "emit_results",
    "load_results",
    "write_trace",
    "parse_config",
]

ALGORITHMS = ("mpac", "dfpc")

RESULT_COLUMNS = (
    "algorithm",
    "n_nodes",
    "connectivity",
    "snr_db",
    "trials",
    "converged_count",
    "mean_convergence_iters",
    "sd_convergence_iters",
    "mean_final_sigma_phi_deg",
    "sd_final_sigma_phi_deg",
)

TRACE_COLUMNS = ("trial", "k", "sigma_phi_deg_state", "sigma_phi_deg_components")


class ConfigError(ValueError):
    """Bad configuration; ``key`` names the offending entry."""

    def __init__(self, key: str, reason: str):
        super().__init__(f"{key}: {reason}")
        self.key = key
        self.reason = reason


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce a sweep.

    Radio/oscillator fields mirror :class:`SimulationParams`; ``gamma`` and
    ``node_weight`` configure MPAC.  ``noiseless`` zeroes all four noise
    channels; ``steer_oscillators=False`` leaves oscillators free-running so
    that observations are not fed back.
    """

    n_nodes: tuple[int, ...] = (20,)
    connectivity: tuple[float, ...] = (0.2,)
    snr_db: tuple[float, ...] = (0.0,)
    algorithms: tuple[str, ...] = ALGORITHMS
    trials: int = 1000
    max_iterations: int = 500
    settle_iterations: int = 50
    eta_deg: float = 1.0
    seed: int = 0
    carrier_freq: float = 1e9
    sample_rate: float = 1e7
    update_interval: float = 1e-4
    beta1: float = 5e-19
    beta2: float = 5e-19
    jitter_power_db: float = -53.46
    init_freq_rel_sd: float = 1e-4
    crlb_freq_scaled_by_fs: bool = True
    gamma: float = 1e12
    node_weight: float = 1.0
    noiseless: bool = False
    steer_oscillators: bool = True

    def __post_init__(self):
        for name in ("n_nodes", "connectivity", "snr_db", "algorithms"):
            v = getattr(self, name)
            if isinstance(v, (str, int, float)):
                v = (v,)
            object.__setattr__(self, name, tuple(v))
        self.validate()

    def validate(self):
        if self.trials < 1:
            raise ConfigError("trials", f"must be >= 1, got {self.trials}")
        if self.max_iterations < 1:
            raise ConfigError("max_iterations", f"must be >= 1, got {self.max_iterations}")
        if self.settle_iterations < 0:
            raise ConfigError("settle_iterations", "must be >= 0")
        if not self.eta_deg > 0:
            raise ConfigError("eta_deg", f"must be positive, got {self.eta_deg}")
        if not (self.gamma > 0 and math.isfinite(self.gamma)):
            raise ConfigError("gamma", f"must be finite and positive, got {self.gamma}")
        if not self.node_weight > 0:
            raise ConfigError("node_weight", f"must be positive, got {self.node_weight}")
        for a in self.algorithms:
            if a not in ALGORITHMS:
                raise ConfigError("algorithms", f"unknown algorithm {a!r}; choose from {ALGORITHMS}")
        for n in self.n_nodes:
            if int(n) != n or n < 2:
                raise ConfigError("n_nodes", f"must be integers >= 2, got {n!r}")
        for c in self.connectivity:
            if not 0.0 <= c <= 1.0:
                raise ConfigError("connectivity", f"must lie in [0, 1], got {c!r}")
        for n in self.n_nodes:
            for c in self.connectivity:
                if edge_budget(n, c) < n - 1:
                    raise ConfigError(
                        "connectivity",
                        f"{c:g} is infeasible for n_nodes={n}: "
                        f"minimum connectivity is {min_connectivity(n):g}",
                    )
        try:
            self.sim_params(self.snr_db[0] if self.snr_db else 0.0)
        except ValueError as exc:
            raise ConfigError("simulation", str(exc)) from None

    @property
    def eta(self) -> float:
        return math.radians(self.eta_deg)

    def sim_params(self, snr_db: float) -> SimulationParams:
        return SimulationParams(
            carrier_freq=self.carrier_freq,
            sample_rate=self.sample_rate,
            update_interval=self.update_interval,
            snr=10.0 ** (snr_db / 10.0),
            beta1=self.beta1,
            beta2=self.beta2,
            jitter_power_db=self.jitter_power_db,
            init_freq_rel_sd=self.init_freq_rel_sd,
            crlb_freq_scaled_by_fs=self.crlb_freq_scaled_by_fs,
        )

    def noise_model(self, snr_db: float) -> NoiseModel:
        if self.noiseless:
            return NoiseModel.zero()
        return build_noise_model(self.sim_params(snr_db))

    def mpac_config(self, n_nodes: int) -> MpacConfig:
        return MpacConfig.uniform(n_nodes, self.gamma, self.node_weight)

    def cells(self) -> list["Cell"]:
        """Cartesian product of the sweep lists, algorithm varying fastest."""
        return [
            Cell(alg, int(n), float(c), float(s))
            for n, c, s, alg in itertools.product(
                self.n_nodes, self.connectivity, self.snr_db, self.algorithms
            )
        ]

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class Cell:
    algorithm: str
    n_nodes: int
    connectivity: float
    snr_db: float


@dataclass
class TrialRecord:
    trial: int
    algorithm: str
    n_nodes: int
    connectivity: float
    snr_db: float
    convergence_iteration: int | None
    iterations_run: int
    final_sigma_phi_deg: float
    final_sigma_phi_components_deg: float
    trace_state_deg: np.ndarray = field(repr=False)
    trace_components_deg: np.ndarray = field(repr=False)
    edges: tuple[tuple[int, int], ...] = field(default=(), repr=False)
    final_freq: np.ndarray | None = field(default=None, repr=False)
    final_phase: np.ndarray | None = field(default=None, repr=False)
    final_freq_obs: np.ndarray | None = field(default=None, repr=False)
    final_phase_obs: np.ndarray | None = field(default=None, repr=False)

    @property
    def converged(self) -> bool:
        return self.convergence_iteration is not None

    def to_dict(self) -> dict:
        d = {}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, np.ndarray):
                v = v.tolist()
            elif f.name == "edges":
                v = [list(e) for e in v]
            d[f.name] = v
        return d


def cell_key(n_nodes: int, connectivity: float) -> int:
    """Stable 32-bit key for the (N, c) part of a cell."""
    text = f"{int(n_nodes)}|{float(connectivity)!r}".encode()
    return int.from_bytes(hashlib.blake2b(text, digest_size=4).digest(), "little")


def _seed_sequence(master: int, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=master, spawn_key=tuple(int(k) for k in key))


_TOPOLOGY, _NODES = 0, 1


class NodeNoiseStreams:
    """Independent per-node random streams for one trial.

    Node ``n`` first draws its initial (standard-normal, unit-uniform) pair,
    then four standard normals per iteration in ``NOISE_CHANNELS`` order.
    Values are fetched in blocks; block size does not change the sequence.
    """

    def __init__(self, master: int, key: int, trial: int, n_nodes: int, block: int = 32):
        self._gens = [
            np.random.Generator(np.random.PCG64(_seed_sequence(master, key, trial, _NODES, n)))
            for n in range(n_nodes)
        ]
        self._block = block
        self._buf = np.empty((0, n_nodes, 4))
        self._pos = 0

    def initial(self) -> tuple[np.ndarray, np.ndarray]:
        z = np.array([g.standard_normal() for g in self._gens])
        u = np.array([g.random() for g in self._gens])
        return z, u

    def next(self) -> np.ndarray:
        """Standard normals of shape ``(N, 4)`` for the next iteration."""
        if self._pos >= len(self._buf):
            self._buf = np.stack(
                [g.standard_normal((self._block, 4)) for g in self._gens], axis=1
            )
            self._pos = 0
        out = self._buf[self._pos]
        self._pos += 1
        return out


def trial_topology(config: ExperimentConfig, cell: Cell, trial: int) -> NetworkTopology:
    key = cell_key(cell.n_nodes, cell.connectivity)
    rng = np.random.Generator(np.random.PCG64(_seed_sequence(config.seed, key, trial, _TOPOLOGY)))
    return generate_random_topology(cell.n_nodes, cell.connectivity, rng)


def run_trial(
    config: ExperimentConfig,
    cell: Cell,
    trial: int,
    *,
    keep_final_state: bool = False,
) -> TrialRecord:
    """Run one seeded trial of one cell."""
    if cell.algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {cell.algorithm!r}")
    topo = trial_topology(config, cell, trial)
    params = config.sim_params(cell.snr_db)
    noise = config.noise_model(cell.snr_db)
    T = params.update_interval
    eta = config.eta

    streams = NodeNoiseStreams(config.seed, cell_key(cell.n_nodes, cell.connectivity), trial, cell.n_nodes)
    bank = init_bank(params, *streams.initial())

    if cell.algorithm == "mpac":
        mcfg = config.mpac_config(cell.n_nodes)
        state = init_mpac(topo, mcfg, f_c=0.0)  # detuned frame: carrier is 0 Hz
    else:
        mix = metropolis_weights(topo)

    trace_state: list[float] = []
    trace_comp: list[float] = []
    conv = None
    stop_at = config.max_iterations
    k = 0
    for k in range(1, config.max_iterations + 1):
        z = streams.next()
        bank.evolve(noise, T, z[:, 0], z[:, 1])
        bank.observe(noise, z[:, 2], z[:, 3])
        if cell.algorithm == "mpac":
            state = mpac_iteration(state, bank.freq_obs, bank.phase_obs, mcfg)
            f, th = state.consensus_freq, state.consensus_phase
        else:
            f, th = dfpc_step(bank.freq_obs, bank.phase_obs, mix)
        if config.steer_oscillators:
            bank.steer(f, th)
        s_state = sigma_phi(interval_phase(f, th, T))
        s_comp = sigma_phi(
            total_phase_error(
                bank.last_drift, bank.last_freq_meas_err, bank.last_jitter, bank.last_phase_meas_err, T
            )
        )
        trace_state.append(s_state)
        trace_comp.append(s_comp)
        if conv is None and s_state <= eta:
            conv = k
            stop_at = min(config.max_iterations, k + config.settle_iterations)
        if k >= stop_at:
            break

    ts = np.degrees(np.array(trace_state))
    tc = np.degrees(np.array(trace_comp))
    rec = TrialRecord(
        trial=trial,
        algorithm=cell.algorithm,
        n_nodes=cell.n_nodes,
        connectivity=cell.connectivity,
        snr_db=cell.snr_db,
        convergence_iteration=conv,
        iterations_run=k,
        final_sigma_phi_deg=float(ts[-1]),
        final_sigma_phi_components_deg=float(tc[-1]),
        trace_state_deg=ts,
        trace_components_deg=tc,
        edges=topo.edges,
    )
    if keep_final_state:
        rec.final_freq = np.array(f, dtype=float)
        rec.final_phase = np.array(th, dtype=float)
        rec.final_freq_obs = bank.freq_obs.copy()
        rec.final_phase_obs = bank.phase_obs.copy()
    return rec


@dataclass(frozen=True)
class CellSummary:
    algorithm: str
    n_nodes: int
    connectivity: float
    snr_db: float
    trials: int
    converged_count: int
    mean_convergence_iters: float
    sd_convergence_iters: float
    mean_final_sigma_phi_deg: float
    sd_final_sigma_phi_deg: float

    @property
    def non_converged_count(self) -> int:
        return self.trials - self.converged_count

    @property
    def cell(self) -> Cell:
        return Cell(self.algorithm, self.n_nodes, self.connectivity, self.snr_db)


@dataclass
class SweepResult:
    cells: list[CellSummary]
    records: list[TrialRecord] | None = None

    def get(self, algorithm: str, n_nodes: int, connectivity: float, snr_db: float = 0.0) -> CellSummary:
        for c in self.cells:
            if (c.algorithm, c.n_nodes, c.connectivity, c.snr_db) == (
                algorithm,
                n_nodes,
                connectivity,
                snr_db,
            ):
                return c
        raise KeyError((algorithm, n_nodes, connectivity, snr_db))

    def __len__(self):
        return len(self.cells)


def _mean_sd(values: Sequence[float]) -> tuple[float, float]:
    if len(values) == 0:
        return math.nan, math.nan
    a = np.asarray(values, dtype=float)
    return float(a.mean()), float(a.std())


def summarize(cell: Cell, records: Iterable[TrialRecord]) -> CellSummary:
    """Aggregate trials of one cell.

    Iteration statistics use converged trials only; residual statistics
    use every trial.  Standard deviations are population (ddof=0).
    """
    recs = sorted(records, key=lambda r: r.trial)
    iters = [r.convergence_iteration for r in recs if r.converged]
    mi, si = _mean_sd(iters)
    mf, sf = _mean_sd([r.final_sigma_phi_deg for r in recs])
    return CellSummary(
        cell.algorithm,
        cell.n_nodes,
        cell.connectivity,
        cell.snr_db,
        len(recs),
        len(iters),
        mi,
        si,
        mf,
        sf,
    )


def _run_chunk(args):
    config, cell, trials = args
    return [run_trial(config, cell, t) for t in trials]


def run_cell(
    config: ExperimentConfig,
    cell: Cell,
    trials: Iterable[int] | None = None,
    workers: int = 1,
) -> list[TrialRecord]:
    trials = list(range(config.trials) if trials is None else trials)
    if workers <= 1 or len(trials) < 2:
        return [run_trial(config, cell, t) for t in trials]
    chunks = [trials[i::workers] for i in range(workers)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        out = [r for part in pool.map(_run_chunk, [(config, cell, c) for c in chunks]) for r in part]
    return sorted(out, key=lambda r: r.trial)


def run_sweep(
    config: ExperimentConfig, *, workers: int = 1, keep_records: bool = False
) -> SweepResult:
    cells = []
    kept = [] if keep_records else None
    for cell in config.cells():
        recs = run_cell(config, cell, workers=workers)
        cells.append(summarize(cell, recs))
        if keep_records:
            kept.extend(recs)
    return SweepResult(cells, kept)


# ---------------------------------------------------------------- result files

def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _row(c: CellSummary) -> dict:
    return {col: getattr(c, col) for col in RESULT_COLUMNS}


def emit_results(result: SweepResult, fmt: str, destination) -> None:
    """Write the per-cell summary table as ``csv`` or ``json``."""
    path = Path(destination)
    if fmt == "csv":
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(RESULT_COLUMNS)
            for c in result.cells:
                w.writerow([_fmt(v) for v in _row(c).values()])
    elif fmt == "json":
        rows = []
        for c in result.cells:
            row = _row(c)
            for k, v in row.items():
                if isinstance(v, float) and not math.isfinite(v):
                    row[k] = None
            rows.append(row)
        path.write_text(json.dumps({"columns": list(RESULT_COLUMNS), "cells": rows}, indent=2) + "\n")
    else:
        raise ValueError(f"unknown format {fmt!r}; use 'csv' or 'json'")


_INT_COLS = {"n_nodes", "trials", "converged_count"}


def _coerce(col: str, v):
    if col == "algorithm":
        return str(v)
    if col in _INT_COLS:
        return int(v)
    if v is None or v == "":
        return math.nan
    return float(v)


def load_results(source) -> SweepResult:
    """Read a file written by :func:`emit_results` (format from the suffix)."""
    path = Path(source)
    if path.suffix.lower() == ".json":
        data = json.loads(path.read_text())
        rows = data["cells"]
    else:
        with path.open(newline="") as fh:
            rows = list(csv.DictReader(fh))
    cells = [CellSummary(**{col: _coerce(col, r[col]) for col in RESULT_COLUMNS}) for r in rows]
    return SweepResult(cells)


def write_trace(records: Iterable[TrialRecord], destination, *, with_cell: bool = False) -> None:
    """Per-iteration sigma_phi of each trial, one CSV row per iteration."""
    cols = (("algorithm", "n_nodes", "connectivity", "snr_db") if with_cell else ()) + TRACE_COLUMNS
    with Path(destination).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for r in records:
            head = [r.algorithm, r.n_nodes, _fmt(r.connectivity), _fmt(r.snr_db)] if with_cell else []
            for k, (a, b) in enumerate(zip(r.trace_state_deg, r.trace_components_deg), start=1):
                w.writerow(head + [r.trial, k, _fmt(float(a)), _fmt(float(b))])


# ---------------------------------------------------------------- config files

_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
_LIST_TYPES = {"n_nodes": int, "connectivity": float, "snr_db": float, "algorithms": str}


def _parse_bool(key: str, text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(key, f"expected a boolean, got {text!r}")


def _convert(key: str, value):
    if key not in _FIELDS:
        raise ConfigError(key, "unknown key")
    default = _FIELDS[key].default
    if key in _LIST_TYPES:
        typ = _LIST_TYPES[key]
        items = value if isinstance(value, (list, tuple)) else str(value).split(",")
        try:
            return tuple(typ(str(x).strip()) if typ is not str else str(x).strip() for x in items if str(x).strip())
        except ValueError:
            raise ConfigError(key, f"expected a comma-separated list of {typ.__name__}, got {value!r}") from None
    if isinstance(default, bool):
        return value if isinstance(value, bool) else _parse_bool(key, str(value))
    typ = type(default)
    try:
        if typ is int:
            f = float(value)
            if f != int(f):
                raise ValueError
            return int(f)
        return typ(value)
    except (TypeError, ValueError):
        raise ConfigError(key, f"expected {typ.__name__}, got {value!r}") from None


def parse_config(path=None, overrides: dict | None = None) -> ExperimentConfig:
    """Build a config from a key-value file plus overrides.

    The file holds ``key = value`` lines (``#`` comments allowed) with keys
    named after :class:`ExperimentConfig` fields; list values are
    comma-separated.  Absent keys keep their defaults.  ``overrides`` (e.g.
    from command-line flags) win over the file; ``None`` values are ignored.
    """
    values: dict = {}
    if path is not None:
        text = Path(path).read_text()
        cp = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"), inline_comment_prefixes=("#",))
        cp.optionxform = str
        try:
            cp.read_string("[experiment]\n" + text)
        except configparser.Error as exc:
            raise ConfigError("file", f"cannot parse {path}: {exc}") from None
        for k, v in cp["experiment"].items():
            values[k] = _convert(k, v)
    for k, v in (overrides or {}).items():
        if v is None:
            continue
        values[k] = _convert(k, v)
    try:
        return ExperimentConfig(**values)
    except ConfigError:
        raise
    except InfeasibleTopologyError as exc:
        raise ConfigError("connectivity", str(exc)) from None


def default_workers() -> int:
    return max(1, (os.cpu_count() or 1))
