# %% [markdown]
# # Closed-loop synchronisation: MPAC and the linear baseline
#
# Each iteration the oscillators drift, every node measures its own state,
# the consensus step runs and the oscillators are retuned to its output.
# We watch the phase spread across the array.

# %%
import numpy as np

from mpacsync.experiment import Cell, ExperimentConfig, run_cell, run_trial, summarize

cfg = ExperimentConfig(trials=50, max_iterations=200)

# %%
for alg in ("mpac", "dfpc"):
    rec = run_trial(cfg, Cell(alg, 20, 0.2, 0.0), 0)
    head = np.array2string(rec.trace_state_deg[:8], precision=3)
    print(f"{alg}: first spreads (deg) {head}; converged at {rec.convergence_iteration}")

# %% [markdown]
# Over many trials MPAC reaches a 1 degree spread within a dozen rounds and
# then drives the residual towards floating-point level.  The baseline
# mostly hovers a few degrees above the threshold at 0 dB.

# %%
for snr in (-10.0, 0.0, 10.0):
    for alg in ("mpac", "dfpc"):
        cell = Cell(alg, 20, 0.5, snr)
        s = summarize(cell, run_cell(cfg, cell))
        print(f"{snr:>6} dB {alg}: {s.converged_count}/{s.trials} converged, "
              f"final spread {s.mean_final_sigma_phi_deg:.3g} deg")
