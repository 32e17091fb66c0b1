# %% [markdown]
# # Residual spread against network size
#
# Larger, denser arrays average more observations into each consensus
# value.  This sweep reproduces the downward trend of the residual.

# %%
from mpacsync.experiment import ExperimentConfig, run_sweep

cfg = ExperimentConfig(n_nodes=(10, 20, 50), connectivity=(0.5,), algorithms=("mpac", "dfpc"), trials=30)
res = run_sweep(cfg)
for c in res.cells:
    print(f"{c.algorithm} N={c.n_nodes}: mean iterations {c.mean_convergence_iters:.2f}, "
          f"final spread {c.mean_final_sigma_phi_deg:.3g} deg")
