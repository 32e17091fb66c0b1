# %% [markdown]
# # Oscillator noise budget
#
# Per-interval standard deviations derived from the default oscillator and
# estimator settings, and a quick sampling check.

# %%
import math

import numpy as np

from mpacsync.oscillator import SimulationParams, build_noise_model, init_bank

params = SimulationParams()
noise = build_noise_model(params)
print(f"samples per interval L = {params.n_samples:.0f}")
print(f"drift sd        {noise.sigma_f:.4f} Hz")
print(f"jitter sd       {noise.sigma_theta:.6e} rad ({math.degrees(noise.sigma_theta):.3f} deg)")
print(f"freq estimate   {noise.sigma_f_meas:.3f} Hz")
print(f"phase estimate  {noise.sigma_theta_meas:.3e} rad")

# %% [markdown]
# The estimator bounds shrink as SNR grows; drift and jitter do not depend on it.

# %%
for snr_db in (-10, 0, 10, 20):
    nm = build_noise_model(params.with_snr_db(snr_db))
    print(f"{snr_db:>4} dB  freq {nm.sigma_f_meas:9.3f} Hz  phase {nm.sigma_theta_meas:.2e} rad")

# %%
rng = np.random.default_rng(1)
n = 200_000
bank = init_bank(params, np.zeros(n), np.zeros(n))
bank.evolve(noise, params.update_interval, rng.standard_normal(n), rng.standard_normal(n))
bank.observe(noise, rng.standard_normal(n), rng.standard_normal(n))
print("empirical drift sd", bank.last_drift.std(), "jitter sd", bank.last_jitter.std())
