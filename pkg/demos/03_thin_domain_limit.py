# %% [markdown]
# Thin-domain limit: the scaled 3D MHD system approaches the hydrostatic one
# as the aspect ratio eps goes to zero, starting both from the same data.

# %%
from primhd.config import SimConfig
from primhd.experiments import eps_sweep_differences, fit_order

cfg = SimConfig(model="PEM", T_final=0.5, Nx=16, Ny=16, Nz=16, dt=1e-3)
eps_values = (0.4, 0.2, 0.1, 0.05)
T, diffs = eps_sweep_differences(cfg, eps_values)
for eps, d in zip(eps_values, diffs):
    print(f"eps = {eps:<5} |u_H - u_PE| + |b_H - b_PE| at T = {T:.2f}: {d:.3e}")
print("fitted order in eps:", round(fit_order(eps_values, diffs), 2))
