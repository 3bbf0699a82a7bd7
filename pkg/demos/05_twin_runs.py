# %% [markdown]
# Continuous dependence: two runs whose initial data differ by delta stay
# delta-close, and halving delta halves the final gap.

# %%
from primhd.config import SimConfig
from primhd.experiments import twin_difference

cfg = SimConfig(model="PEM", T_final=0.5, Nx=16, Ny=16, Nz=16, dt=1e-3)
for delta in (0.0, 1e-3, 5e-4):
    _, rows = twin_difference(cfg, delta, record_every=100)
    print(f"delta = {delta:<7}", "  ".join(f"t={t:.1f}: {d:.3e}" for t, _, d in rows))
