# %% [markdown]
# Energy budget of a hydrostatic MHD run.
#
# The kinetic plus magnetic energy E = |u|^2 + |b|^2 drops by exactly twice
# the time integral of |grad u|^2 + |grad b|^2, because advection, the
# Lorentz force and the pressure only move energy around.  We check how well
# the discrete run keeps this balance.

# %%
import numpy as np

from primhd import spectral as sp
from primhd.diagnostics import cumulative_integral, energy_identity_residual
from primhd.experiments import simulate
from primhd.initial import random_smooth
from primhd.pem import StepperConfig

grid = sp.Grid.cube(16)
state = random_smooth(grid, seed=0)
print("grid", grid.shape, "initial energy", round(float(sp.norm2(grid, state.u) + sp.norm2(grid, state.b)), 6))

# %%
_, records, _ = simulate(state, StepperConfig(dt=1e-3, scheme="RK3"), 500, quartic=False)
t = np.array([r.time for r in records])
E = np.array([r.energy for r in records])
D = np.array([r.enstrophy for r in records])
budget = E + 2 * cumulative_integral(D, t[1] - t[0], "lagrange6")
for k in range(0, len(t), 100):
    print(f"t = {t[k]:.2f}  E = {E[k]:.6f}  E + 2 int D = {budget[k]:.12f}")

# %% [markdown]
# The residual shrinks quickly with the step; the quadrature rule has to be
# accurate enough not to hide it (the trapezoid rule alone leaves ~1e-3).

# %%
for scheme in ("RK2", "RK3"):
    for dt in (2e-3, 1e-3):
        _, recs, _ = simulate(state, StepperConfig(dt, scheme), int(round(0.5 / dt)), quartic=False)
        print(scheme, dt, "lagrange6", f"{energy_identity_residual(recs, 'lagrange6'):.2e}",
              "trapezoid", f"{energy_identity_residual(recs):.2e}")
