# %% [markdown]
# A horizontal shear u = (sin(2 pi y), 0) is an exact solution: every
# nonlinear term vanishes and the flow just diffuses, |u|^2 ~ exp(-2 (2 pi)^2 t).

# %%
import math

import numpy as np

from primhd import spectral as sp
from primhd.diagnostics import decay_rate_fit
from primhd.experiments import simulate
from primhd.initial import shear, shear_velocity
from primhd.pem import StepperConfig

grid = sp.Grid.cube(16)
final, records, _ = simulate(shear(grid), StepperConfig(1e-3), 1000, 50, quartic=False)

# %%
err = np.max(np.abs(sp.inverse_transform(grid, final.u) - shear_velocity(grid, final.time)))
rate = decay_rate_fit([r.time for r in records], [r.l2_u for r in records])
print("pointwise error at t = 1:", err)
print("fitted decay rate:", rate, " exact:", 2 * (2 * math.pi) ** 2)
