# %% [markdown]
# Empirical constants of the interpolation and trilinear inequalities used
# in the a priori estimates.  Each ratio lhs / rhs is computed with the
# constant set to one; the largest ratio over random fields estimates the
# sharp constant, and refining the grid should not move it.

# %%
from primhd import spectral as sp
from primhd.inequalities import LEMMA_IDS, constant_sweep, FieldConstraint

for n in (32, 64):
    grid = sp.Grid.cube(n)
    row = {name: constant_sweep(20, FieldConstraint(seed=0), name, grid)["max"] for name in LEMMA_IDS}
    print(n, {k: round(v, 5) for k, v in row.items()})
