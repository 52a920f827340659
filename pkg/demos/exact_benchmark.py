# %% [markdown]
# # The exact benchmark
#
# A bar of unit length, fixed at x = 1, released from u(x, 0) = (1 - x)/2 at
# rest. It hits the obstacle at t = 1, stays in contact until t = 2 with
# stress -1/2, then lifts off. The motion repeats with period 3.

# %%
import numpy as np

from contact_bar import benchmark as bm

x = np.linspace(0, 1, 7)
for t in (0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0):
    print(f"t={t:3.1f}", np.round(bm.exact_displacement(x, t), 4))

# %% [markdown]
# Contact displacement and multiplier at x = 0 over one period.

# %%
t = np.linspace(0, 3, 13)
print(np.column_stack([t, bm.exact_displacement(0.0, t), bm.exact_multiplier(t)]))

# %% [markdown]
# int (u_t^2 + u_x^2) dx stays at 1/4. The discrete energies carry the usual
# factor 1/2, so they should be compared with 1/8.

# %%
xm = (np.arange(2000) + 0.5) / 2000
for t in (0.0, 1.25, 2.5):
    e = np.mean(bm.exact_velocity(xm, t) ** 2 + bm.exact_strain(xm, t) ** 2)
    print(t, e, bm.exact_energy(t))
