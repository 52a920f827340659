# %% [markdown]
# # Convergence in time and space
#
# Semi-discrete Crank-Nicolson on the reduced Mod 3 system, against a fine
# reference with dt = 1/12800. Set CONTACT_BAR_THREADS to bound the worker pool.

# %%
from contact_bar.experiments import spatial_refinement_study, temporal_order_study

pairs, slope = temporal_order_study()
for dt, err in pairs:
    print(f"dt = 1/{round(1 / dt):4d}  error {err:.3e}")
print(f"fitted order {slope:.3f}")

# %% [markdown]
# Hybrid scheme with dt = 1/800 on refined meshes, measured against the exact
# solution.

# %%
for m, err in spatial_refinement_study(ms=(6, 12, 24), dt=1 / 800):
    print(f"m = {m:3d}  linf-L2 error {err:.4f}")
