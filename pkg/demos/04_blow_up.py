# ---
# jupyter:
#   jupytext:
#     formats: py:percent
#   kernelspec:
#     display_name: Python 3
#     language: python
#     name: python3
# ---

# %% [markdown]
# # Two sources: finite-time blow-up
#
# Two sources 2.5 apart heat each other until the solution blows up. The time
# step follows dt = min(mu, mu / (max u + eps)^2) and the run stops once
# dt <= 1e-16, so the terminal peak is close to sqrt(mu / 1e-16) = 3.16e6.
# Each run takes roughly 40k steps (about 20 s).

# %%
import matplotlib.pyplot as plt
import numpy as np

from movingsource import make_example, run

runs = {name: run(make_example(name, N=150)) for name in ("linear_q2", "sin_q2")}
for name, r in runs.items():
    b = r.blow_up
    print(f"{name}: t_blow = {b.time:.10f}, x = {b.locations[0]:.6f}, "
          f"peak = {b.peak:.4e}, source {b.source_index}, {r.step_count} steps")

# %% [markdown]
# With constant velocity the trailing source (index 0) blows up first; with
# the oscillating law alpha' = pi cos(pi t) it is the leading one.

# %%
fig, ax = plt.subplots(1, 2, figsize=(10, 3.5))
for axis, (name, r) in zip(ax, runs.items()):
    u, x = r.final.values, r.final.mesh.nodes
    axis.semilogy(x, np.maximum(u, 1e-3))
    axis.set_title(name)
    axis.set_xlabel("x")
plt.show()

# %% [markdown]
# Mesh trajectories: nodes pile up at the blowing-up source.

# %%
fig, ax = plt.subplots(1, 2, figsize=(10, 3.5))
for axis, (name, r) in zip(ax, runs.items()):
    traj = r.mesh_trajectory
    axis.plot(traj[:, 1::3], traj[:, 0], "k", lw=0.3)
    axis.set_title(name)
    axis.set_xlabel("x")
    axis.set_ylabel("t")
plt.show()
