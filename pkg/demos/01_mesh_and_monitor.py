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
# # Monitor, equidistribution and one MMPDE6 step
#
# The mesh follows a monitor function M(x): large where u is large, steep, or
# close to a source. Each subdomain between two sources gets its own mesh
# equation with both ends pinned.

# %%
import matplotlib.pyplot as plt
import numpy as np

from movingsource import make_example
from movingsource.mesh import (
    equidistribution_residual,
    global_monitor,
    initial_mesh,
    step_subdomain_mesh,
)
from movingsource.simulate import initial_state

# %% [markdown]
# ## Initial mesh for two sources
#
# `initial_mesh` repeats de Boor's equidistribution on each subdomain until
# the nodes stop moving. Nodes 50 and 100 sit on the two sources.

# %%
spec = make_example("linear_q2", N=150)
state, sources = initial_state(spec)
x = state.mesh.nodes
M = global_monitor(state, spec.monitor)

fig, ax = plt.subplots(2, 1, figsize=(7, 5), sharex=True)
ax[0].plot(x, state.values, ".-", ms=3)
ax[0].set_ylabel("u0")
ax[1].semilogy(x, M, ".-", ms=3)
for a in sources.positions:
    ax[1].axvline(a, color="k", lw=0.5)
ax[1].set_ylabel("smoothed monitor")
ax[1].set_xlabel("x")
plt.show()

print("smallest / largest spacing:", np.diff(x).min(), np.diff(x).max())

# %% [markdown]
# ## Relaxing toward equidistribution
#
# With the monitor frozen, repeated MMPDE6 steps drive
# max |M_{j+1/2} h_{j+1} - M_{j-1/2} h_j| to zero.

# %%
xs = np.linspace(0, 1, 31)
Mf = 1 + 30 * np.exp(-((xs - 0.3) / 0.1) ** 2)
res = [equidistribution_residual(xs, Mf)]
traj = [xs]
for _ in range(40):
    xs = step_subdomain_mesh(xs, Mf, 0.05, 0.01, (0.0, 1.0))
    res.append(equidistribution_residual(xs, Mf))
    traj.append(xs)

fig, ax = plt.subplots(1, 2, figsize=(9, 3.5))
ax[0].semilogy(res)
ax[0].set_xlabel("step")
ax[0].set_ylabel("equidistribution residual")
ax[1].plot(np.array(traj), np.arange(len(traj)), "k", lw=0.5)
ax[1].set_xlabel("x")
ax[1].set_ylabel("step")
plt.show()
