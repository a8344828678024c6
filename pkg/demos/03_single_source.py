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
# # One traveling source with quadratic strength
#
# A single source moving at speed k = 2 with strength F = 1 + u^2 stays
# bounded: it outruns the heat it deposits. Time steps are graded,
# t_n = T (n/L)^2.

# %%
import matplotlib.pyplot as plt

from movingsource import make_example, run

report = run(make_example("linear_q1", N=100, T=1.0, snapshot_times=(0.25, 0.5, 0.75)))
print(report.termination, "max u over the run:", report.max_value)

# %%
fig, ax = plt.subplots(1, 2, figsize=(10, 3.5))
for snap in report.snapshots:
    ax[0].plot(snap.mesh.nodes, snap.values, lw=1, label=f"t={snap.time:.2f}")
ax[0].set_xlim(-3, 5)
ax[0].legend()
ax[0].set_xlabel("x")
traj = report.mesh_trajectory
ax[1].plot(traj[:, 1::2], traj[:, 0], "k", lw=0.4)
ax[1].set_xlabel("x")
ax[1].set_ylabel("t")
plt.show()
