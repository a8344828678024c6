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
# # Moving interface with a closed-form solution
#
# `example1` has the exact solution sin(w1 x) e^{-w1^2 t} to the left of the
# interface and sin(w2 (1-x)) e^{-w2^2 t} to the right. The interface speed
# depends on u, so the default run uses the predictor-corrector coupling;
# `mode="exact"` takes the interface motion from the oracle instead.

# %%
import matplotlib.pyplot as plt
import numpy as np

from movingsource import Example1Oracle, make_example, run
from movingsource.cli import convergence_table, format_table, parse_config

oracle = Example1Oracle()
print("alpha(0) =", oracle.interface(0.0), " (7/12 =", 7 / 12, ")")

# %% [markdown]
# ## A coarse run
#
# Even 24 intervals resolve the kink well, because nodes cluster at the
# interface.

# %%
report = run(make_example("example1", N=24, L=24, snapshot_times=(0.05,)))
fig, ax = plt.subplots(1, 2, figsize=(10, 3.5))
for snap in report.snapshots:
    xf = np.linspace(0, 1, 400)
    ax[0].plot(xf, oracle.exact_u(xf, snap.time), "k", lw=0.6)
    ax[0].plot(snap.mesh.nodes, snap.values, "o", ms=3, label=f"t={snap.time:.2f}")
ax[0].legend()
ax[0].set_xlabel("x")
traj = report.mesh_trajectory
ax[1].plot(traj[:, 1:], traj[:, 0], "k", lw=0.5)
ax[1].plot(report.source_trajectories[:, 1], report.source_trajectories[:, 0], "r", lw=1.5)
ax[1].set_xlabel("x")
ax[1].set_ylabel("t")
plt.show()
print(report.errors)

# %% [markdown]
# ## Refinement study
#
# Doubling N and quadrupling L should cut every error by about 4 (second
# order in space, first order in time with dt ~ h^2).

# %%
cfg = parse_config("example = example1\nladder = 40:40, 80:160, 160:640, 320:2560\n")
rows = convergence_table(cfg)
print(format_table(rows))
