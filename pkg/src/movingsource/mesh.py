"""Mesh motion: a discrete MMPDE6 solved independently on each subdomain.

The sources split the observed domain into q+1 subdomains. Every subdomain
keeps its two ends pinned (to a source or to a domain endpoint), so the mesh
equations of different subdomains are uncoupled and can be solved one by one.
"""

from __future__ import annotations

import numpy as np

from .core import MeshState, MeshTangled, MonitorConfig, ProblemSpec, SolutionState, SourceState
from .linalg import solve_tridiagonal
from .monitor import evaluate_monitor, smooth_monitor


def step_subdomain_mesh(old, monitor, dt: float, tau: float, targets) -> np.ndarray:
    """One backward step of the discrete MMPDE6 on a single subdomain.

    Interior rows solve

        D2(x_new)_j - D2(x_old)_j
            = -(dt/tau) (M_{j+1/2}(x_{j+1} - x_j) - M_{j-1/2}(x_j - x_{j-1}))_new

    with D2 the undivided second difference and M_{j+1/2} the average of the
    two nodal values. The end rows are replaced by x = targets.
    """
    old = np.asarray(old, dtype=float)
    monitor = np.asarray(monitor, dtype=float)
    m = len(old) - 1
    if m < 1 or len(monitor) != m + 1:
        raise ValueError("slice needs at least two nodes and one monitor value per node")
    left, right = float(targets[0]), float(targets[1])
    if not left < right:
        raise MeshTangled(f"subdomain targets not ordered: {left} >= {right}")
    if m == 1:
        return np.array([left, right])

    r = dt / tau
    mh = 0.5 * (monitor[1:] + monitor[:-1])
    lower = 1.0 + r * mh[:-1]
    upper = 1.0 + r * mh[1:]
    diag = -lower - upper
    rhs = (old[2:] + old[:-2]) - 2.0 * old[1:-1]
    rhs[0] -= lower[0] * left
    rhs[-1] -= upper[-1] * right

    new = np.empty(m + 1)
    new[0] = left
    new[-1] = right
    new[1:-1] = solve_tridiagonal(lower[1:], diag, upper[:-1], rhs)
    if not np.all(np.diff(new) > 0.0):
        raise MeshTangled("mesh lost monotonicity in subdomain")
    return new


def global_monitor(state: SolutionState, cfg: MonitorConfig) -> np.ndarray:
    """Smoothed monitor on the mesh of ``state``, sources read off the pinned nodes."""
    js = state.mesh.source_indices
    alpha = state.mesh.nodes[js]
    sources = SourceState(alpha, np.zeros_like(alpha))
    return smooth_monitor(evaluate_monitor(state, sources, cfg), cfg)


def step_global_mesh(state: SolutionState, sources_new, domain_new, cfg: MonitorConfig,
                     dt: float, tau: float, monitor=None) -> MeshState:
    """Move every subdomain mesh to the new source and endpoint positions.

    ``monitor`` may carry precomputed smoothed values on the old mesh (the
    predictor and corrector passes of one step share them).
    """
    mesh = state.mesh
    alpha = np.asarray(sources_new, dtype=float)
    if monitor is None:
        monitor = global_monitor(state, cfg)
    ends = [float(domain_new[0]), *alpha.tolist(), float(domain_new[1])]
    new = np.empty_like(mesh.nodes)
    for i, (a, b) in enumerate(mesh.slices()):
        try:
            new[a:b + 1] = step_subdomain_mesh(mesh.nodes[a:b + 1], monitor[a:b + 1], dt, tau,
                                               (ends[i], ends[i + 1]))
        except MeshTangled as exc:
            raise MeshTangled(f"subdomain {i}: {exc}", slice_index=i) from exc
    out = MeshState(mesh.time + dt, new, mesh.source_indices)
    if not out.is_monotone():
        raise MeshTangled("global mesh not monotone")
    if not np.array_equal(out.nodes[mesh.source_indices], alpha):
        raise MeshTangled("pinned nodes drifted from the source positions")
    return out


def equidistribute(nodes, monitor) -> np.ndarray:
    """De Boor's equidistributing mesh for a nodal monitor on one subdomain.

    The monitor is treated as piecewise constant, M_{j+1/2} on each cell, and
    the cumulative integral is inverted at equally spaced levels. Nodes in the
    left half are located from the left end and nodes in the right half from
    the right end, which makes the map exactly reflection-equivariant.
    """
    x = np.asarray(nodes, dtype=float)
    mh = 0.5 * (monitor[1:] + monitor[:-1])
    cells = mh * np.diff(x)
    m = len(cells)
    cum_l = np.concatenate(([0.0], np.cumsum(cells)))
    cum_r = np.concatenate(([0.0], np.cumsum(cells[::-1])))
    half = m // 2
    total = cum_l[half] + cum_r[half]
    if m % 2:
        total = total + cells[half]
    levels = total * np.arange(m + 1) / m

    def from_left(i):
        k = np.clip(np.searchsorted(cum_l, levels[i], side="right") - 1, 0, m - 1)
        return x[k] + (levels[i] - cum_l[k]) / mh[k]

    def from_right(i):
        lev = levels[m - i]
        k = np.clip(np.searchsorted(cum_r, lev, side="right") - 1, 0, m - 1)
        return x[m - k] - (lev - cum_r[k]) / mh[m - 1 - k]

    new = x.copy()
    lo = np.arange(1, (m + 1) // 2)
    hi = np.arange(m // 2 + 1, m)
    new[lo] = from_left(lo)
    new[hi] = from_right(hi)
    if m % 2 == 0 and m >= 2:
        c = np.array([half])
        new[half] = 0.5 * (from_left(c)[0] + from_right(c)[0])
    return new


def equidistribution_residual(nodes, monitor, source_indices=()) -> float:
    """max_j |M_{j+1/2} h_{j+1} - M_{j-1/2} h_j| over nodes inside subdomains."""
    x = np.asarray(nodes, dtype=float)
    mh = 0.5 * (monitor[1:] + monitor[:-1])
    flux = mh * np.diff(x)
    jump = np.abs(np.diff(flux))
    keep = np.ones(len(jump), dtype=bool)
    for j in source_indices:
        keep[j - 1] = False
    return float(jump[keep].max()) if keep.any() else 0.0


def initial_mesh(spec: ProblemSpec, alpha=None, max_iter: int = 50, tol: float = 1e-12) -> MeshState:
    """Equidistributed mesh for the initial condition, one subdomain at a time.

    Starts from a uniform mesh on each subdomain and repeats (evaluate the
    monitor of u_0, equidistribute) until nodes move by less than ``tol``.
    """
    alpha = np.asarray(spec.initial_positions if alpha is None else alpha, dtype=float)
    xl, xr = spec.endpoints(alpha)
    ends = [xl, *alpha.tolist(), xr]
    nodes = []
    for i, k in enumerate(spec.points_per_subdomain):
        idx = np.arange(k + 1)
        seg = (ends[i] * (k - idx) + ends[i + 1] * idx) / k
        nodes.append(seg if i == 0 else seg[1:])
    x = np.concatenate(nodes)
    js = spec.source_indices
    x[js] = alpha
    cuts = [0, *js.tolist(), len(x) - 1]

    for _ in range(max_iter):
        mesh = MeshState(0.0, x, js)
        state = SolutionState(mesh, spec.initial_condition(x))
        monitor = global_monitor(state, spec.monitor)
        new = x.copy()
        for a, b in zip(cuts[:-1], cuts[1:]):
            new[a:b + 1] = equidistribute(x[a:b + 1], monitor[a:b + 1])
        move = np.max(np.abs(new - x))
        x = new
        if move < tol:
            break
    return MeshState(0.0, x, js)
