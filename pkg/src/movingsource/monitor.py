"""Monitor function evaluation and smoothing."""

from __future__ import annotations

import numpy as np

from .core import MonitorConfig, NonFiniteSolution, SolutionState, SourceState


def gradient_magnitude(nodes: np.ndarray, u: np.ndarray, source_indices) -> np.ndarray:
    """|u_x| at the nodes.

    Centered differences in the interior, one-sided at both ends. At a pinned
    node the derivative jumps, so the larger of the two one-sided slopes is
    used instead of a centered difference across the jump.
    """
    slopes = np.diff(u) / np.diff(nodes)
    g = np.empty_like(u)
    g[1:-1] = np.abs((u[2:] - u[:-2]) / (nodes[2:] - nodes[:-2]))
    g[0] = abs(slopes[0])
    g[-1] = abs(slopes[-1])
    js = np.asarray(source_indices, dtype=int)
    if js.size:
        g[js] = np.maximum(np.abs(slopes[js - 1]), np.abs(slopes[js]))
    return g


def evaluate_monitor(state: SolutionState, sources: SourceState, cfg: MonitorConfig) -> np.ndarray:
    """Nodal monitor values on the mesh of ``state``.

    M = w_val |u|^p + w_grad |u_x| + sum_i w_i ((x - alpha_i)^2 + eps)^(-1/4),
    floored at ``cfg.floor``.
    """
    x = state.mesh.nodes
    u = state.values
    if not np.all(np.isfinite(u)):
        raise NonFiniteSolution("monitor evaluated on a non-finite solution")
    eps = cfg.epsilon_for(state.mesh.N)

    m = np.zeros_like(x)
    if cfg.value_weight:
        m += cfg.value_weight * np.abs(u) ** cfg.power
    if cfg.gradient_weight:
        m += cfg.gradient_weight * gradient_magnitude(x, u, state.mesh.source_indices)
    terms = [w * ((x - a) ** 2 + eps) ** -0.25
             for w, a in zip(cfg.proximity_weights, sources.positions) if w]
    if terms:
        # summing in sorted order keeps reflected configurations bit-identical
        m += np.sort(np.array(terms), axis=0).sum(axis=0)
    return np.maximum(m, cfg.floor)


def smooth_monitor(values: np.ndarray, cfg: MonitorConfig) -> np.ndarray:
    """Apply ``cfg.smoothing_passes`` sweeps of a 3-point weighted average.

    Each sweep replaces M_j by (g M_{j-1} + M_j + g M_{j+1}) / (g + 1 + g),
    dropping the missing neighbour at either end of the array.
    """
    m = np.array(values, dtype=float, copy=True)
    g = cfg.smoothing_gamma
    if len(m) < 2:
        return m
    wsum = np.full_like(m, 1.0 + 2.0 * g)
    wsum[0] = wsum[-1] = 1.0 + g
    for _ in range(cfg.smoothing_passes):
        nb = np.zeros_like(m)
        nb[1:-1] = m[:-2] + m[2:]
        nb[0], nb[-1] = m[1], m[-2]
        m = (m + g * nb) / wsum
    return m
