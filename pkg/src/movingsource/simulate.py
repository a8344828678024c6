"""Time loop: initial mesh, repeated coupled steps, termination and reporting."""

from __future__ import annotations

import logging
import time as _time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import LABC, ProblemSpec, SolutionState, SourceState, StepRejected, validate_problem
from .mesh import initial_mesh
from .sources import advance_one_step
from .timecontrol import BLOWUP, RejectionTracker, Terminated, next_dt

logger = logging.getLogger(__name__)


@dataclass
class BlowUp:
    time: float
    peak: float
    locations: list[float]
    source_index: Optional[int]
    source_values: list[float]


class _Decimator:
    """Keeps at most ~2*max_rows rows, uniformly spaced in step index."""

    def __init__(self, max_rows: int):
        self.max_rows = max_rows
        self.stride = 1
        self.rows: list[tuple[int, np.ndarray]] = []

    def offer(self, step: int, row: np.ndarray) -> None:
        if step % self.stride:
            return
        self.rows.append((step, row))
        if len(self.rows) >= 2 * self.max_rows:
            self.stride *= 2
            self.rows = [r for r in self.rows if r[0] % self.stride == 0]

    def finish(self, step: int, row: np.ndarray) -> np.ndarray:
        rows = [r for s, r in self.rows if s != step] + [row]
        if len(rows) > self.max_rows:
            idx = np.unique(np.linspace(0, len(rows) - 1, self.max_rows).round().astype(int))
            rows = [rows[i] for i in idx]
        return np.array(rows)


@dataclass
class RunReport:
    spec: ProblemSpec
    final: SolutionState
    sources: SourceState
    snapshots: list[SolutionState]
    mesh_trajectory: np.ndarray      # rows: t, x_0..x_N
    source_trajectories: np.ndarray  # rows: t, alpha_0..alpha_{q-1}
    termination: str
    blow_up: Optional[BlowUp]
    errors: Optional[dict]
    step_count: int
    rejections: int
    newton_iterations: list[int] = field(default_factory=list)
    max_history: Optional[np.ndarray] = None  # rows: t, max_j u_j
    max_value: float = float("nan")           # max_j u_j over every accepted step
    wall_time: float = 0.0

    def newton_stats(self) -> dict:
        it = np.asarray(self.newton_iterations or [0])
        return {"mean": float(it.mean()), "max": int(it.max()), "total": int(it.sum())}


def initial_state(spec: ProblemSpec) -> tuple[SolutionState, SourceState]:
    if spec.exact_mode:
        alpha, psi = spec.laws.exact(0.0)
        alpha = np.asarray(alpha, dtype=float)
    else:
        alpha = np.asarray(spec.initial_positions, dtype=float)
    mesh = initial_mesh(spec, alpha)
    x = mesh.nodes
    ghosts = None
    if isinstance(spec.boundary, LABC):
        gx = np.array([2 * x[0] - x[1], 2 * x[-1] - x[-2]])
        ghosts = tuple(spec.initial_condition(gx))
    state = SolutionState(mesh, spec.initial_condition(x), ghosts)
    if not spec.exact_mode:
        psi = spec.laws.velocity(0.0, alpha, state if spec.laws.depends_on_u else None)
    return state, SourceState(alpha, np.asarray(psi, dtype=float))


def blow_up_record(state: SolutionState, tie_rtol: float = 1e-9) -> BlowUp:
    u = state.values
    x = state.mesh.nodes
    js = state.mesh.source_indices
    peak = float(u.max())
    ties = np.flatnonzero(u >= peak * (1 - tie_rtol))
    j = int(np.argmax(u))
    src = int(np.argmin(np.abs(js - j))) if len(js) else None
    return BlowUp(state.time, peak, [float(x[k]) for k in ties], src, u[js].tolist())


def run(spec: ProblemSpec, max_rows: int = 500, max_steps: int = 10**7,
        progress_every: Optional[int] = None) -> RunReport:
    """Integrate ``spec`` to its final time or until blow-up."""
    validate_problem(spec)
    wall0 = _time.perf_counter()
    policy = spec.time_policy
    eps = spec.monitor.epsilon_for(spec.N)

    state, sources = initial_state(spec)
    mesh_rows = _Decimator(max_rows)
    src_rows = _Decimator(max_rows)
    max_rows_hist = _Decimator(max_rows)
    pending_snaps = sorted(spec.snapshot_times)
    snapshots = [state]
    pending_snaps = [s for s in pending_snaps if s > 0]

    peak = [float(state.values.max())]

    def record(step):
        t = state.time
        peak[0] = max(peak[0], float(state.values.max()))
        mesh_rows.offer(step, np.concatenate(([t], state.mesh.nodes)))
        src_rows.offer(step, np.concatenate(([t], sources.positions)))
        max_rows_hist.offer(step, np.array([t, state.values.max()]))

    tracker = RejectionTracker()
    newton_its: list[int] = []
    step = 0
    n = 0
    record(0)
    reason = None
    while step < max_steps:
        res = next_dt(policy, n, state.time, float(state.values.max()), eps)
        if isinstance(res, Terminated):
            reason = res.reason
            break
        target = state.time + res
        dt = res
        while True:
            try:
                new_state, new_sources, info = advance_one_step(state, sources, spec, dt)
            except StepRejected as exc:
                logger.debug("step at t=%.6g rejected (%s)", state.time, exc)
                dt = tracker.reject(dt)
                continue
            tracker.accept()
            state, sources = new_state, new_sources
            newton_its.append(info.newton_iterations)
            step += 1
            record(step)
            if policy.kind == "blowup" or state.time >= target - 1e-14 * max(1.0, abs(target)):
                break
            dt = min(dt, target - state.time)
        n += 1
        while pending_snaps and state.time >= pending_snaps[0] - 1e-12:
            snapshots.append(state)
            pending_snaps.pop(0)
        if progress_every and step % progress_every == 0:
            logger.info("step %d t=%.10f max u=%.4e", step, state.time, state.values.max())
    else:
        reason = "max_steps"

    if snapshots[-1] is not state:
        snapshots.append(state)
    blow = blow_up_record(state) if reason == BLOWUP else None
    errors = None
    if spec.exact_solution is not None and blow is None:
        t = state.time
        errors = {"u_inf": float(np.max(np.abs(state.values - spec.exact_solution(state.mesh.nodes, t))))}
        if spec.laws.exact is not None:
            alpha_exact, _ = spec.laws.exact(t)
            errors["alpha"] = float(np.max(np.abs(sources.positions - np.asarray(alpha_exact))))
    t = state.time
    return RunReport(
        spec=spec,
        final=state,
        sources=sources,
        snapshots=snapshots,
        mesh_trajectory=mesh_rows.finish(step, np.concatenate(([t], state.mesh.nodes))),
        source_trajectories=src_rows.finish(step, np.concatenate(([t], sources.positions))),
        termination=reason,
        blow_up=blow,
        errors=errors,
        step_count=step,
        rejections=tracker.total,
        newton_iterations=newton_its,
        max_history=max_rows_hist.finish(step, np.array([t, state.values.max()])),
        max_value=peak[0],
        wall_time=_time.perf_counter() - wall0,
    )
