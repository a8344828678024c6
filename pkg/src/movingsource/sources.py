"""Source motion and the coupled step of mesh, PDE and source ODEs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ProblemSpec, SolutionState, SourcesCollided, SourceState
from .mesh import global_monitor, step_global_mesh
from .pde import StepSystem, newton_step_solve


def crank_nicolson_position(alpha_n, psi_n, psi_np1, dt: float) -> np.ndarray:
    """alpha^{n+1} = alpha^n + dt/2 (psi^{n+1} + psi^n), elementwise."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    alpha = np.asarray(alpha_n, dtype=float) + 0.5 * dt * (np.asarray(psi_np1, dtype=float)
                                                          + np.asarray(psi_n, dtype=float))
    if np.any(np.diff(alpha) <= 0):
        raise SourcesCollided(f"sources out of order after update: {alpha.tolist()}")
    return alpha


@dataclass
class StepInfo:
    newton_iterations: int
    predictor_corrector: bool


def _check_interior(spec: ProblemSpec, alpha: np.ndarray) -> tuple[float, float]:
    xl, xr = spec.endpoints(alpha)
    if not (xl < alpha[0] and alpha[-1] < xr):
        raise SourcesCollided(f"sources {alpha.tolist()} left the domain ({xl}, {xr})")
    return xl, xr


def _mesh_and_solve(state: SolutionState, spec: ProblemSpec, alpha1, psi1, t1, dt, monitor):
    domain = _check_interior(spec, alpha1)
    mesh1 = step_global_mesh(state, alpha1, domain, spec.monitor, dt, spec.tau, monitor)
    laws = spec.laws
    system = StepSystem(
        old=state,
        mesh=mesh1,
        dt=dt,
        psi=psi1,
        strength=lambda u: laws.strength(t1, alpha1, u),
        strength_du=lambda u: laws.strength_du(t1, alpha1, u),
        boundary=spec.boundary,
    )
    return newton_step_solve(system, tol=spec.newton_tol, max_iter=spec.newton_max_iter)


def advance_one_step(state: SolutionState, sources: SourceState, spec: ProblemSpec, dt: float,
                     force_predictor_corrector: bool = False):
    """Advance mesh, solution and sources from t_n to t_n + dt.

    Returns ``(state_new, sources_new, info)``. Velocity laws that ignore u are
    evaluated directly at the new time; otherwise a predictor pass with frozen
    velocity is followed by ``spec.corrector_passes`` corrector passes.
    """
    t1 = state.time + dt
    alpha_n = sources.positions
    psi_n = sources.velocities
    laws = spec.laws
    monitor = global_monitor(state, spec.monitor)

    if spec.exact_mode:
        alpha1, psi1 = (np.asarray(a, dtype=float) for a in laws.exact(t1))
        res = _mesh_and_solve(state, spec, alpha1, psi1, t1, dt, monitor)
        return res.state, SourceState(alpha1, psi1), StepInfo(res.iterations, False)

    alpha_star = crank_nicolson_position(alpha_n, psi_n, psi_n, dt)
    if not (laws.depends_on_u or force_predictor_corrector):
        psi1 = np.asarray(laws.velocity(t1, alpha_star, None), dtype=float)
        alpha1 = crank_nicolson_position(alpha_n, psi_n, psi1, dt)
        res = _mesh_and_solve(state, spec, alpha1, psi1, t1, dt, monitor)
        return res.state, SourceState(alpha1, psi1), StepInfo(res.iterations, False)

    res = _mesh_and_solve(state, spec, alpha_star, psi_n, t1, dt, monitor)
    iters = res.iterations
    for _ in range(max(1, spec.corrector_passes)):
        context = res.state if laws.depends_on_u else None
        psi1 = np.asarray(laws.velocity(t1, alpha_star, context), dtype=float)
        alpha1 = crank_nicolson_position(alpha_n, psi_n, psi1, dt)
        res = _mesh_and_solve(state, spec, alpha1, psi1, t1, dt, monitor)
        iters += res.iterations
        alpha_star = alpha1
    return res.state, SourceState(alpha1, psi1), StepInfo(iters, True)
