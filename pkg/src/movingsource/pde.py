"""Implicit step for the heat equation on the moving mesh.

The unknowns are the nodal values u^{n+1} on the new mesh, plus two ghost
values when absorbing boundaries are used. Nodes carry their values from one
mesh to the next (the mesh velocity enters as a convective term), so no
interpolation between meshes ever happens.

Internally every row is multiplied by dt so that all entries carry units of
u; :meth:`StepSystem.residual` undoes this for the physical rows.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import LABC, BoundaryKind, MeshState, NewtonDiverged, SingularPivot, SolutionState
from .linalg import solve_banded, solve_tridiagonal


@dataclass
class StepSystem:
    """Discrete equations for one step from ``old`` onto ``mesh``.

    ``psi`` and ``alpha`` are the source velocities and positions at the new
    time level; ``strength(u_src)`` and ``strength_du(u_src)`` give F_i and
    dF_i/du there.
    """

    old: SolutionState
    mesh: MeshState
    dt: float
    psi: np.ndarray
    strength: Callable[[np.ndarray], np.ndarray]
    strength_du: Callable[[np.ndarray], np.ndarray]
    boundary: BoundaryKind

    def __post_init__(self):
        self.labc = isinstance(self.boundary, LABC)
        self.g = 1 if self.labc else 0
        self.js = np.asarray(self.mesh.source_indices, dtype=int)
        self.psi = np.asarray(self.psi, dtype=float)
        x = self.mesh.nodes
        xo = self.old.mesh.nodes
        if self.labc:
            if self.old.ghosts is None:
                raise ValueError("absorbing boundaries need ghost values on the old state")
            x = np.concatenate(([2 * x[0] - x[1]], x, [2 * x[-1] - x[-2]]))
            xo = np.concatenate(([2 * xo[0] - xo[1]], xo, [2 * xo[-1] - xo[-2]]))
            self.uo = np.concatenate(([self.old.ghosts[0]], self.old.values, [self.old.ghosts[1]]))
        else:
            self.uo = np.asarray(self.old.values, dtype=float)
        self.x = x
        self.xo = xo
        self.size = len(x)
        N = self.mesh.N
        # physical rows: extended indices of nodes whose PDE row is in the system
        if self.labc:
            self.rows = np.arange(1, N + 2)
        else:
            self.rows = np.arange(1, N)
        r = self.rows
        self.hp = x[r + 1] - x[r]
        self.hm = x[r] - x[r - 1]
        self.S = self.hp + self.hm
        vel = x[r] - xo[r]
        # pinned nodes use the source velocity rather than the mesh speed
        self.src_rows = self.js + self.g - r[0]
        vel = vel.copy()
        vel[self.src_rows] = self.dt * self.psi
        self.vel = vel

    # -- residuals -----------------------------------------------------------

    def scaled_residual(self, v: np.ndarray) -> np.ndarray:
        """Residual of all rows, physical rows multiplied by dt."""
        R = np.empty(self.size)
        r = self.rows
        dt = self.dt
        um, u0, up = v[r - 1], v[r], v[r + 1]
        S = self.S
        phys = (u0 - self.uo[r]) - (up - um) / S * self.vel \
            - dt * 2.0 / S * ((up - u0) / self.hp - (u0 - um) / self.hm)
        usrc = v[self.js + self.g]
        phys[self.src_rows] -= dt * 2.0 / S[self.src_rows] * self.strength(usrc)
        R[r] = phys
        if self.labc:
            R[0], R[-1] = self._labc_rows(v)
        else:
            R[0] = v[0] - self.boundary.left
            R[-1] = v[-1] - self.boundary.right
        return R

    def residual(self, v: np.ndarray) -> np.ndarray:
        """Residual in the displayed (unscaled) form; Dirichlet rows are u - g."""
        R = self.scaled_residual(v) / self.dt
        if not self.labc:
            R[0] *= self.dt
            R[-1] *= self.dt
        return R

    def _labc_coeffs(self):
        s0 = self.boundary.s0
        rs = np.sqrt(s0)
        x, xo, dt = self.x, self.xo, self.dt
        h1, ho1 = x[2] - x[1], xo[2] - xo[1]
        hN, hoN = x[-2] - x[-3], xo[-2] - xo[-3]
        v0 = x[1] - xo[1]
        vN = x[-2] - xo[-2]
        return s0, rs, h1, ho1, hN, hoN, v0, vN, dt

    def _labc_rows(self, v):
        s0, rs, h1, ho1, hN, hoN, v0, vN, dt = self._labc_coeffs()
        uo = self.uo
        left = ((v[2] - v[0]) / (2 * h1) - (uo[2] - uo[0]) / (2 * ho1)
                - 3 * rs * (v[1] - uo[1])
                + 3 * (s0 * dt + rs * v0) * (v[2] - v[0]) / (2 * h1)
                - v0 * (v[2] - 2 * v[1] + v[0]) / h1**2
                - dt * s0 * rs * v[1])
        last = v[1] if self.boundary.strict_paper else v[-2]
        right = ((v[-1] - v[-3]) / (2 * hN) - (uo[-1] - uo[-3]) / (2 * hoN)
                 + 3 * rs * (v[-2] - uo[-2])
                 + 3 * (s0 * dt - rs * vN) * (v[-1] - v[-3]) / (2 * hN)
                 - vN * (v[-1] - 2 * v[-2] + v[-3]) / hN**2
                 + dt * s0 * rs * last)
        return left, right

    # -- Jacobian ------------------------------------------------------------

    @property
    def bandwidth(self) -> int:
        return 2 if self.labc else 1

    def jacobian_bands(self, v: np.ndarray) -> np.ndarray:
        """Jacobian of :meth:`scaled_residual` in ``solve_banded`` storage."""
        bw = self.bandwidth
        n = self.size
        ab = np.zeros((2 * bw + 1, n))
        r = self.rows
        dt, S = self.dt, self.S
        lo = self.vel / S - dt * 2.0 / (S * self.hm)
        up = -self.vel / S - dt * 2.0 / (S * self.hp)
        di = 1.0 + dt * 2.0 / S * (1.0 / self.hp + 1.0 / self.hm)
        usrc = v[self.js + self.g]
        di[self.src_rows] -= dt * 2.0 / S[self.src_rows] * self.strength_du(usrc)
        ab[bw, r] = di
        ab[bw + 1, r - 1] = lo
        ab[bw - 1, r + 1] = up
        if self.labc:
            s0, rs, h1, _, hN, _, v0, vN, dt = self._labc_coeffs()
            cl = (1 + 3 * (s0 * dt + rs * v0)) / (2 * h1)
            ab[bw, 0] = -cl - v0 / h1**2                    # d/du_{-1}
            ab[bw - 1, 1] = -3 * rs + 2 * v0 / h1**2 - dt * s0 * rs  # d/du_0
            ab[bw - 2, 2] = cl - v0 / h1**2                 # d/du_1
            cr = (1 + 3 * (s0 * dt - rs * vN)) / (2 * hN)
            last = n - 1
            ab[bw + 2, last - 2] = -cr - vN / hN**2          # d/du_{N-1}
            ab[bw + 1, last - 1] = 3 * rs + 2 * vN / hN**2 + (0.0 if self.boundary.strict_paper
                                                               else dt * s0 * rs)
            ab[bw, last] = cr - vN / hN**2                   # d/du_{N+1}
        else:
            ab[bw, 0] = 1.0
            ab[bw, n - 1] = 1.0
        return ab

    def jacobian_dense(self, v: np.ndarray) -> np.ndarray:
        bw = self.bandwidth
        ab = self.jacobian_bands(v)
        n = self.size
        J = np.zeros((n, n))
        for k in range(2 * bw + 1):
            off = bw - k
            for j in range(max(off, 0), min(n, n + off)):
                J[j - off, j] = ab[k, j]
        if self.labc and self.boundary.strict_paper:
            J[-1, 1] += self.dt * self.boundary.s0 ** 1.5
        return J

    def solve_linearized(self, v: np.ndarray, R: np.ndarray) -> np.ndarray:
        if self.labc and self.boundary.strict_paper:
            # the variant right-boundary row reaches back to u_0 and leaves the band
            return np.linalg.solve(self.jacobian_dense(v), R)
        ab = self.jacobian_bands(v)
        if self.bandwidth == 1:
            # the two-sided sweep keeps reflected problems exactly reflected
            try:
                d = solve_tridiagonal(ab[2, :-1], ab[1], ab[0, 1:], R)
                if np.all(np.isfinite(d)):
                    return d
            except SingularPivot:
                pass
        return solve_banded(self.bandwidth, ab, R)

    # -- unknown vector --------------------------------------------------------

    def initial_guess(self) -> np.ndarray:
        return self.uo.copy()

    def to_state(self, v: np.ndarray) -> SolutionState:
        if self.labc:
            return SolutionState(self.mesh, v[1:-1], (v[0], v[-1]))
        return SolutionState(self.mesh, v)


@dataclass
class NewtonResult:
    state: SolutionState
    iterations: int
    residual: float


def newton_step_solve(system: StepSystem, guess: Optional[np.ndarray] = None,
                      tol: float = 1e-8, max_iter: int = 50) -> NewtonResult:
    """Newton's method on the step equations.

    Converged when the dt-scaled residual is at most ``tol * max(1, |u|_inf)``.
    Raises NewtonDiverged after ``max_iter`` updates or on a non-finite iterate.
    """
    v = system.initial_guess() if guess is None else np.array(guess, dtype=float)
    for it in range(max_iter + 1):
        if not np.all(np.isfinite(v)):
            raise NewtonDiverged(f"non-finite iterate at Newton iteration {it}")
        R = system.scaled_residual(v)
        rnorm = float(np.max(np.abs(R)))
        if not np.isfinite(rnorm):
            raise NewtonDiverged(f"non-finite residual at Newton iteration {it}")
        if rnorm <= tol * max(1.0, float(np.max(np.abs(v)))):
            return NewtonResult(system.to_state(v), it, rnorm)
        if it == max_iter:
            break
        v = v - system.solve_linearized(v, R)
    raise NewtonDiverged(f"no convergence in {max_iter} Newton iterations (residual {rnorm:.3e})")


# -- row-level views ----------------------------------------------------------

def residual_regular_row(j: int, candidate: np.ndarray, system: StepSystem) -> float:
    """Displayed residual of the PDE row at node j (a node without a source)."""
    if j in set(system.js.tolist()):
        raise ValueError(f"node {j} carries a source; use residual_source_row")
    return float(system.residual(candidate)[j + system.g])


def residual_source_row(i: int, candidate: np.ndarray, system: StepSystem) -> float:
    """Displayed residual of the PDE row at the node pinned to source i."""
    return float(system.residual(candidate)[system.js[i] + system.g])


def residual_boundary_rows(candidate: np.ndarray, system: StepSystem) -> tuple[float, float]:
    """Left and right boundary rows (Dirichlet or absorbing)."""
    R = system.residual(candidate)
    return float(R[0]), float(R[-1])
