"""Data model shared by the solver modules.

All state objects are frozen dataclasses holding read-only numpy arrays, so a
state can be handed to another thread or kept in a report without copying.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

EPSILON_RULE = "1e3/N^4"


# ---------------------------------------------------------------------------
# errors
# ---------------------------------------------------------------------------

class MovingSourceError(Exception):
    """Base class for all errors raised by this package."""


class ProblemError(MovingSourceError, ValueError):
    """A problem definition violates a model assumption.

    When several violations are found at once, ``errors`` lists all of them.
    """

    def __init__(self, message: str = "", errors: Optional[list] = None):
        super().__init__(message)
        self.errors = list(errors) if errors else [self]


class SourcesOutOfOrder(ProblemError):
    pass


class SourceOutsideDomain(ProblemError):
    pass


class WeightsNotNormalized(ProblemError):
    pass


class BadPartition(ProblemError):
    pass


class StepRejected(MovingSourceError):
    """A time step failed in a way that a smaller step may fix."""


class MeshTangled(StepRejected):
    def __init__(self, message: str, slice_index: Optional[int] = None):
        super().__init__(message)
        self.slice_index = slice_index


class NewtonDiverged(StepRejected):
    pass


class SourcesCollided(StepRejected):
    pass


class NonFiniteSolution(StepRejected):
    pass


class DegenerateJump(StepRejected):
    pass


class SingularPivot(MovingSourceError, ArithmeticError):
    pass


class TooManyRejections(MovingSourceError):
    pass


class RootNotBracketed(MovingSourceError):
    pass


class ConfigError(MovingSourceError, ValueError):
    """Bad run configuration; ``line`` is the 1-based line number or None."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


class UnknownExample(MovingSourceError, KeyError):
    pass


# ---------------------------------------------------------------------------
# state
# ---------------------------------------------------------------------------

def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class MeshState:
    """Node positions x_0 < ... < x_N at one time level.

    ``source_indices`` are the pinned nodes; node ``source_indices[i]`` sits on
    source ``i`` at every time level.
    """

    time: float
    nodes: np.ndarray
    source_indices: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "nodes", _frozen(self.nodes))
        object.__setattr__(self, "source_indices", _frozen(self.source_indices, int))

    @property
    def N(self) -> int:
        return len(self.nodes) - 1

    @property
    def spacing(self) -> np.ndarray:
        """h_j = x_j - x_{j-1} for j = 1..N (array index j-1)."""
        return np.diff(self.nodes)

    def is_monotone(self) -> bool:
        return bool(np.all(np.diff(self.nodes) > 0.0))

    def slices(self) -> list[tuple[int, int]]:
        """Inclusive node ranges of the q+1 subdomains."""
        cuts = [0, *self.source_indices.tolist(), self.N]
        return list(zip(cuts[:-1], cuts[1:]))


@dataclass(frozen=True, eq=False)
class SolutionState:
    """Nodal values on a mesh; ``ghosts`` is (u_{-1}, u_{N+1}) under LABC."""

    mesh: MeshState
    values: np.ndarray
    ghosts: Optional[tuple[float, float]] = None

    def __post_init__(self):
        vals = _frozen(self.values)
        if len(vals) != len(self.mesh.nodes):
            raise ValueError(
                f"values has {len(vals)} entries, mesh has {len(self.mesh.nodes)} nodes"
            )
        object.__setattr__(self, "values", vals)
        if self.ghosts is not None:
            object.__setattr__(self, "ghosts", (float(self.ghosts[0]), float(self.ghosts[1])))

    @property
    def time(self) -> float:
        return self.mesh.time

    @property
    def at_sources(self) -> np.ndarray:
        return self.values[self.mesh.source_indices]


@dataclass(frozen=True, eq=False)
class SourceState:
    """Source positions and the velocity values attached to them."""

    positions: np.ndarray
    velocities: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "positions", _frozen(self.positions))
        object.__setattr__(self, "velocities", _frozen(self.velocities))


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MonitorConfig:
    """Weights are ordered (proximity_0, ..., proximity_{q-1}, |u_x|, u^p)."""

    weights: tuple[float, ...]
    epsilon: Union[float, str]
    power: float = 2.0
    smoothing_passes: int = 2
    smoothing_gamma: float = 0.5
    floor: float = 1e-8

    def epsilon_for(self, N: int) -> float:
        if isinstance(self.epsilon, str):
            if self.epsilon.replace(" ", "") != EPSILON_RULE:
                raise ValueError(f"unknown epsilon rule {self.epsilon!r}")
            return 1e3 / N**4
        return float(self.epsilon)

    @property
    def proximity_weights(self) -> np.ndarray:
        return np.asarray(self.weights[:-2], dtype=float)

    @property
    def gradient_weight(self) -> float:
        return float(self.weights[-2])

    @property
    def value_weight(self) -> float:
        return float(self.weights[-1])


@dataclass(frozen=True)
class Dirichlet:
    left: float = 0.0
    right: float = 0.0


@dataclass(frozen=True)
class LABC:
    """Third-order local absorbing boundary condition.

    ``strict_paper`` selects the variant right-boundary stencil whose last term
    uses u_0 instead of u_N.
    """

    s0: float = 1.0
    strict_paper: bool = False


BoundaryKind = Union[Dirichlet, LABC]


@dataclass(frozen=True)
class TimePolicy:
    """Time-step rule.

    kind is ``"uniform"`` or ``"graded"`` (both use ``steps``) or
    ``"blowup"`` (uses ``mu``; epsilon comes from the monitor).
    """

    kind: str
    final_time: float
    steps: int = 100
    mu: float = 1e-3
    terminate_tol: float = 1e-16

    def __post_init__(self):
        if self.kind not in ("uniform", "graded", "blowup"):
            raise ValueError(f"unknown time policy {self.kind!r}")
        if self.steps < 1 or self.mu <= 0 or self.terminate_tol <= 0 or self.final_time <= 0:
            raise ValueError("time policy needs steps >= 1, mu > 0, Tol > 0, T > 0")


VelocityLaw = Callable[[float, np.ndarray, Optional[SolutionState]], np.ndarray]
StrengthLaw = Callable[[float, np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SourceLaws:
    """Velocity and strength laws for all q sources at once.

    velocity(t, alpha, state) -> psi; state is None when the law does not
    depend on u. strength(t, alpha, u_at_sources) -> F and strength_du its
    derivative in u. ``exact`` optionally gives (alpha(t), psi(t)) in closed
    form and is used instead of the ODE when the run is in exact mode.
    """

    velocity: VelocityLaw
    strength: StrengthLaw
    strength_du: StrengthLaw
    depends_on_u: bool = False
    exact: Optional[Callable[[float], tuple[np.ndarray, np.ndarray]]] = None


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    q: int
    initial_condition: Callable[[np.ndarray], np.ndarray]
    initial_positions: tuple[float, ...]
    laws: SourceLaws
    monitor: MonitorConfig
    time_policy: TimePolicy
    points_per_subdomain: tuple[int, ...]
    tau: float = 1e-3
    boundary: BoundaryKind = field(default_factory=Dirichlet)
    domain: Optional[tuple[float, float]] = None
    domain_offsets: Optional[tuple[float, float]] = None
    exact_mode: bool = False
    newton_tol: float = 1e-8
    newton_max_iter: int = 50
    corrector_passes: int = 1
    exact_solution: Optional[Callable[[np.ndarray, float], np.ndarray]] = None
    snapshot_times: tuple[float, ...] = ()

    @property
    def N(self) -> int:
        return int(sum(self.points_per_subdomain))

    @property
    def final_time(self) -> float:
        return self.time_policy.final_time

    @property
    def source_indices(self) -> np.ndarray:
        return np.cumsum(self.points_per_subdomain)[:-1].astype(int)

    def endpoints(self, alpha: np.ndarray) -> tuple[float, float]:
        """Observed-domain boundaries for the given source positions."""
        if self.domain_offsets is not None:
            a, b = self.domain_offsets
            return float(alpha[0] - a), float(alpha[-1] + b)
        if self.domain is None:
            raise ProblemError("problem has neither a fixed domain nor offsets")
        return float(self.domain[0]), float(self.domain[1])


def equal_partition(N: int, q: int) -> tuple[int, ...]:
    """Split N intervals over q+1 subdomains, remainder assigned left to right."""
    base, extra = divmod(N, q + 1)
    return tuple(base + (1 if i < extra else 0) for i in range(q + 1))


def validate_problem(spec: ProblemSpec) -> ProblemSpec:
    """Return ``spec`` unchanged if it is admissible, otherwise raise.

    A single violation raises its specific error class; several raise a
    ProblemError whose ``errors`` lists each one.
    """
    errors: list[ProblemError] = []
    alpha = np.asarray(spec.initial_positions, dtype=float)

    if len(alpha) != spec.q:
        errors.append(ProblemError(f"expected {spec.q} source positions, got {len(alpha)}"))
    if np.any(np.diff(alpha) <= 0):
        errors.append(SourcesOutOfOrder(f"source positions not increasing: {alpha.tolist()}"))
    if spec.domain is None and spec.domain_offsets is None:
        errors.append(ProblemError("no domain given"))
    elif len(alpha):
        xl, xr = spec.endpoints(alpha)
        if not (xl < alpha.min() and alpha.max() < xr):
            errors.append(SourceOutsideDomain(f"sources {alpha.tolist()} not inside ({xl}, {xr})"))

    w = np.asarray(spec.monitor.weights, dtype=float)
    if len(w) != spec.q + 2:
        errors.append(WeightsNotNormalized(f"need q+2 = {spec.q + 2} monitor weights, got {len(w)}"))
    elif np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
        errors.append(WeightsNotNormalized(f"monitor weights {w.tolist()} must be >= 0 and sum to 1"))
    if spec.monitor.power <= 0:
        errors.append(ProblemError("monitor power must be positive"))
    if not 0 < spec.monitor.smoothing_gamma <= 1 or spec.monitor.smoothing_passes < 0:
        errors.append(ProblemError("smoothing needs gamma in (0, 1] and passes >= 0"))

    pps = spec.points_per_subdomain
    if len(pps) != spec.q + 1 or any(int(k) < 2 for k in pps):
        errors.append(BadPartition(f"points_per_subdomain {pps} needs q+1 = {spec.q + 1} entries >= 2"))
    else:
        try:
            eps = spec.monitor.epsilon_for(spec.N)
        except ValueError as exc:
            errors.append(ProblemError(str(exc)))
        else:
            if not 0 < eps < 1:
                errors.append(ProblemError(f"monitor epsilon {eps} must lie in (0, 1)"))

    if spec.tau <= 0:
        errors.append(ProblemError("tau must be positive"))
    if spec.exact_mode and spec.laws.exact is None:
        errors.append(ProblemError("exact mode requested but no exact source law given"))

    if len(errors) == 1:
        raise errors[0]
    if errors:
        raise ProblemError("; ".join(str(e) for e in errors), errors)
    return spec
