"""Built-in problems and the closed-form interface problem used for convergence.

``example1`` is a moving interface with a known solution on [0, 1]. The other
presets are traveling heat sources with strength F = 1 + u^2 starting from a
cos^2 bump; two sources close enough together blow up in finite time.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .core import (
    LABC,
    DegenerateJump,
    Dirichlet,
    MonitorConfig,
    ProblemSpec,
    RootNotBracketed,
    SolutionState,
    SourceLaws,
    TimePolicy,
    UnknownExample,
    equal_partition,
    validate_problem,
)

EXAMPLES = ("example1", "linear_q1", "linear_q2", "sin_q2", "symmetric_q2", "symmetric_q2_labc")


@dataclass(frozen=True)
class Example1Oracle:
    """Exact solution sin(w1 x) e^{-w1^2 t} | sin(w2 (1-x)) e^{-w2^2 t}.

    The interface alpha(t) is the point where the two branches meet.
    """

    omega1: float = 5 * np.pi / 4
    omega2: float = 7 * np.pi / 4
    xtol: float = 1e-14

    def __post_init__(self):
        if not (np.pi < self.omega1 < 2 * np.pi and np.pi < self.omega2 < 2 * np.pi):
            raise ValueError("interface is unique only for pi < omega1, omega2 < 2 pi")

    def interface(self, t: float) -> float:
        w1, w2 = self.omega1, self.omega2
        decay = np.exp(-(w2**2 - w1**2) * t)  # both sides scaled by e^{w1^2 t}

        def gap(a):
            return np.sin(w1 * a) - np.sin(w2 * (1 - a)) * decay

        lo, hi = gap(0.0), gap(1.0)
        if lo * hi > 0:
            raise RootNotBracketed(f"no sign change on [0, 1] at t={t}")
        return brentq(gap, 0.0, 1.0, xtol=self.xtol, rtol=4 * np.finfo(float).eps, maxiter=200)

    def exact_u(self, x, t: float, alpha: Optional[float] = None):
        w1, w2 = self.omega1, self.omega2
        a = self.interface(t) if alpha is None else alpha
        x = np.asarray(x, dtype=float)
        left = np.sin(w1 * x) * np.exp(-w1**2 * t)
        right = np.sin(w2 * (1 - x)) * np.exp(-w2**2 * t)
        return np.where(x <= a, left, right)

    def strength(self, t: float, alpha) -> float:
        """Jump u_x(alpha-) - u_x(alpha+) of the exact solution at ``alpha``."""
        w1, w2 = self.omega1, self.omega2
        return (w1 * np.cos(w1 * alpha) * np.exp(-w1**2 * t)
                + w2 * np.cos(w2 * (1 - alpha)) * np.exp(-w2**2 * t))

    def velocity_and_strength(self, t: float, u_at_interface: float, alpha: Optional[float] = None):
        """(interface speed, source strength) at time t.

        ``alpha`` defaults to the exact interface; pass the running position
        to evaluate along a numerical trajectory.
        """
        a = self.interface(t) if alpha is None else alpha
        F = self.strength(t, a)
        if np.any(np.abs(F) < 1e-12):
            raise DegenerateJump(f"source strength vanishes at t={t}")
        return (self.omega1**2 - self.omega2**2) * u_at_interface / F, F

    def exact_motion(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        a = self.interface(t)
        psi, _ = self.velocity_and_strength(t, float(self.exact_u(a, t, a)), a)
        return np.array([a]), np.array([psi])


def one_sided_jump(state: SolutionState, i: int = 0) -> float:
    """s_- - s_+ from the one-sided slopes at the node pinned to source i."""
    x, u = state.mesh.nodes, state.values
    j = int(state.mesh.source_indices[i])
    return (u[j] - u[j - 1]) / (x[j] - x[j - 1]) - (u[j + 1] - u[j]) / (x[j + 1] - x[j])


def _example1(N: int, L: int, T: float, theta: float, exact: bool, discrete_slopes: bool,
              oracle: Example1Oracle) -> ProblemSpec:
    w1, w2 = oracle.omega1, oracle.omega2

    def velocity(t, alpha, state):
        u = state.at_sources
        if discrete_slopes:
            F = one_sided_jump(state)
            if abs(F) < 1e-12:
                raise DegenerateJump("discrete jump vanishes")
            return (w1**2 - w2**2) * u / F
        psi, _ = oracle.velocity_and_strength(t, u, alpha)
        return psi

    def strength(t, alpha, u):
        return oracle.strength(t, np.asarray(alpha))

    laws = SourceLaws(
        velocity=velocity,
        strength=strength,
        strength_du=lambda t, alpha, u: np.zeros_like(u),
        depends_on_u=True,
        exact=oracle.exact_motion,
    )
    return ProblemSpec(
        name="example1",
        q=1,
        initial_condition=lambda x: oracle.exact_u(x, 0.0),
        initial_positions=(oracle.interface(0.0),),
        laws=laws,
        monitor=MonitorConfig(weights=(theta, 1 - theta, 0.0), epsilon="1e3/N^4", power=1.0),
        time_policy=TimePolicy("uniform", T, steps=L),
        points_per_subdomain=equal_partition(N, 1),
        tau=1e-3,
        boundary=Dirichlet(0.0, 0.0),
        domain=(0.0, 1.0),
        exact_mode=exact,
        exact_solution=lambda x, t: oracle.exact_u(x, t),
    )


def bump(x):
    """cos^2(pi x / 2) on (-1, 1), zero elsewhere."""
    ax = np.abs(np.asarray(x, dtype=float))
    return np.where(ax < 1, np.cos(np.pi * ax / 2) ** 2, 0.0)


def quadratic_strength(t, alpha, u):
    return 1.0 + u * u


def quadratic_strength_du(t, alpha, u):
    return 2.0 * u


def _heat_source(name, q, positions, velocity, *, N, T, tau, theta, p, epsilon, policy,
                 L, mu, boundary, domain, offsets) -> ProblemSpec:
    laws = SourceLaws(velocity=velocity, strength=quadratic_strength,
                      strength_du=quadratic_strength_du, depends_on_u=False)
    return ProblemSpec(
        name=name,
        q=q,
        initial_condition=bump,
        initial_positions=tuple(positions),
        laws=laws,
        monitor=MonitorConfig(weights=tuple(theta), epsilon=epsilon, power=p),
        time_policy=TimePolicy(policy, T, steps=L, mu=mu),
        points_per_subdomain=equal_partition(N, q),
        tau=tau,
        boundary=boundary,
        domain=domain,
        domain_offsets=offsets,
    )


def make_example(name: str, *, N: Optional[int] = None, L: Optional[int] = None,
                 T: Optional[float] = None, tau: Optional[float] = None,
                 theta: Optional[Sequence[float] | float] = None, p: Optional[float] = None,
                 epsilon: Optional[float | str] = None, mu: Optional[float] = None,
                 s0: Optional[float] = None, strict_paper_labc: bool = False,
                 mode: str = "pc", discrete_slopes: bool = False,
                 k: float = 2.0, A: float = np.pi, d1: float = 2.5,
                 points_per_subdomain: Optional[Sequence[int]] = None,
                 boundary: Optional[str] = None, offsets: tuple[float, float] = (4.0, 4.0),
                 **extra) -> ProblemSpec:
    """Fully parameterized preset; keyword arguments override the defaults.

    ``boundary`` ("dirichlet" or "labc") swaps the boundary treatment of the
    heat-source presets; absorbing boundaries use the domain
    [alpha_0 - offsets[0], alpha_last + offsets[1]]. ``extra`` is passed to
    :func:`dataclasses.replace` on the finished spec.
    """
    if name not in EXAMPLES:
        raise UnknownExample(f"unknown example {name!r}; choose from {', '.join(EXAMPLES)}")

    if name == "example1":
        if mode not in ("exact", "pc"):
            raise ValueError("mode must be 'exact' or 'pc'")
        th = 0.5 if theta is None else theta
        if not np.isscalar(th):
            th = float(np.asarray(th)[0])
        spec = _example1(N or 40, L or 40, T or 0.1, float(th), mode == "exact",
                         discrete_slopes, Example1Oracle())
    elif mode != "pc":
        raise ValueError(f"{name} has no exact source motion; mode must be 'pc'")
    elif name == "linear_q1":
        spec = _heat_source(
            name, 1, [0.0], lambda t, a, s: np.array([k]),
            N=N or 100, T=T or 1.0, tau=tau or 1e-3, theta=theta or (0.9, 0.1, 0.0),
            p=p or 2.0, epsilon=epsilon or "1e3/N^4", policy="graded", L=L or 200,
            mu=mu or 1e-3, boundary=Dirichlet(), domain=(-10.0, 10.0), offsets=None)
    else:
        if name == "linear_q2":
            positions = [0.0, d1]
            velocity = lambda t, a, s: np.array([k, k])  # noqa: E731
            T_default = 3.5
        elif name == "sin_q2":
            positions = [0.0, d1]
            velocity = lambda t, a, s: np.full(2, A * np.cos(np.pi * t))  # noqa: E731
            T_default = 4.0
        else:
            positions = [-2.0, 2.0]
            velocity = lambda t, a, s: A * np.cos(np.pi * t) * np.array([1.0, -1.0])  # noqa: E731
            T_default = 4.0
        labc = name == "symmetric_q2_labc"
        spec = _heat_source(
            name, 2, positions, velocity,
            N=N or 150, T=T or T_default, tau=tau or 5e-4, theta=theta or (0.3, 0.3, 0.0, 0.4),
            p=p or 2.0, epsilon=epsilon or 1e-5, policy="blowup", L=L or 100, mu=mu or 1e-3,
            boundary=LABC(s0 if s0 is not None else 1.0, strict_paper_labc) if labc else Dirichlet(),
            domain=None if labc else (-10.0, 10.0), offsets=(4.0, 4.0) if labc else None)

    if boundary is not None:
        kind = boundary.lower()
        if kind not in ("dirichlet", "labc"):
            raise ValueError(f"boundary must be 'dirichlet' or 'labc', not {boundary!r}")
        if name == "example1" and kind == "labc":
            raise ValueError("example1 is posed on the fixed domain [0, 1] with Dirichlet data")
        if kind == "labc" and not isinstance(spec.boundary, LABC):
            spec = replace(spec, boundary=LABC(s0 if s0 is not None else 1.0, strict_paper_labc),
                           domain=None, domain_offsets=tuple(offsets))
        elif kind == "dirichlet" and isinstance(spec.boundary, LABC):
            spec = replace(spec, boundary=Dirichlet(), domain=(-10.0, 10.0), domain_offsets=None)
    if tau is not None:
        spec = replace(spec, tau=tau)
    if epsilon is not None:
        spec = replace(spec, monitor=replace(spec.monitor, epsilon=epsilon))
    if p is not None:
        spec = replace(spec, monitor=replace(spec.monitor, power=p))
    if points_per_subdomain is not None:
        spec = replace(spec, points_per_subdomain=tuple(int(v) for v in points_per_subdomain))
    if extra:
        spec = replace(spec, **extra)
    return validate_problem(spec)
