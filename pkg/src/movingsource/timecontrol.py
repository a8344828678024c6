"""Time-step selection, blow-up termination and step rejection."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .core import TimePolicy, TooManyRejections

BLOWUP = "blowup"
FINAL_TIME = "final_time"


@dataclass(frozen=True)
class Terminated:
    reason: str


def grid_time(policy: TimePolicy, n: int) -> float:
    """Reporting time t_n of the uniform or graded grid."""
    T, L = policy.final_time, policy.steps
    if n >= L:
        return T
    if policy.kind == "uniform":
        return T * n / L
    if policy.kind == "graded":
        return T * (n / L) ** 2
    raise ValueError(f"{policy.kind!r} policy has no fixed grid")


def next_dt(policy: TimePolicy, n: int, t_n: float, u_max: float,
            epsilon: float = 0.0) -> Union[float, Terminated]:
    """Step size from t_n, or a Terminated marker.

    For the blow-up rule dt = min(mu, mu / (u_max + epsilon)^2), and the run
    terminates with reason ``"blowup"`` once dt <= Tol.
    """
    T = policy.final_time
    if t_n >= T * (1.0 - 1e-14):
        return Terminated(FINAL_TIME)
    if policy.kind == "blowup":
        dt = min(policy.mu, policy.mu / (u_max + epsilon) ** 2)
        if dt <= policy.terminate_tol:
            return Terminated(BLOWUP)
        return min(dt, T - t_n)
    return grid_time(policy, n + 1) - t_n


class RejectionTracker:
    """Counts consecutive step rejections."""

    def __init__(self, max_rejections: int = 20):
        self.max_rejections = max_rejections
        self.consecutive = 0
        self.total = 0

    def reject(self, dt: float) -> float:
        self.consecutive += 1
        self.total += 1
        if self.consecutive >= self.max_rejections:
            raise TooManyRejections(f"{self.consecutive} consecutive rejected steps, last dt={dt:.3e}")
        return 0.5 * dt

    def accept(self) -> None:
        self.consecutive = 0


def reject_and_retry(dt: float, tracker: RejectionTracker) -> float:
    """Halved step after a rejection; raises TooManyRejections at the limit."""
    return tracker.reject(dt)
