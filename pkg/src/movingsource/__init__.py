"""Moving-mesh solver for 1-D heat equations with traveling point sources."""

from .core import (
    LABC,
    Dirichlet,
    MeshState,
    MonitorConfig,
    ProblemSpec,
    SolutionState,
    SourceLaws,
    SourceState,
    TimePolicy,
    validate_problem,
)
from .problems import Example1Oracle, make_example
from .simulate import RunReport, run

__all__ = [
    "LABC",
    "Dirichlet",
    "Example1Oracle",
    "MeshState",
    "MonitorConfig",
    "ProblemSpec",
    "RunReport",
    "SolutionState",
    "SourceLaws",
    "SourceState",
    "TimePolicy",
    "make_example",
    "run",
    "validate_problem",
]
