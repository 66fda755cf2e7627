from ._core import (
    ExperimentConfig,
    RobinCoefficient,
    SolverError,
    ValidationError,
    estimate_rate,
    forward,
    invert,
    mesh,
    reconstruction_svg,
    relative_error,
    sweep,
)

__all__ = [
    "ExperimentConfig",
    "RobinCoefficient",
    "SolverError",
    "ValidationError",
    "estimate_rate",
    "forward",
    "invert",
    "mesh",
    "reconstruction_svg",
    "relative_error",
    "sweep",
]
