"""Curvature flow of planar triods and its singularity-analysis monitors."""

from .geometry import DomainShape, SampledCurve, Triod, differentiate
from .kernels import BACKEND
from .solver import FlowState, SolverConfig, StopKind, StopReason, run, step
from .steiner import fermat_point

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "DomainShape",
    "FlowState",
    "SampledCurve",
    "SolverConfig",
    "StopKind",
    "StopReason",
    "Triod",
    "differentiate",
    "fermat_point",
    "run",
    "step",
]
