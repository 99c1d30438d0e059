"""Simulation and Poincare analysis of a compass walker with a triggered,
precompressed ankle spring."""

from .model import (
    ChainGeometryError,
    DoubleSupportState,
    ImpulsiveParams,
    LiftoffPoint,
    ModelParams,
    PushoffState,
    SingleSupportState,
    StrideTrace,
    total_energy,
)
from .poincare import (
    FallBeforeReturn,
    FixedPointRecord,
    JacobianUndefined,
    NoConvergence,
    boa_scan,
    detect_period,
    find_fixed_point,
    jacobian,
    return_map,
)
from .simulator import IntegratorConfig, StrideResult, simulate, step_stride
from .sweep import SweepSpec, baseline_frontier, run_sweep

__all__ = [
    "ChainGeometryError",
    "DoubleSupportState",
    "FallBeforeReturn",
    "FixedPointRecord",
    "ImpulsiveParams",
    "IntegratorConfig",
    "JacobianUndefined",
    "LiftoffPoint",
    "ModelParams",
    "NoConvergence",
    "PushoffState",
    "SingleSupportState",
    "StrideResult",
    "StrideTrace",
    "SweepSpec",
    "baseline_frontier",
    "boa_scan",
    "detect_period",
    "find_fixed_point",
    "jacobian",
    "return_map",
    "run_sweep",
    "simulate",
    "step_stride",
    "total_energy",
]
