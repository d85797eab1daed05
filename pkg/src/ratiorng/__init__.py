"""Ratio transformation of random number generators, with exact theory and tests."""

from .core import (
    ContractViolation,
    EvaluationMode,
    ModeKind,
    ModulusContext,
    RatioKind,
    RatioOutput,
    direct2_transform,
    direct_transform,
    generate,
    next_output,
    ratio_transform,
)
from .generators import TABLE1, GeneratorSpec, build, detect_period, period_pair_length

__all__ = [
    "ContractViolation", "EvaluationMode", "ModeKind", "ModulusContext", "RatioKind",
    "RatioOutput", "direct2_transform", "direct_transform", "generate", "next_output",
    "ratio_transform", "TABLE1", "GeneratorSpec", "build", "detect_period",
    "period_pair_length",
]
