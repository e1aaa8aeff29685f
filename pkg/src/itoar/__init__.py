"""Second-order Krylov bases by TOAR and the improved two-level orthogonal Arnoldi (I-TOAR).

The main entry points are :func:`itoar_run` and :func:`toar_run`, which return a
:class:`CompactArnoldiFactorization`; :mod:`itoar.diagnostics` measures it and
:mod:`itoar.mor` applies it to model-order reduction.
"""

from .core import CompactArnoldiFactorization, OperatorPair, Options, Status, StepKind
from .diagnostics import DiagnosticsReport, backward_error, structure_report
from .errors import (
    BreakdownSignal,
    ConfigError,
    DegenerateColumn,
    IllConditionedWarning,
    InvalidInput,
    IoError,
    ItoarError,
    ParseError,
    PoleHit,
    PseudoInverseUnstable,
    ShiftSingular,
    SingularMatrix,
    SmallDiagonal,
)
from .improved import itoar_run, itoar_step
from .kernels import BACKEND
from .mor import SecondOrderSystem, reduce, shifted_operators, sweep, synth_system
from .toar import toar_run, toar_step

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BreakdownSignal",
    "CompactArnoldiFactorization",
    "ConfigError",
    "DegenerateColumn",
    "DiagnosticsReport",
    "IllConditionedWarning",
    "InvalidInput",
    "IoError",
    "ItoarError",
    "OperatorPair",
    "Options",
    "ParseError",
    "PoleHit",
    "PseudoInverseUnstable",
    "SecondOrderSystem",
    "ShiftSingular",
    "SingularMatrix",
    "SmallDiagonal",
    "Status",
    "StepKind",
    "backward_error",
    "itoar_run",
    "itoar_step",
    "reduce",
    "shifted_operators",
    "structure_report",
    "sweep",
    "synth_system",
    "toar_run",
    "toar_step",
]
