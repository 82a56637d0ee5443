"""Tail bounds from bounded zero-bias couplings, with exact oracles."""

from .bounds import BoundInput, BoundKind, BoundValue
from .errors import ConsistencyError, DomainError, ResourceError, UnsupportedError
from .permstat import (ConstantOnCycleType, CycleType, FpfInvolution, SquareMatrix,
                       UniformCycleType, UniformSn)
from .zerobias import DiscreteDist, PiecewiseDensity

__version__ = "0.1.0"
