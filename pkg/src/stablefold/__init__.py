"""Reflected symmetric stable diffusion on intervals and hypercubes."""

from .errors import (
    InvariantViolation,
    NumericalError,
    ParameterError,
    RegimeError,
    SearchFailure,
    StableFoldError,
)
from .folding import FoldingGeometry, fold_f, tent_g
from .images import (
    GridDensity,
    SmoothInitial,
    periodic_density,
    reflected_density,
    smooth_initial_density,
    wrapped_density,
)
from .stable import StableLaw, sample_stable, stable_density

__version__ = "0.1.0"
