"""Mixed-norm harmonic analysis on uniform grids."""

from ._backend import get_backend, set_backend, use_backend
from .grid import Cube, GridFunction, GridSpec, Rectangle, integrate, restrict, sample, dilate
from .mixed_norms import (
    AdmissibilityError,
    CubeFamily,
    ExponentVector,
    MorreyParams,
    classical_morrey_norm,
    conjugate,
    dual_sequence,
    equivalent_morrey_norm,
    mixed_lebesgue_norm,
    mixed_morrey_norm,
    mixed_sequence_norm,
    weighted_lp_norm,
)

__version__ = "0.1.0"
