"""Half-space Stokes resolvent/semigroup calculus on locally uniform data,
mild Navier-Stokes solutions, and desk-scale verification of their estimates."""

from .grids import TangentialGrid, VerticalGrid, default_grids
from .fields import Field3D, scale_field
from .norms import UlocSpec, uloc_norm, weak_divergence_residual
from .report import SolveReport

__all__ = [
    "TangentialGrid", "VerticalGrid", "default_grids",
    "Field3D", "scale_field",
    "UlocSpec", "uloc_norm", "weak_divergence_residual",
    "SolveReport",
]

__version__ = "0.1.0"
