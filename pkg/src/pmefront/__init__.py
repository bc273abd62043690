"""pmefront: a finite-volume laboratory for the porous medium equation with
drift, with free-boundary tracking and quantitative estimate verification."""

from pmefront.drift import DriftSpec
from pmefront.grids import (
    Field,
    GridSpec,
    VectorField,
    density_from_pressure,
    discrete_gradient,
    discrete_laplacian,
    interior_mask,
    mollify,
    positivity_set,
    pressure_from_density,
    sample_linear,
)

__version__ = "0.1.0"

__all__ = [
    "DriftSpec",
    "Field",
    "GridSpec",
    "VectorField",
    "density_from_pressure",
    "discrete_gradient",
    "discrete_laplacian",
    "interior_mask",
    "mollify",
    "positivity_set",
    "pressure_from_density",
    "sample_linear",
    "__version__",
]
