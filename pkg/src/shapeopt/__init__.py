"""Shape optimization over convex planar domains of prescribed area.

The package couples exact convex-polygon geometry, a P1 finite element solver
for Dirichlet eigenvalue and source problems, Newton's resistance functional
and a projected derivative-free optimizer over the class of convex bodies of
fixed area inside a box.
"""
__version__ = "0.1.0"

from .errors import InputError, NumericalError, ShapeOptError
from .expr import CoefficientField, parse_expr
from .fem import Spectrum, eigenvalues, solve_source
from .functionals import RadialProfile, resistance_boundary_axisym, resistance_profile
from .geometry import Box, ConvexPolygon, hausdorff_distance, polygon_from_vertices, project_to_class
from .optimizer import ShapeProblem, blaschke_select, newton_optimize, optimize

__all__ = [
    "Box",
    "CoefficientField",
    "ConvexPolygon",
    "InputError",
    "NumericalError",
    "RadialProfile",
    "ShapeOptError",
    "ShapeProblem",
    "Spectrum",
    "blaschke_select",
    "eigenvalues",
    "hausdorff_distance",
    "newton_optimize",
    "optimize",
    "parse_expr",
    "polygon_from_vertices",
    "project_to_class",
    "resistance_boundary_axisym",
    "resistance_profile",
    "solve_source",
]
