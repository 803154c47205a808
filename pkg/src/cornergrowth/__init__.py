"""Inhomogeneous corner growth models: shape functions, simulation and checks."""

__version__ = "0.1.0"

from .distributions import (  # noqa: E402
    DomainError,
    MomentTransform,
    PointMass,
    Reciprocal,
    ShiftedPower,
    TabulatedDensity,
    Uniform,
    geometric_transforms,
    marginal_from_dict,
    moment,
    sample,
)
from .rng import seed_derive  # noqa: E402
from .sequences import ParameterPair, SequenceModel, generate  # noqa: E402
from .lpp import apply_F, last_passage, last_passage_row, last_passage_with_boundary, sample_weights  # noqa: E402
from .shape import (  # noqa: E402
    ShapeProblem,
    boundary_values,
    closed_form_geometric_reciprocal,
    closed_form_uniform,
    critical_cone,
    g_z_value,
    gradient,
    level_set,
    minimizer,
    shape_value,
)

__all__ = [
    "__version__",
    "DomainError",
    "MomentTransform",
    "PointMass",
    "Reciprocal",
    "ShiftedPower",
    "TabulatedDensity",
    "Uniform",
    "geometric_transforms",
    "marginal_from_dict",
    "moment",
    "sample",
    "seed_derive",
    "ParameterPair",
    "SequenceModel",
    "generate",
    "apply_F",
    "last_passage",
    "last_passage_row",
    "last_passage_with_boundary",
    "sample_weights",
    "ShapeProblem",
    "boundary_values",
    "closed_form_geometric_reciprocal",
    "closed_form_uniform",
    "critical_cone",
    "g_z_value",
    "gradient",
    "level_set",
    "minimizer",
    "shape_value",
]
