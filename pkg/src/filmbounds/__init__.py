"""Test displacement fields and energy scaling laws for a compressed elastic
film delaminating from a substrate."""

__version__ = "0.1.0"

from .field import DisplacementField, EnergyBreakdown, read_field, write_field
from .grid import Grid
from .params import Params, PhysicalParams, rescale_physical

__all__ = [
    "DisplacementField",
    "EnergyBreakdown",
    "Grid",
    "Params",
    "PhysicalParams",
    "read_field",
    "rescale_physical",
    "write_field",
    "__version__",
]
