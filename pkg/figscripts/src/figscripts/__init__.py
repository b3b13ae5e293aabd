"""Figures from qdcascade artifact files.

Everything here reads the documented CSV/JSON artifacts; nothing imports
or runs the simulator itself.
"""
from .schema import SchemaError, read_table, read_tpdm
from .recipes import RECIPES, FigureRecipe, render

__all__ = [
    "FigureRecipe",
    "RECIPES",
    "SchemaError",
    "read_table",
    "read_tpdm",
    "render",
]

__version__ = "0.1.0"
