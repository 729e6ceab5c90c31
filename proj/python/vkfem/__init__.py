"""Morley finite elements for the von Karman obstacle problem."""

from ._core import (
    Expression,
    ParseError,
    Triangulation,
    SolveResult,
    eoc,
    check_smallness,
    mesh_statistics,
    make_lshape,
    make_square,
    preset_names,
    red_refine,
    refinement_study,
    scaling_sweep,
    solve,
)

__all__ = [
    "Expression",
    "ParseError",
    "Triangulation",
    "SolveResult",
    "eoc",
    "check_smallness",
    "mesh_statistics",
    "make_lshape",
    "make_square",
    "preset_names",
    "red_refine",
    "refinement_study",
    "scaling_sweep",
    "solve",
]
