"""Exact rational tools for two-party no-signaling boxes, wirings and their closure properties."""
from .box import Box, InvalidMixtureError, OutsidePolytopeError, correlators, mix, validate
from .geometry import LinearFunctional, ParameterError, VPolytope, in_hull
from .wiring import ArityError, PartyStrategy, Wiring, apply_wiring

__version__ = "0.1.0"

__all__ = [
    "ArityError", "Box", "InvalidMixtureError", "LinearFunctional", "OutsidePolytopeError",
    "ParameterError", "PartyStrategy", "VPolytope", "Wiring", "apply_wiring", "correlators",
    "in_hull", "mix", "validate",
]
