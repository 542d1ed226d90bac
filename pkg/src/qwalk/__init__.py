"""Continuous-time quantum and classical walks on square-lattice networks."""

__version__ = "0.1.0"

from .errors import (
    DomainError,
    InsufficientDataError,
    NumericalFailure,
    QWalkError,
    UnsupportedConfigurationError,
    UnsupportedRangeError,
)
from .lattice import Boundary, LatticeSpec, Node, build_adjacency, mirror, node_to_linear, special_nodes
from .spectral import decompose, group_degeneracies

__all__ = [
    "Boundary",
    "DomainError",
    "InsufficientDataError",
    "LatticeSpec",
    "Node",
    "NumericalFailure",
    "QWalkError",
    "UnsupportedConfigurationError",
    "UnsupportedRangeError",
    "build_adjacency",
    "decompose",
    "group_degeneracies",
    "mirror",
    "node_to_linear",
    "special_nodes",
]
