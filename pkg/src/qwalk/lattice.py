"""Square-lattice networks: node labels, adjacency matrices and symmetry maps.

Nodes are labelled ``(jx, jy)`` with ``1 <= jx, jy <= N``. They are laid out
row-major starting from ``(1, 1)``, so node ``(jx, jy)`` has linear index
``(jy - 1) * N + (jx - 1)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DomainError, UnsupportedConfigurationError


class Boundary(str, enum.Enum):
    OPEN = "open"
    PERIODIC = "periodic"


class Node(NamedTuple):
    jx: int
    jy: int


@dataclass(frozen=True)
class LatticeSpec:
    """Side length ``N``, boundary condition and per-bond transmission rate."""

    side_length: int
    boundary: Boundary = Boundary.OPEN
    rate: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "boundary", Boundary(self.boundary))
        if int(self.side_length) != self.side_length or self.side_length < 1:
            raise DomainError(f"side length must be a positive integer, got {self.side_length!r}")
        if not self.rate > 0:
            raise DomainError(f"transmission rate must be positive, got {self.rate!r}")
        if self.boundary is Boundary.PERIODIC and self.side_length < 3:
            raise UnsupportedConfigurationError(
                f"periodic boundaries need N >= 3 (N={self.side_length} would create double bonds)"
            )

    @property
    def n_nodes(self) -> int:
        return self.side_length**2


@dataclass(frozen=True)
class AdjacencyMatrix:
    """Dense connectivity matrix ``A`` of a lattice; the Hamiltonian is ``rate * A``."""

    spec: LatticeSpec
    entries: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def side_length(self) -> int:
        return self.spec.side_length

    def functionality(self) -> np.ndarray:
        """Number of bonds at each node, in linear order."""
        return np.diag(self.entries).astype(int)

    def write_triplets(self, path) -> None:
        """Dump every entry as ``row col value``, one per line, row-major."""
        a = self.entries
        with open(path, "w", newline="\n") as fh:
            for r in range(a.shape[0]):
                for c in range(a.shape[1]):
                    fh.write(f"{r} {c} {a[r, c]:.17g}\n")


@dataclass(frozen=True)
class SpecialNodes:
    corner: Node
    opposite_corner: Node
    middle: Node | None

    @property
    def has_middle(self) -> bool:
        return self.middle is not None


def validate_node(node, N: int) -> Node:
    try:
        jx, jy = node
    except (TypeError, ValueError):
        raise DomainError(f"node must be a pair (jx, jy), got {node!r}") from None
    if int(jx) != jx or int(jy) != jy:
        raise DomainError(f"node coordinates must be integers, got {node!r}")
    if not (1 <= jx <= N and 1 <= jy <= N):
        raise DomainError(f"node {tuple(node)} outside 1..{N}")
    return Node(int(jx), int(jy))


def node_to_linear(node, N: int) -> int:
    jx, jy = validate_node(node, N)
    return (jy - 1) * N + (jx - 1)


def linear_to_node(index: int, N: int) -> Node:
    if not 0 <= index < N * N:
        raise DomainError(f"linear index {index} outside 0..{N * N - 1}")
    jy, jx = divmod(int(index), N)
    return Node(jx + 1, jy + 1)


def mirror(node, N: int) -> Node:
    """Image of ``node`` under inversion through the lattice centre."""
    jx, jy = validate_node(node, N)
    return Node(N + 1 - jx, N + 1 - jy)


def mirror_permutation(N: int) -> np.ndarray:
    """``perm[l]`` is the linear index of the mirror of node ``l``."""
    return np.arange(N * N)[::-1].copy()


def special_nodes(N: int) -> SpecialNodes:
    if N < 1:
        raise DomainError(f"N must be positive, got {N}")
    middle = Node((N + 1) // 2, (N + 1) // 2) if N % 2 == 1 else None
    return SpecialNodes(Node(1, 1), Node(N, N), middle)


def build_adjacency(spec: LatticeSpec) -> AdjacencyMatrix:
    N = spec.side_length
    periodic = spec.boundary is Boundary.PERIODIC
    a = np.zeros((N * N, N * N))
    for jy in range(N):
        for jx in range(N):
            here = jy * N + jx
            for dx, dy in ((1, 0), (0, 1)):
                x, y = jx + dx, jy + dy
                if periodic:
                    x, y = x % N, y % N
                elif x >= N or y >= N:
                    continue
                there = y * N + x
                a[here, there] = a[there, here] = -1.0
    a[np.diag_indices_from(a)] = -a.sum(axis=1)
    a.setflags(write=False)
    return AdjacencyMatrix(spec, a)
