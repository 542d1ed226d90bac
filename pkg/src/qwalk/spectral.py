"""Dense symmetric eigendecomposition and degeneracy clustering.

The solver is the classical two-phase scheme: Householder reduction to a
symmetric tridiagonal matrix, then implicit-shift QL iteration. Eigenvectors
can be accumulated in full or only for selected rows of ``Q``, which is all
the limiting-probability scan needs and costs O(n^2) instead of O(n^3).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from ._io import fmt_real, write_csv
from .errors import DomainError, NumericalFailure
from .lattice import AdjacencyMatrix

#: containment slack for the [0, 8] spectral bounds of lattice matrices
SPECTRUM_SLACK = 1e-8


@dataclass(frozen=True)
class EigenSystem:
    """Ascending eigenvalues and (some or all) rows of the eigenvector matrix.

    ``vectors[r, n]`` is component ``rows[r]`` of eigenvector ``n``; when
    ``rows`` is None every row is present and ``vectors`` is ``Q`` itself.
    """

    values: np.ndarray
    vectors: np.ndarray | None = field(default=None, repr=False)
    rows: tuple[int, ...] | None = None
    norm_max: float = 1.0
    side_length: int | None = None

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def is_full(self) -> bool:
        return self.vectors is not None and self.rows is None

    def row(self, index: int) -> np.ndarray:
        """Components of all eigenvectors at linear node ``index``."""
        if self.vectors is None:
            raise DomainError("eigenvectors were not computed")
        if not 0 <= index < self.n:
            raise DomainError(f"node index {index} outside 0..{self.n - 1}")
        if self.rows is None:
            return self.vectors[index]
        try:
            return self.vectors[self.rows.index(index)]
        except ValueError:
            raise DomainError(f"row {index} was not retained; have {self.rows}") from None

    def require_full(self) -> np.ndarray:
        if not self.is_full:
            raise DomainError("operation needs the full eigenvector matrix")
        return self.vectors


@dataclass(frozen=True)
class DegeneracyPartition:
    """Consecutive index ranges of numerically equal sorted eigenvalues."""

    bounds: tuple[int, ...]
    tolerance: float

    @property
    def classes(self) -> list[range]:
        b = self.bounds
        return [range(b[i], b[i + 1]) for i in range(len(b) - 1)]

    @property
    def starts(self) -> np.ndarray:
        return np.asarray(self.bounds[:-1], dtype=np.intp)

    @property
    def size(self) -> int:
        return self.bounds[-1]

    def __len__(self) -> int:
        return len(self.bounds) - 1


def _as_matrix(A):
    if isinstance(A, AdjacencyMatrix):
        return A.entries, A.side_length
    a = np.asarray(A, dtype=float)
    return a, None


def default_tolerance(norm_max: float) -> float:
    return 1e-8 * max(1.0, norm_max)


def decompose(A, *, rows=None, vectors: bool = True, max_iter: int = 30) -> EigenSystem:
    """Eigen-decompose a real symmetric matrix.

    ``rows`` restricts eigenvector accumulation to the listed row indices;
    ``vectors=False`` returns eigenvalues only.
    """
    a, N = _as_matrix(A)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {a.shape}")
    if not np.array_equal(a, a.T):
        raise DomainError("matrix is not symmetric")
    n = a.shape[0]
    norm_max = float(np.abs(a).max()) if n else 0.0
    # power-of-two scaling is exact and keeps tiny or huge inputs away from under/overflow
    scale = 2.0 ** round(np.log2(norm_max)) if norm_max > 0 else 1.0
    work = np.array(a, dtype=np.float64, order="C") / scale
    d = np.empty(n)
    e = np.empty(n)
    beta = np.zeros(n)
    _kernels.tridiagonalize(work, d, e, beta)

    kept = None
    if not vectors:
        zt = np.zeros((n, 0))
    elif rows is None:
        zt = np.empty((n, n))
        _kernels.accumulate_transpose(work, beta, zt)
    else:
        kept = tuple(int(r) for r in rows)
        if any(not 0 <= r < n for r in kept):
            raise DomainError(f"rows {kept} outside 0..{n - 1}")
        zt = np.empty((n, len(kept)))
        _kernels.transformed_rows(work, beta, np.asarray(kept, dtype=np.int64), zt)

    failed = _kernels.tridiagonal_ql(d, e, zt, max_iter)
    if failed >= 0:
        raise NumericalFailure(
            f"QL iteration did not converge for eigenvalue {failed} within {max_iter} sweeps",
            residual=float(np.abs(e).max()) * scale,
            size=N,
        )
    order = np.argsort(d, kind="stable")
    values = d[order] * scale
    values.setflags(write=False)
    q = None
    if vectors:
        q = np.ascontiguousarray(zt[order].T)
        q.setflags(write=False)
    return EigenSystem(values, q, kept, norm_max, N)


def eigenvalues(A) -> np.ndarray:
    return decompose(A, vectors=False).values


def group_degeneracies(eig, tau: float | None = None) -> DegeneracyPartition:
    """Gap clustering: a new class starts wherever consecutive values differ by more than ``tau``.

    Close values chain together, so a class can span more than ``tau`` in
    total when its members are spaced by less than ``tau`` each.
    """
    if isinstance(eig, EigenSystem):
        values = eig.values
        if tau is None:
            tau = default_tolerance(eig.norm_max)
    else:
        values = np.asarray(eig, dtype=float)
        if tau is None:
            tau = default_tolerance(1.0)
    if not tau > 0:
        raise DomainError(f"degeneracy tolerance must be positive, got {tau}")
    if np.any(np.diff(values) < 0):
        raise DomainError("eigenvalues must be sorted ascending")
    cuts = np.flatnonzero(np.diff(values) > tau) + 1
    bounds = (0, *cuts.tolist(), values.shape[0])
    return DegeneracyPartition(tuple(int(b) for b in bounds), float(tau))


def write_spectrum_csv(values, path) -> None:
    write_csv(path, ("n", "lambda"), ([str(i), fmt_real(v)] for i, v in enumerate(values)))
