"""Long-time averaged (limiting) probabilities of the quantum walk.

Averaging ``|alpha_kj(t)|^2`` over infinite time kills every cross term
between distinct eigenvalues, leaving

    chi_kj = sum over degeneracy classes C of | sum_{n in C} Q[k, n] Q[j, n] |^2 .

``limiting_by_time_average`` computes the same object by brute-force
quadrature and serves as the independent check.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._io import fmt_bool, fmt_real, write_csv
from .dynamics import quantum_fields, side_length, time_grid
from .errors import DomainError, InsufficientDataError, NumericalFailure
from .lattice import Boundary, LatticeSpec, Node, build_adjacency, linear_to_node, node_to_linear, special_nodes, validate_node
from .spectral import EigenSystem, decompose, default_tolerance, group_degeneracies

DEFAULT_ETA = 1e-6


@dataclass(frozen=True)
class LimitingField:
    """``values[kx - 1, ky - 1]`` is the limiting probability at node ``(kx, ky)``."""

    N: int
    source: Node
    values: np.ndarray = field(repr=False)

    @classmethod
    def from_linear(cls, N, source, flat):
        grid = np.asarray(flat, dtype=float).reshape(N, N).T.copy()
        grid.setflags(write=False)
        return cls(N, Node(*source), grid)

    def at(self, node) -> float:
        kx, ky = validate_node(node, self.N)
        return float(self.values[kx - 1, ky - 1])

    def linear(self) -> np.ndarray:
        return self.values.T.ravel()

    def write_csv(self, path) -> None:
        rows = []
        for idx, v in enumerate(self.linear()):
            kx, ky = linear_to_node(idx, self.N)
            rows.append([str(kx), str(ky), fmt_real(max(v, 0.0))])
        comment = f"N={self.N} source={self.source.jx},{self.source.jy} kind=limiting"
        write_csv(path, ("kx", "ky", "value"), rows, comment=comment)


@dataclass(frozen=True)
class AsymmetryRecord:
    N: int
    chi_cc: float
    chi_oc: float
    diff_scaled: float
    asymmetric: bool
    tolerance_sensitive: bool = False


def _check_partition(eig, partition) -> None:
    if partition.size != eig.n:
        raise DomainError(f"partition covers {partition.size} eigenvalues, eigensystem has {eig.n}")


def limiting_values(eig: EigenSystem, partition, j, targets) -> np.ndarray:
    """``chi_kj`` for each linear index in ``targets``; works with row-restricted eigensystems."""
    _check_partition(eig, partition)
    N = side_length(eig)
    src = eig.row(node_to_linear(j, N))
    weights = np.stack([eig.row(int(k)) for k in targets]) * src
    grouped = np.add.reduceat(weights, partition.starts, axis=1)
    return np.sum(grouped * grouped, axis=1)


def limiting_field(eig: EigenSystem, partition, j) -> LimitingField:
    _check_partition(eig, partition)
    q = eig.require_full()
    N = side_length(eig)
    src = validate_node(j, N)
    weights = q * q[node_to_linear(src, N)]
    grouped = np.add.reduceat(weights, partition.starts, axis=1)
    return LimitingField.from_linear(N, src, np.sum(grouped * grouped, axis=1))


def limiting_by_time_average(eig: EigenSystem, j, T: float, dt: float = 0.01, gamma: float = 1.0, chunk: int = 4096) -> LimitingField:
    """Trapezoidal average of the quantum field over ``[0, T]``."""
    if not (T > 0 and 0 < dt <= T):
        raise DomainError(f"need T > 0 and 0 < dt <= T, got T={T}, dt={dt}")
    N = side_length(eig)
    src = validate_node(j, N)
    times = time_grid(T, dt)
    total = np.zeros(eig.n)
    for start in range(0, times.size, chunk):
        total += quantum_fields(eig, src, times[start:start + chunk], gamma).sum(axis=0)
    ends = quantum_fields(eig, src, times[[0, -1]], gamma)
    total -= 0.5 * ends.sum(axis=0)
    return LimitingField.from_linear(N, src, total / (times.size - 1))


def classical_limit(eig: EigenSystem, partition, j, targets) -> np.ndarray:
    """Long-time classical probabilities: projection onto the zero-eigenvalue class."""
    _check_partition(eig, partition)
    N = side_length(eig)
    null = partition.classes[0]
    src = eig.row(node_to_linear(j, N))[null.start:null.stop]
    return np.array([eig.row(int(k))[null.start:null.stop] @ src for k in targets])


def _asymmetry(N: int, tau, eta: float) -> AsymmetryRecord:
    A = build_adjacency(LatticeSpec(N, Boundary.OPEN))
    corner, opposite = 0, N * N - 1
    try:
        eig = decompose(A, rows=sorted({corner, opposite}))
    except NumericalFailure as exc:
        exc.size = N
        raise
    base = default_tolerance(eig.norm_max) if tau is None else tau

    def verdict(t):
        part = group_degeneracies(eig, t)
        cc, oc = limiting_values(eig, part, (1, 1), [corner, opposite])
        return cc, oc, abs(cc - oc) * N * N > eta

    cc, oc, asym = verdict(base)
    sensitive = any(verdict(base * f)[2] != asym for f in (10.0, 0.1))
    return AsymmetryRecord(N, float(cc), float(oc), float((cc - oc) * N * N), bool(asym), sensitive)


def default_jobs() -> int:
    env = os.environ.get("QWALK_JOBS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def asymmetry_scan(n_min: int = 1, n_max: int = 60, gamma: float = 1.0, eta: float = DEFAULT_ETA,
                   tau: float | None = None, jobs: int = 1, upper_limit: int = 60) -> list[AsymmetryRecord]:
    """Corner-vs-opposite-corner limiting probabilities for each N in ``[n_min, n_max]``.

    ``gamma`` does not enter: the long-time average is rate independent.
    Records come back in N order whatever the completion order.
    """
    if not (1 <= n_min <= n_max <= upper_limit):
        raise DomainError(f"need 1 <= n_min <= n_max <= {upper_limit}, got {n_min}..{n_max}")
    if not gamma > 0 or not eta > 0:
        raise DomainError("gamma and eta must be positive")
    sizes = range(n_min, n_max + 1)
    if jobs <= 1:
        return [_asymmetry(N, tau, eta) for N in sizes]
    # biggest lattices first so the pool stays busy
    order = sorted(sizes, reverse=True)
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        results = dict(zip(order, pool.map(_asymmetry, order, [tau] * len(order), [eta] * len(order))))
    return [results[N] for N in sizes]


def write_scan_csv(records, path) -> None:
    header = ("N", "chi_cc", "chi_oc", "diff_scaled", "asymmetric", "tolerance_sensitive")
    rows = [
        [str(r.N), fmt_real(r.chi_cc), fmt_real(r.chi_oc), fmt_real(r.diff_scaled),
         fmt_bool(r.asymmetric), fmt_bool(r.tolerance_sensitive)]
        for r in records
    ]
    write_csv(path, header, rows)


@dataclass(frozen=True)
class LogLogFit:
    slope: float
    intercept: float
    residual: float
    points: int


def fit_loglog(sizes, values) -> LogLogFit:
    """Least-squares line through ``(log N, log value)``; residual is the RMS misfit."""
    x = np.log(np.asarray(sizes, dtype=float))
    y = np.log(np.asarray(values, dtype=float))
    if x.size < 3:
        raise InsufficientDataError(f"need at least 3 points for a fit, got {x.size}")
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return LogLogFit(float(slope), float(intercept), resid, int(x.size))


@dataclass(frozen=True)
class ScalingPoint:
    N: int
    chi_oc: float
    chi_mm: float
    classical: float


@dataclass(frozen=True)
class ScalingResult:
    points: list
    fit_oc: LogLogFit
    fit_mm: LogLogFit
    fit_classical: LogLogFit


def _scaling_point(N: int, tau) -> ScalingPoint:
    if N % 2 == 0:
        raise DomainError(f"the middle node is defined only for odd N, got {N}")
    marks = special_nodes(N)
    c, oc, m = (node_to_linear(x, N) for x in (marks.corner, marks.opposite_corner, marks.middle))
    eig = decompose(build_adjacency(LatticeSpec(N)), rows=sorted({c, oc, m}))
    part = group_degeneracies(eig, tau)
    chi_oc = limiting_values(eig, part, marks.corner, [oc])[0]
    chi_mm = limiting_values(eig, part, marks.middle, [m])[0]
    classical = classical_limit(eig, part, marks.corner, [oc])[0]
    return ScalingPoint(N, float(chi_oc), float(chi_mm), float(classical))


def scaling_series(sizes, gamma: float = 1.0, tau: float | None = None, jobs: int = 1) -> ScalingResult:
    """Limiting probabilities at the opposite corner and the middle over odd ``sizes``.

    Also fits log-log slopes, including the classical equipartition value
    ``N^-2`` as a baseline.
    """
    sizes = sorted(int(N) for N in sizes)
    if len(sizes) < 3:
        raise InsufficientDataError(f"need at least 3 sizes, got {len(sizes)}")
    if not gamma > 0:
        raise DomainError("gamma must be positive")
    if jobs <= 1:
        points = [_scaling_point(N, tau) for N in sizes]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            points = list(pool.map(_scaling_point, sizes, [tau] * len(sizes)))
    Ns = [p.N for p in points]
    return ScalingResult(
        points,
        fit_loglog(Ns, [p.chi_oc for p in points]),
        fit_loglog(Ns, [p.chi_mm for p in points]),
        fit_loglog(Ns, [p.classical for p in points]),
    )


def star_contrast(field: LimitingField, centre) -> tuple[float, float]:
    """Mean limiting probability on the star through ``centre`` and off it.

    The star is the union of the row, the column and both diagonals through
    ``centre``; the centre itself is left out of both means.
    """
    cx, cy = validate_node(centre, field.N)
    kx, ky = np.meshgrid(np.arange(1, field.N + 1), np.arange(1, field.N + 1), indexing="ij")
    dx, dy = kx - cx, ky - cy
    on = (dx == 0) | (dy == 0) | (np.abs(dx) == np.abs(dy))
    on[cx - 1, cy - 1] = False
    off = ~on
    off[cx - 1, cy - 1] = False
    return float(field.values[on].mean()), float(field.values[off].mean())
