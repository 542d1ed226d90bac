"""Quantum (CTQW) and classical (CTRW) time evolution by spectral summation.

With ``A = Q diag(lambda) Q^T`` the quantum amplitude from node j to node k is

    alpha_kj(t) = sum_n Q[k, n] Q[j, n] exp(-i gamma lambda_n t)

and the classical transition probability replaces the phase by
``exp(-gamma lambda_n t)``. Nothing is integrated in time, so any ``t`` is
reached directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._io import fmt_real, write_csv
from .errors import DomainError
from .lattice import Node, linear_to_node, node_to_linear, validate_node

QUANTUM = "quantum"
CLASSICAL = "classical"
#: roundoff negatives above this are clamped to zero when written out
CLAMP = 1e-12


@dataclass(frozen=True)
class ProbabilityField:
    """Occupation probabilities over the lattice for one source and time.

    ``values[kx - 1, ky - 1]`` is the probability at node ``(kx, ky)``.
    """

    N: int
    source: Node
    time: float
    kind: str
    values: np.ndarray = field(repr=False)

    @classmethod
    def from_linear(cls, N, source, time, kind, flat):
        grid = np.asarray(flat, dtype=float).reshape(N, N).T.copy()
        grid.setflags(write=False)
        return cls(N, Node(*source), float(time), kind, grid)

    def at(self, node) -> float:
        kx, ky = validate_node(node, self.N)
        return float(self.values[kx - 1, ky - 1])

    def linear(self) -> np.ndarray:
        """Values in linear node order."""
        return self.values.T.ravel()

    def total(self) -> float:
        return float(self.values.sum())

    def write_csv(self, path) -> None:
        flat = self.linear()
        rows = []
        for idx, v in enumerate(flat):
            kx, ky = linear_to_node(idx, self.N)
            if -CLAMP < v < 0:
                v = 0.0
            rows.append([str(kx), str(ky), fmt_real(v)])
        comment = (
            f"N={self.N} source={self.source.jx},{self.source.jy} "
            f"t={fmt_real(self.time)} kind={self.kind}"
        )
        write_csv(path, ("kx", "ky", "value"), rows, comment=comment)


def side_length(eig) -> int:
    if eig.side_length is not None:
        return eig.side_length
    N = math.isqrt(eig.n)
    if N * N != eig.n:
        raise DomainError(f"dimension {eig.n} is not a square lattice")
    return N


def _index(eig, node) -> int:
    N = side_length(eig)
    try:
        return node_to_linear(node, N)
    except DomainError as exc:
        raise DomainError(f"{exc} (eigensystem is for N={N})") from None


def _times(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or not np.all(np.isfinite(t)):
        raise DomainError("times must be finite and nonnegative")
    return t


def amplitude(eig, j, k, t: float, gamma: float = 1.0) -> complex:
    """Quantum transition amplitude from ``j`` to ``k`` after time ``t``."""
    weights = eig.row(_index(eig, k)) * eig.row(_index(eig, j))
    t = float(_times(t))
    return complex(np.sum(weights * np.exp(-1j * gamma * eig.values * t)))


def transition_series(eig, j, k, times, gamma: float = 1.0) -> np.ndarray:
    """``|alpha_kj(t)|^2`` for every entry of ``times``."""
    weights = eig.row(_index(eig, k)) * eig.row(_index(eig, j))
    times = _times(times)
    phases = np.exp(-1j * gamma * np.multiply.outer(times, eig.values))
    return np.abs(phases @ weights) ** 2


def quantum_fields(eig, j, times, gamma: float = 1.0) -> np.ndarray:
    """Probabilities at every node (columns, linear order) for each time (rows)."""
    q = eig.require_full()
    src = q[_index(eig, j)]
    times = _times(np.atleast_1d(times))
    arg = gamma * np.multiply.outer(times, eig.values)
    re = (np.cos(arg) * src) @ q.T
    im = (np.sin(arg) * src) @ q.T
    return re * re + im * im


def classical_fields(eig, j, times, gamma: float = 1.0) -> np.ndarray:
    q = eig.require_full()
    src = q[_index(eig, j)]
    times = _times(np.atleast_1d(times))
    decay = np.exp(-gamma * np.multiply.outer(times, eig.values))
    return (decay * src) @ q.T


def quantum_field(eig, j, t: float, gamma: float = 1.0) -> ProbabilityField:
    flat = quantum_fields(eig, j, [t], gamma)[0]
    return ProbabilityField.from_linear(side_length(eig), validate_node(j, side_length(eig)), t, QUANTUM, flat)


def classical_field(eig, j, t: float, gamma: float = 1.0) -> ProbabilityField:
    flat = classical_fields(eig, j, [t], gamma)[0]
    return ProbabilityField.from_linear(side_length(eig), validate_node(j, side_length(eig)), t, CLASSICAL, flat)


def return_series(eig, j, times, gamma: float = 1.0) -> np.ndarray:
    """Rows of ``(t, pi_jj(t))``."""
    times = _times(times)
    if np.any(np.diff(times) < 0):
        raise DomainError("times must be sorted")
    return np.column_stack([times, transition_series(eig, j, j, times, gamma)])


def snapshot_run(eig, j, times, gamma: float = 1.0) -> list[ProbabilityField]:
    N = side_length(eig)
    src = validate_node(j, N)
    flats = quantum_fields(eig, j, times, gamma)
    return [ProbabilityField.from_linear(N, src, t, QUANTUM, f) for t, f in zip(np.atleast_1d(times), flats)]


def time_grid(t_max: float, dt: float) -> np.ndarray:
    """Uniform grid ``0, dt, 2 dt, ...`` up to and including ``t_max`` (within dt/1000)."""
    if not (dt > 0 and t_max >= 0):
        raise DomainError(f"need dt > 0 and t_max >= 0, got t_max={t_max}, dt={dt}")
    steps = int(math.floor(t_max / dt + 1e-3))
    return np.arange(steps + 1) * dt


def local_maxima(values) -> np.ndarray:
    """Indices ``i`` with ``v[i-1] < v[i] >= v[i+1]``."""
    v = np.asarray(values)
    if v.size < 3:
        return np.empty(0, dtype=int)
    inner = (v[1:-1] > v[:-2]) & (v[1:-1] >= v[2:])
    return np.flatnonzero(inner) + 1


def refine_peak(times, values, i: int) -> tuple[float, float]:
    """Vertex of the parabola through samples ``i-1, i, i+1`` (uniform grid)."""
    y0, y1, y2 = values[i - 1], values[i], values[i + 1]
    h = times[i + 1] - times[i]
    curv = y0 - 2 * y1 + y2
    if curv >= 0:
        return float(times[i]), float(y1)
    shift = 0.5 * (y0 - y2) / curv
    return float(times[i] + shift * h), float(y1 - 0.25 * (y0 - y2) * shift)


def first_peak(times, values, min_height: float = 1e-10):
    """First refined local maximum whose height exceeds ``min_height``, or None.

    The floor keeps roundoff ripples (|alpha|^2 ~ 1e-32 before the wave
    arrives) from counting as peaks.
    """
    values = np.asarray(values)
    for i in local_maxima(values):
        if values[i] > min_height:
            return refine_peak(np.asarray(times), values, i)
    return None


def _running_max(values, width: int) -> np.ndarray:
    half = width // 2
    padded = np.pad(values, half, mode="edge")
    windows = np.lib.stride_tricks.sliding_window_view(padded, 2 * half + 1)
    return windows.max(axis=1)


def deviation_onset(times, series, reference, threshold: float = 0.01, window: float | None = None):
    """First time where ``series`` departs from ``reference`` by more than ``threshold``.

    The deviation is measured relative to the local envelope of ``reference``
    (its running maximum over ``window``), so zeros of an oscillating
    reference do not register as infinite relative error. ``window`` defaults
    to pi/2, the spacing of zeros of ``J_0(2t)``. Returns None when the series
    never departs on the grid.
    """
    times = np.asarray(times, dtype=float)
    series = np.asarray(series, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if window is None:
        window = math.pi / 2
    dt = times[1] - times[0]
    envelope = _running_max(reference, max(1, int(round(window / dt))))
    hit = np.flatnonzero(np.abs(series - reference) > threshold * envelope)
    return float(times[hit[0]]) if hit.size else None
