"""Analytic baselines: Bloch spectrum, finite periodic amplitudes, bulk Bessel limit.

Bessel functions of the first kind are evaluated by Miller's downward
recurrence, normalised with ``J_0 + 2 * sum_m J_2m = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UnsupportedRangeError
from .lattice import validate_node

MAX_ORDER = 200
MAX_ARGUMENT = 500.0
_BIG = 1e250
_TINY = 1e-6


@dataclass(frozen=True)
class BlochMode:
    n: int
    l: int
    N: int

    @property
    def theta_x(self) -> float:
        return 2 * math.pi * self.n / self.N

    @property
    def theta_y(self) -> float:
        return 2 * math.pi * self.l / self.N

    @property
    def energy(self) -> float:
        return 4 - 2 * math.cos(self.theta_x) - 2 * math.cos(self.theta_y)


def _mode_energies(N: int) -> np.ndarray:
    """``E[n-1, l-1]`` for quantum numbers n, l in 1..N."""
    theta = 2 * np.pi * np.arange(1, N + 1) / N
    c = np.cos(theta)
    return 4 - 2 * c[:, None] - 2 * c[None, :]


def bloch_spectrum(N: int) -> np.ndarray:
    if N < 1:
        raise DomainError(f"N must be positive, got {N}")
    return np.sort(_mode_energies(N).ravel())


def pbc_amplitude(N: int, j, k, t, gamma: float = 1.0):
    """Transition amplitude on the N x N torus, summed exactly over all N^2 modes.

    ``t`` may be a scalar or an array; the result has the same shape.
    """
    jx, jy = validate_node(j, N)
    kx, ky = validate_node(k, N)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("times must be nonnegative")
    theta = 2 * np.pi * np.arange(1, N + 1) / N
    shift = np.exp(-1j * theta[:, None] * (kx - jx)) * np.exp(-1j * theta[None, :] * (ky - jy))
    energies = _mode_energies(N).ravel()
    phase = np.exp(-1j * gamma * np.multiply.outer(t, energies))
    return phase @ shift.ravel() / N**2


def _check_envelope(order: int, x) -> None:
    if abs(order) > MAX_ORDER:
        raise UnsupportedRangeError(f"|order| = {abs(order)} exceeds {MAX_ORDER}")
    x = np.asarray(x)
    if x.size and (np.any(x < 0) or np.any(x > MAX_ARGUMENT) or not np.all(np.isfinite(x))):
        raise UnsupportedRangeError(f"argument outside [0, {MAX_ARGUMENT}]")


def _miller(nmax: int, x: np.ndarray) -> np.ndarray:
    """Rows 0..nmax of J_n(x) for a 1-d array of nonnegative x."""
    out = np.zeros((nmax + 1, x.size))
    tiny = x < _TINY
    # two series terms are exact to double precision here and avoid 2/x overflow
    half = x[tiny] / 2
    term = np.ones_like(half)
    for n in range(nmax + 1):
        out[n, tiny] = term * (1 - half * half / (n + 1))
        term = term * half / (n + 1)
    zero = tiny
    xs = x[~zero]
    if xs.size == 0:
        return out
    top = max(nmax, math.ceil(xs.max()))
    start = 2 * ((top + 30 + int(math.sqrt(40 * max(top, 1)))) // 2)
    two_over_x = 2.0 / xs
    acc = np.zeros((nmax + 1, xs.size))
    nxt = np.zeros(xs.size)
    cur = np.full(xs.size, 1e-30)
    norm = np.zeros(xs.size)
    for k in range(start, 0, -1):
        prev = k * two_over_x * cur - nxt
        nxt, cur = cur, prev
        order = k - 1
        if order <= nmax:
            acc[order] = cur
        if order == 0:
            norm += cur
        elif order % 2 == 0:
            norm += 2 * cur
        big = np.abs(cur) > _BIG
        if big.any():
            cur[big] /= _BIG
            nxt[big] /= _BIG
            norm[big] /= _BIG
            acc[:, big] /= _BIG
    out[:, ~zero] = acc / norm
    return out


def bessel_j_orders(nmax: int, x: float) -> np.ndarray:
    """``J_0(x) .. J_nmax(x)`` from a single downward sweep."""
    _check_envelope(nmax, x)
    return _miller(int(nmax), np.array([float(x)]))[:, 0]


def bessel_j(order: int, x):
    """Bessel function of the first kind of integer order; ``x`` may be an array."""
    if int(order) != order:
        raise DomainError(f"order must be an integer, got {order!r}")
    order = int(order)
    _check_envelope(order, x)
    arr = np.asarray(x, dtype=float)
    n = abs(order)
    val = _miller(n, arr.ravel())[n].reshape(arr.shape)
    if order < 0 and n % 2:
        val = -val
    return float(val) if val.ndim == 0 else val


def bulk_probability(j, k, t, gamma: float = 1.0):
    """Infinite-lattice transition probability ``[J_dx(2 gamma t) J_dy(2 gamma t)]^2``."""
    jx, jy = j
    kx, ky = k
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("times must be nonnegative")
    x = 2 * gamma * t
    val = (bessel_j(kx - jx, x) * bessel_j(ky - jy, x)) ** 2
    return float(val) if np.ndim(val) == 0 else val
