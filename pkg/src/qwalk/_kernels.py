"""Compiled kernels for the dense symmetric eigensolver.

Householder reduction to tridiagonal form followed by implicit-shift QL.
All matrices are row-major; eigenvector bookkeeping is done on the
*transposed* eigenvector matrix so every plane rotation touches two
contiguous rows.
"""

import math

import numba
import numpy as np

# inputs are pre-scaled to max |a_ij| ~ 1, so anything this small is noise
_NEGLIGIBLE = 1e-290


@numba.njit(cache=True)
def _make_reflector(a, k, n):
    # Householder vector for row k, columns k+1..n-1, stored in place with a
    # unit leading entry. Returns (alpha, beta): H = I - beta v v^T maps x to
    # alpha e_1, beta in [1, 2] (or 0 when x is already along e_1).
    x0 = a[k, k + 1]
    big = 0.0
    for j in range(k + 2, n):
        big = max(big, abs(a[k, j]))
    if big < _NEGLIGIBLE:
        # far below roundoff of the (unit-scaled) matrix; drop it rather than divide by it
        for j in range(k + 2, n):
            a[k, j] = 0.0
        return x0, 0.0
    big = max(big, abs(x0))
    ss = 0.0
    for j in range(k + 1, n):
        r = a[k, j] / big
        ss += r * r
    alpha = -math.copysign(big * math.sqrt(ss), x0)
    beta = (alpha - x0) / alpha
    scale = 1.0 / (x0 - alpha)
    a[k, k + 1] = 1.0
    for j in range(k + 2, n):
        a[k, j] *= scale
    return alpha, beta


@numba.njit(cache=True)
def tridiagonalize(a, d, e, beta):
    """Reduce symmetric ``a`` (overwritten) to tridiagonal ``d``, ``e``.

    On return row k of ``a`` holds the Householder vector of step k in
    columns k+1..n-1 and ``beta[k]`` its scale; ``e[k]`` couples k and k+1.
    """
    n = a.shape[0]
    p = np.zeros(n)
    w = np.zeros(n)
    if n <= 2:
        for i in range(n):
            d[i] = a[i, i]
            e[i] = 0.0
            beta[i] = 0.0
        if n == 2:
            e[0] = a[0, 1]
        return
    alpha, b = _make_reflector(a, 0, n)
    e[0] = alpha
    beta[0] = b
    d[0] = a[0, 0]
    if b != 0.0:
        for i in range(1, n):
            s = 0.0
            for j in range(1, n):
                s += a[i, j] * a[0, j]
            p[i] = b * s
    for k in range(n - 2):
        b = beta[k]
        if b != 0.0:
            # w = p - (beta/2)(v.p) v
            vp = 0.0
            for j in range(k + 1, n):
                vp += a[k, j] * p[j]
            K = 0.5 * b * vp
            for j in range(k + 1, n):
                w[j] = p[j] - K * a[k, j]
            # update row k+1 first: it defines the next reflector
            i = k + 1
            vi = a[k, i]
            wi = w[i]
            for j in range(k + 1, n):
                a[i, j] -= vi * w[j] + wi * a[k, j]
        d[k + 1] = a[k + 1, k + 1]
        if k + 1 == n - 2:
            beta[k + 1] = 0.0
            e[k + 1] = a[k + 1, k + 2]
            if b != 0.0:
                i = n - 1
                vi = a[k, i]
                wi = w[i]
                for j in range(k + 1, n):
                    a[i, j] -= vi * w[j] + wi * a[k, j]
            d[n - 1] = a[n - 1, n - 1]
            break
        alpha, bn = _make_reflector(a, k + 1, n)
        e[k + 1] = alpha
        beta[k + 1] = bn
        # remaining rows: rank-2 update fused with next matvec
        for i in range(k + 2, n):
            if b != 0.0:
                vi = a[k, i]
                wi = w[i]
                for j in range(k + 1, n):
                    a[i, j] -= vi * w[j] + wi * a[k, j]
            if bn != 0.0:
                s = 0.0
                for j in range(k + 2, n):
                    s += a[i, j] * a[k + 1, j]
                p[i] = bn * s
    if n == 2:
        d[1] = a[1, 1]
    e[n - 1] = 0.0


@numba.njit(cache=True)
def accumulate_transpose(a, beta, zt):
    """Write ``P^T`` into ``zt`` where ``P = H_0 H_1 ... H_{n-3}``."""
    n = a.shape[0]
    for i in range(n):
        for j in range(n):
            zt[i, j] = 0.0
        zt[i, i] = 1.0
    for k in range(n - 3, -1, -1):
        b = beta[k]
        if b == 0.0:
            continue
        for i in range(k + 1, n):
            s = 0.0
            for j in range(k + 1, n):
                s += zt[i, j] * a[k, j]
            s *= b
            if s != 0.0:
                for j in range(k + 1, n):
                    zt[i, j] -= s * a[k, j]


@numba.njit(cache=True)
def transformed_rows(a, beta, rows, zt):
    """Column c of ``zt`` becomes ``P^T e_{rows[c]}`` (selected rows of ``P``)."""
    n = a.shape[0]
    m = rows.shape[0]
    y = np.zeros(n)
    for c in range(m):
        for i in range(n):
            y[i] = 0.0
        y[rows[c]] = 1.0
        for k in range(n - 2):
            b = beta[k]
            if b == 0.0:
                continue
            s = 0.0
            for j in range(k + 1, n):
                s += a[k, j] * y[j]
            s *= b
            for j in range(k + 1, n):
                y[j] -= s * a[k, j]
        for i in range(n):
            zt[i, c] = y[i]


@numba.njit(cache=True)
def tridiagonal_ql(d, e, zt, max_iter):
    """Implicit-shift QL on ``d``/``e``; rotations are applied to rows of ``zt``.

    Returns ``-1`` on success, otherwise the index of the eigenvalue that
    failed to converge within ``max_iter`` sweeps.
    """
    n = d.shape[0]
    ncol = zt.shape[1]
    # absolute deflation floor, as in EISPACK tql2: eps times the matrix norm
    anorm = 0.0
    for i in range(n):
        anorm = max(anorm, abs(d[i]) + abs(e[i]))
    floor = 2.220446049250313e-16 * anorm
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= floor or abs(e[m]) + dd == dd:
                    break
                m += 1
            if m == l:
                break
            if it == max_iter:
                return l
            it += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = 1.0
            c = 1.0
            p = 0.0
            i = m - 1
            deflated = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                for k in range(ncol):
                    f = zt[i + 1, k]
                    zt[i + 1, k] = s * zt[i, k] + c * f
                    zt[i, k] = c * zt[i, k] - s * f
                i -= 1
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return -1
