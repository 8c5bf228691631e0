"""Hot numeric kernels with a numba path and a pure-numpy fallback.

Set ``QLAP_NUMBA=0`` in the environment to force the numpy implementations.
Both paths implement the same algorithms and are cross-checked in the tests;
``NUMBA_KERNELS`` and ``NUMPY_KERNELS`` expose each set explicitly so the
benchmark can time them side by side.
"""

from __future__ import annotations

import math
import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_EPS = 2.0**-52


def _flag_enabled() -> bool:
    return os.environ.get("QLAP_NUMBA", "1").strip().lower() not in ("0", "false", "no", "off")


# ---------------------------------------------------------------------------
# Symmetric eigensolver: Householder tridiagonalization + implicit QL.
# Loop-form versions (compiled by numba).
# ---------------------------------------------------------------------------


def _tred2_loops(V, d, e):
    n = V.shape[0]
    for j in range(n):
        d[j] = V[n - 1, j]
    for i in range(n - 1, 0, -1):
        scale = 0.0
        h = 0.0
        for k in range(i):
            scale += abs(d[k])
        if scale == 0.0:
            e[i] = d[i - 1]
            for j in range(i):
                d[j] = V[i - 1, j]
                V[i, j] = 0.0
                V[j, i] = 0.0
        else:
            for k in range(i):
                d[k] /= scale
                h += d[k] * d[k]
            f = d[i - 1]
            g = math.sqrt(h)
            if f > 0:
                g = -g
            e[i] = scale * g
            h = h - f * g
            d[i - 1] = f - g
            for j in range(i):
                e[j] = 0.0
            for j in range(i):
                f = d[j]
                V[j, i] = f
                g = e[j] + V[j, j] * f
                for k in range(j + 1, i):
                    g += V[k, j] * d[k]
                    e[k] += V[k, j] * f
                e[j] = g
            f = 0.0
            for j in range(i):
                e[j] /= h
                f += e[j] * d[j]
            hh = f / (h + h)
            for j in range(i):
                e[j] -= hh * d[j]
            for j in range(i):
                f = d[j]
                g = e[j]
                for k in range(j, i):
                    V[k, j] -= f * e[k] + g * d[k]
                d[j] = V[i - 1, j]
                V[i, j] = 0.0
        d[i] = h
    for i in range(n - 1):
        V[n - 1, i] = V[i, i]
        V[i, i] = 1.0
        h = d[i + 1]
        if h != 0.0:
            for k in range(i + 1):
                d[k] = V[k, i + 1] / h
            for j in range(i + 1):
                g = 0.0
                for k in range(i + 1):
                    g += V[k, i + 1] * V[k, j]
                for k in range(i + 1):
                    V[k, j] -= g * d[k]
        for k in range(i + 1):
            V[k, i + 1] = 0.0
    for j in range(n):
        d[j] = V[n - 1, j]
        V[n - 1, j] = 0.0
    V[n - 1, n - 1] = 1.0
    e[0] = 0.0


def _tql2_loops(V, d, e):
    n = V.shape[0]
    for i in range(1, n):
        e[i - 1] = e[i]
    e[n - 1] = 0.0
    f = 0.0
    tst1 = 0.0
    for l in range(n):
        tst1 = max(tst1, abs(d[l]) + abs(e[l]))
        m = l
        while m < n - 1:
            if abs(e[m]) <= _EPS * tst1:
                break
            m += 1
        if m > l:
            while True:
                g = d[l]
                p = (d[l + 1] - g) / (2.0 * e[l])
                r = math.hypot(p, 1.0)
                if p < 0:
                    r = -r
                d[l] = e[l] / (p + r)
                d[l + 1] = e[l] * (p + r)
                dl1 = d[l + 1]
                h = g - d[l]
                for i in range(l + 2, n):
                    d[i] -= h
                f += h
                p = d[m]
                c = 1.0
                c2 = c
                c3 = c
                el1 = e[l + 1]
                s = 0.0
                s2 = 0.0
                for i in range(m - 1, l - 1, -1):
                    c3 = c2
                    c2 = c
                    s2 = s
                    g = c * e[i]
                    h = c * p
                    r = math.hypot(p, e[i])
                    e[i + 1] = s * r
                    s = e[i] / r
                    c = p / r
                    p = c * d[i] - s * g
                    d[i + 1] = h + s * (c * g + s * d[i])
                    for k in range(n):
                        h = V[k, i + 1]
                        V[k, i + 1] = s * V[k, i] + c * h
                        V[k, i] = c * V[k, i] - s * h
                p = -s * s2 * c3 * el1 * e[l] / dl1
                e[l] = s * p
                d[l] = c * p
                if abs(e[l]) <= _EPS * tst1:
                    break
        d[l] = d[l] + f
        e[l] = 0.0


def _symeig_loops(a):
    n = a.shape[0]
    V = a.copy()
    d = np.zeros(n)
    e = np.zeros(n)
    if n == 1:
        d[0] = V[0, 0]
        V[0, 0] = 1.0
        return d, V
    _tred2_loops(V, d, e)
    _tql2_loops(V, d, e)
    return d, V


# ---------------------------------------------------------------------------
# Same algorithm, inner loops vectorized with numpy.
# ---------------------------------------------------------------------------


def _tred2_numpy(V, d, e):
    n = V.shape[0]
    d[:] = V[n - 1, :]
    for i in range(n - 1, 0, -1):
        scale = np.abs(d[:i]).sum()
        h = 0.0
        if scale == 0.0:
            e[i] = d[i - 1]
            d[:i] = V[i - 1, :i]
            V[i, :i] = 0.0
            V[:i, i] = 0.0
        else:
            d[:i] /= scale
            h = float(d[:i] @ d[:i])
            f = d[i - 1]
            g = math.sqrt(h)
            if f > 0:
                g = -g
            e[i] = scale * g
            h = h - f * g
            d[i - 1] = f - g
            V[:i, i] = d[:i]
            low = np.tril(V[:i, :i])
            sym = low + low.T - np.diag(np.diag(low))
            e[:i] = sym @ d[:i]
            e[:i] /= h
            f = float(e[:i] @ d[:i])
            hh = f / (h + h)
            e[:i] -= hh * d[:i]
            upd = np.outer(e[:i], d[:i]) + np.outer(d[:i], e[:i])
            V[:i, :i] -= np.tril(upd)
            d[:i] = V[i - 1, :i]
            V[i, :i] = 0.0
        d[i] = h
    for i in range(n - 1):
        V[n - 1, i] = V[i, i]
        V[i, i] = 1.0
        h = d[i + 1]
        if h != 0.0:
            d[: i + 1] = V[: i + 1, i + 1] / h
            g = V[: i + 1, i + 1] @ V[: i + 1, : i + 1]
            V[: i + 1, : i + 1] -= np.outer(d[: i + 1], g)
        V[: i + 1, i + 1] = 0.0
    d[:] = V[n - 1, :]
    V[n - 1, :] = 0.0
    V[n - 1, n - 1] = 1.0
    e[0] = 0.0


def _tql2_numpy(V, d, e):
    n = V.shape[0]
    e[:-1] = e[1:].copy()
    e[n - 1] = 0.0
    f = 0.0
    tst1 = 0.0
    for l in range(n):
        tst1 = max(tst1, abs(d[l]) + abs(e[l]))
        m = l
        while m < n - 1 and abs(e[m]) > _EPS * tst1:
            m += 1
        if m > l:
            while True:
                g = d[l]
                p = (d[l + 1] - g) / (2.0 * e[l])
                r = math.hypot(p, 1.0)
                if p < 0:
                    r = -r
                d[l] = e[l] / (p + r)
                d[l + 1] = e[l] * (p + r)
                dl1 = d[l + 1]
                h = g - d[l]
                d[l + 2 :] -= h
                f += h
                p = d[m]
                c = c2 = c3 = 1.0
                el1 = e[l + 1]
                s = s2 = 0.0
                for i in range(m - 1, l - 1, -1):
                    c3 = c2
                    c2 = c
                    s2 = s
                    g = c * e[i]
                    h = c * p
                    r = math.hypot(p, e[i])
                    e[i + 1] = s * r
                    s = e[i] / r
                    c = p / r
                    p = c * d[i] - s * g
                    d[i + 1] = h + s * (c * g + s * d[i])
                    col = V[:, i + 1].copy()
                    V[:, i + 1] = s * V[:, i] + c * col
                    V[:, i] = c * V[:, i] - s * col
                p = -s * s2 * c3 * el1 * e[l] / dl1
                e[l] = s * p
                d[l] = c * p
                if abs(e[l]) <= _EPS * tst1:
                    break
        d[l] = d[l] + f
        e[l] = 0.0


def _symeig_numpy(a):
    n = a.shape[0]
    V = a.copy()
    d = np.zeros(n)
    e = np.zeros(n)
    if n == 1:
        d[0] = V[0, 0]
        V[0, 0] = 1.0
        return d, V
    _tred2_numpy(V, d, e)
    _tql2_numpy(V, d, e)
    return d, V


# ---------------------------------------------------------------------------
# Edge-wise Trotter sweep. Each row of ``block`` is an amplitude vector over
# vertices; one edge update is (a_u, a_v) <- (a_u + b(a_u - a_v), a_v - b(a_u - a_v)).
# ---------------------------------------------------------------------------


def _trotter_rows_loops(block, us, vs, beta, steps, symmetric):
    rows = block.shape[0]
    n_edges = us.shape[0]
    for row in range(rows):
        for _ in range(steps):
            for k in range(n_edges):
                u = us[k]
                v = vs[k]
                diff = beta * (block[row, u] - block[row, v])
                block[row, u] += diff
                block[row, v] -= diff
            if symmetric:
                for k in range(n_edges - 1, -1, -1):
                    u = us[k]
                    v = vs[k]
                    diff = beta * (block[row, u] - block[row, v])
                    block[row, u] += diff
                    block[row, v] -= diff


def _trotter_rows_numpy(block, us, vs, beta, steps, symmetric):
    order = list(range(len(us)))
    if symmetric:
        order = order + order[::-1]
    pairs = [(int(us[k]), int(vs[k])) for k in order]
    for _ in range(steps):
        for u, v in pairs:
            diff = beta * (block[:, u] - block[:, v])
            block[:, u] += diff
            block[:, v] -= diff


NUMPY_KERNELS = {
    "symeig": _symeig_numpy,
    "trotter_rows": _trotter_rows_numpy,
}

if numba is not None:
    _tred2_jit = numba.njit(cache=True)(_tred2_loops)
    _tql2_jit = numba.njit(cache=True)(_tql2_loops)

    @numba.njit(cache=True)
    def _symeig_jit(a):
        n = a.shape[0]
        V = a.copy()
        d = np.zeros(n)
        e = np.zeros(n)
        if n == 1:
            d[0] = V[0, 0]
            V[0, 0] = 1.0
            return d, V
        _tred2_jit(V, d, e)
        _tql2_jit(V, d, e)
        return d, V

    NUMBA_KERNELS = {
        "symeig": _symeig_jit,
        "trotter_rows": numba.njit(cache=True)(_trotter_rows_loops),
    }
else:  # pragma: no cover
    NUMBA_KERNELS = None

USING_NUMBA = NUMBA_KERNELS is not None and _flag_enabled()
_ACTIVE = NUMBA_KERNELS if USING_NUMBA else NUMPY_KERNELS


def symeig(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (unsorted) and column eigenvectors of a real symmetric matrix."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    return _ACTIVE["symeig"](a)


def trotter_rows(block: np.ndarray, us: np.ndarray, vs: np.ndarray, beta: complex,
                 steps: int, symmetric: bool) -> None:
    """Apply ``steps`` edge sweeps to every row of ``block`` in place."""
    _ACTIVE["trotter_rows"](block, us, vs, complex(beta), int(steps), bool(symmetric))
