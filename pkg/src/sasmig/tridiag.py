"""Cross-range operator ``H`` and the shifted solve ``(I + gamma H) u = b``.

``H`` is the Neumann second-difference matrix

    (H u)_0     = u_0 - u_1
    (H u)_i     = -(u_{i+1} - 2 u_i + u_{i-1})
    (H u)_{n-1} = u_{n-1} - u_{n-2}

so ``I + gamma H`` is symmetric positive definite for every ``gamma >= 0``
and a Thomas sweep without pivoting is stable.  The batched entry point
``solve_rows`` solves one independent system per row of a 2-D block; rows
may be spread over threads and the result does not depend on the split.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import InvalidArgumentError

__all__ = [
    "TridiagSystem",
    "apply_H",
    "solve_shifted",
    "solve_rows",
    "set_threads",
    "get_threads",
]

_threads = os.cpu_count() or 1
_pool: ThreadPoolExecutor | None = None
# below this many unknowns per call the pool costs more than it saves
_MIN_PARALLEL_WORK = 1 << 15


def set_threads(n: int | None) -> None:
    """Worker count for batched solves; ``None`` means all cores."""
    global _threads, _pool
    n = (os.cpu_count() or 1) if n is None else int(n)
    if n < 1:
        raise InvalidArgumentError(f"threads must be >= 1, got {n}", field="threads")
    if n != _threads and _pool is not None:
        _pool.shutdown(wait=True)
        _pool = None
    _threads = n


def get_threads() -> int:
    return _threads


@dataclass(frozen=True)
class TridiagSystem:
    n: int
    gamma: float

    def __post_init__(self):
        if not (isinstance(self.n, (int, np.integer)) and self.n >= 2):
            raise InvalidArgumentError(f"n must be an integer >= 2, got {self.n!r}", field="n")
        if not (np.isfinite(self.gamma) and self.gamma >= 0):
            raise InvalidArgumentError(f"gamma must be >= 0, got {self.gamma!r}", field="gamma")

    def matrix(self) -> np.ndarray:
        """Dense ``I + gamma H`` (for diagnostics and small checks)."""
        n, g = self.n, self.gamma
        a = np.diag(np.full(n, 1.0 + 2.0 * g))
        a[0, 0] = a[-1, -1] = 1.0 + g
        i = np.arange(n - 1)
        a[i, i + 1] = a[i + 1, i] = -g
        return a

    def solve(self, b) -> np.ndarray:
        return solve_shifted(self, b)


def apply_H(u) -> np.ndarray:
    u = np.asarray(u, dtype=np.float64)
    if u.ndim != 1 or u.size < 2:
        raise InvalidArgumentError(f"apply_H needs a vector of length >= 2, got shape {u.shape}", field="u")
    d = np.diff(u)
    out = np.empty_like(u)
    out[0] = -d[0]
    out[-1] = d[-1]
    out[1:-1] = d[:-1] - d[1:]
    return out


@njit(cache=True, nogil=True)
def _thomas_rows(b, gamma, out):
    m, n = b.shape
    cp = np.empty(n)
    for r in range(m):
        g = gamma[r]
        if g == 0.0:
            for i in range(n):
                out[r, i] = b[r, i]
            continue
        den = 1.0 + g
        cp[0] = -g / den
        out[r, 0] = b[r, 0] / den
        for i in range(1, n):
            diag = 1.0 + 2.0 * g if i < n - 1 else 1.0 + g
            den = diag + g * cp[i - 1]
            cp[i] = -g / den
            out[r, i] = (b[r, i] + g * out[r, i - 1]) / den
        for i in range(n - 2, -1, -1):
            out[r, i] -= cp[i] * out[r, i + 1]


def solve_rows(b: np.ndarray, gamma, threads: int | None = None) -> np.ndarray:
    """Solve ``(I + gamma_r H) x_r = b_r`` for every row ``r`` of ``b``.

    ``gamma`` is a scalar or one value per row.
    """
    b = np.ascontiguousarray(b, dtype=np.float64)
    if b.ndim != 2 or b.shape[1] < 2:
        raise InvalidArgumentError(f"expected a (rows, n >= 2) block, got shape {b.shape}", field="b")
    m = b.shape[0]
    g = np.ascontiguousarray(np.broadcast_to(np.asarray(gamma, dtype=np.float64), (m,)))
    if np.any(g < 0) or not np.all(np.isfinite(g)):
        raise InvalidArgumentError("gamma must be finite and >= 0", field="gamma")
    out = np.empty_like(b)
    if m == 0:
        return out
    nt = _threads if threads is None else threads
    if nt <= 1 or m < 2 or b.size < _MIN_PARALLEL_WORK:
        _thomas_rows(b, g, out)
        return out
    global _pool
    if _pool is None:
        _pool = ThreadPoolExecutor(max_workers=_threads)
    bounds = np.linspace(0, m, min(nt, m) + 1).astype(int)
    jobs = [
        _pool.submit(_thomas_rows, b[lo:hi], g[lo:hi], out[lo:hi])
        for lo, hi in zip(bounds[:-1], bounds[1:])
        if hi > lo
    ]
    for j in jobs:
        j.result()
    return out


def solve_shifted(system: TridiagSystem, b) -> np.ndarray:
    b = np.asarray(b, dtype=np.float64)
    if b.shape != (system.n,):
        raise InvalidArgumentError(f"b has shape {b.shape}, expected ({system.n},)", field="b")
    out = np.empty((1, system.n))
    _thomas_rows(b.reshape(1, -1), np.array([system.gamma], dtype=np.float64), out)
    return out[0]
