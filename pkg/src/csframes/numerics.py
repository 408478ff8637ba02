"""Shared numerical helpers: interior blocks, convergence blocks, collinearity."""
from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .fock import TruncationPolicy

# default agreement required between a truncated exponential and its padded twin
CONVERGED_TOL = 1e-10


def interior(trunc: TruncationPolicy, degree: int = 1) -> int:
    """Size of the block untouched by the ladder cutoff.

    A product containing ``degree`` ladder factors is exact on indices
    below ``n_max - degree``; ``edge_margin`` more rows are dropped on top.
    """
    return max(trunc.n_max - trunc.edge_margin - degree, 1)


def block_dev(A: np.ndarray, B: np.ndarray, k: int) -> float:
    """Max-entry deviation between two matrices on the leading ``k x k`` block."""
    return float(np.max(np.abs(np.asarray(A)[:k, :k] - np.asarray(B)[:k, :k]), initial=0.0))


def converged_block(
    builder: Callable[[TruncationPolicy], Sequence[np.ndarray]],
    trunc: TruncationPolicy,
    *,
    tol: float = CONVERGED_TOL,
    pad: int | None = None,
) -> tuple[int, list[np.ndarray]]:
    """Find the leading block on which truncated matrix functions are converged.

    ``builder(trunc)`` returns a list of matrices. They are rebuilt at
    ``n_max + pad`` and the leading block is grown while every entry agrees
    to ``tol * max(1, scale)``. The block never exceeds the plain interior.

    Returns
    -------
    k : int
        Block size (0 if even the corner entry disagrees).
    mats : list of ndarray
        The matrices built at ``trunc``.
    """
    n = trunc.n_max
    if pad is None:
        pad = max(20, n // 2)
    mats = [np.asarray(m) for m in builder(trunc)]
    big = [np.asarray(m)[:n, :n] for m in builder(trunc.with_n_max(n + pad))]
    k = interior(trunc)
    for small, ref in zip(mats, big):
        scale = max(1.0, float(np.max(np.abs(ref[:k, :k]), initial=0.0)))
        bad = np.abs(small - ref) > tol * scale
        if bad.any():
            i, j = np.nonzero(bad)
            k = min(k, int(np.min(np.maximum(i, j))))
    return k, mats


def collinearity_residual(u: np.ndarray, v: np.ndarray) -> float:
    """Relative distance of ``v`` from the line spanned by ``u``.

    Returns ``|v - <u,v>/<u,u> u| / |v|``, zero iff ``v`` is a multiple of ``u``.
    """
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    nu = np.vdot(u, u).real
    nv = np.linalg.norm(v)
    if nu == 0 or nv == 0:
        return 0.0 if nu == 0 and nv == 0 else 1.0
    proj = np.vdot(u, v) / nu
    return float(np.linalg.norm(v - proj * u) / nv)


def is_nonincreasing(values: Sequence[float], floor: float) -> bool:
    """True when each value is at most its predecessor or already below ``floor``."""
    vals = list(values)
    return all(b <= a or b <= floor for a, b in zip(vals, vals[1:]))


