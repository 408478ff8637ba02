"""Sp(2,R) factorization and its metaplectic action on truncated Fock space.

Conventions
-----------
``M = L(v) S(u) R(theta)`` with ``L = [[1, 0], [-v, 1]]``,
``S = diag(u^{-1/2}, u^{1/2})`` and ``R = [[cos, -sin], [sin, cos]]``.
The unitary ``U(M)`` satisfies ``U X U^+ = M^{-1} X`` for ``X = (Q, P)``,
and the phase-space translation ``U(x) = exp(i(pQ - qP))`` equals
``D(z)`` with ``z = (q + i p)/sqrt(2)``.
"""
from __future__ import annotations

import numpy as np
from scipy.linalg import expm

from .errors import NotSymplectic, TruncationInsufficient
from .fock import (
    FockOperator,
    FockVector,
    PhasePoint,
    TruncationPolicy,
    ccs_coefficients,
    hermite_functions,
    poisson_tail,
)


def shear(v: float) -> np.ndarray:
    return np.array([[1.0, 0.0], [-v, 1.0]])


def squeeze(u: float) -> np.ndarray:
    return np.diag([u ** -0.5, u ** 0.5])


def rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def M_uv(u: float, v: float) -> np.ndarray:
    """``L(v) S(u)``, the rotation-free part of the factorization."""
    return shear(v) @ squeeze(u)


def sp2_compose(v: float, u: float, theta: float) -> np.ndarray:
    return shear(v) @ squeeze(u) @ rotation(theta)


def sp2_decompose(M, tol: float = 1e-12) -> tuple[float, float, float]:
    """Factor ``M`` as ``L(v) S(u) R(theta)`` with ``u > 0`` and ``0 < theta <= 2 pi``.

    Raises
    ------
    NotSymplectic
        If ``|det M - 1| > tol``.
    """
    M = np.asarray(M, dtype=float)
    if M.shape != (2, 2):
        raise NotSymplectic(f"expected a 2x2 matrix, got shape {M.shape}")
    det = float(np.linalg.det(M))
    if abs(det - 1.0) > tol:
        raise NotSymplectic(f"det M = {det!r} differs from 1")
    G = M @ M.T
    # L S S^T L^T = [[1/u, -v/u], [-v/u, v^2/u + u]]
    u = 1.0 / G[0, 0]
    v = -G[0, 1] * u
    R = np.linalg.solve(squeeze(u), np.linalg.solve(shear(v), M))
    theta = float(np.arctan2(R[1, 0], R[0, 0])) % (2 * np.pi)
    # identity rotation is reported as 2 pi, not as a roundoff-sized angle
    if theta <= tol:
        theta = 2 * np.pi
    return float(v), float(u), theta


def workspace_size(n_max: int) -> int:
    """Dimension used when exponentiating quadratic generators."""
    return 3 * n_max + 40


def _quadratures(n: int) -> tuple[np.ndarray, np.ndarray]:
    a = np.diag(np.sqrt(np.arange(1, n)), k=1).astype(complex)
    ad = a.conj().T
    return (a + ad) / np.sqrt(2.0), (a - ad) / (1j * np.sqrt(2.0))


def metaplectic_matrix(u: float, v: float, theta: float, n: int) -> np.ndarray:
    """``U(M)`` exponentiated directly at dimension ``n`` (no padding)."""
    if not u > 0:
        raise ValueError(f"u must be positive, got {u}")
    Q, P = _quadratures(n)
    H_L = 0.5 * v * (Q @ Q)
    H_S = -0.25 * np.log(u) * (Q @ P + P @ Q)
    rot = np.exp(1j * theta * np.arange(n))
    return expm(-1j * H_L) @ expm(-1j * H_S) * rot[None, :]


def metaplectic_operator(u: float, v: float, theta: float, trunc: TruncationPolicy) -> FockOperator:
    """Metaplectic unitary of ``sp2_compose(v, u, theta)`` on the truncated space.

    The exponentials are taken in a padded workspace and cut back to
    ``n_max``, so low-lying matrix elements do not see the cutoff.

    Raises
    ------
    TruncationInsufficient
        If the squeezed vacuum spills more than ``tail_tol`` beyond ``n_max``.
    """
    n = trunc.n_max
    W = metaplectic_matrix(u, v, theta, workspace_size(n))
    tail = float(np.sum(np.abs(W[n:, 0]) ** 2))
    if tail > trunc.tail_tol:
        raise TruncationInsufficient(
            f"squeezing u={u:g}, v={v:g} leaves mass {tail:.3g} beyond n_max={n}"
        )
    return FockOperator(W[:n, :n], "general", trunc)


def covariance_deviation(u: float, v: float, theta: float, trunc: TruncationPolicy) -> float:
    """Max deviation of ``U X U^+`` from ``M^{-1} X`` on the plain interior block.

    Products are formed in the padded workspace before cutting back, so the
    comparison is against the exact quadratures rather than their truncation.
    """
    n = trunc.n_max
    nw = workspace_size(n)
    U = metaplectic_matrix(u, v, theta, nw)
    Q, P = _quadratures(nw)
    Minv = np.linalg.inv(sp2_compose(v, u, theta))
    k = max(n - trunc.edge_margin - 1, 1)
    dev = 0.0
    for row, X in enumerate((Q, P)):
        lhs = U @ X @ U.conj().T
        rhs = Minv[row, 0] * Q + Minv[row, 1] * P
        dev = max(dev, float(np.max(np.abs(lhs[:k, :k] - rhs[:k, :k]))))
    return dev


def squeezed_coherent_vector(u: float, v: float, z: complex, trunc: TruncationPolicy) -> tuple[np.ndarray, float]:
    """``U(M(u,v)) eta_z`` in the truncated space, with the mass lost beyond ``n_max``."""
    n = trunc.n_max
    nw = workspace_size(n)
    if poisson_tail(abs(z) ** 2, nw) > trunc.tail_tol:
        raise TruncationInsufficient(f"|z|={abs(z):.4g} does not fit the workspace of size {nw}")
    W = metaplectic_matrix(u, v, 2 * np.pi, nw)
    full = W @ ccs_coefficients(z, nw)
    tail = float(np.sum(np.abs(full[n:]) ** 2))
    return full[:n], tail


def squeezed_state(u: float, v: float, q: float, p: float, trunc: TruncationPolicy) -> FockVector:
    """``U(x) U(M(u,v)) phi_0`` for the phase-space point ``x = (q, p)``.

    Built as ``U(M) eta_{x0}`` with ``x0 = M^{-1} x``, which is the same vector.
    """
    x0 = np.linalg.solve(M_uv(u, v), np.array([q, p], dtype=float))
    z0 = PhasePoint.from_qp(*x0).z
    vec, tail = squeezed_coherent_vector(u, v, z0, trunc)
    if tail > trunc.tail_tol:
        raise TruncationInsufficient(f"squeezed state leaves mass {tail:.3g} beyond n_max={trunc.n_max}")
    return FockVector(vec, trunc)


def squeezed_wavefunction(u: float, v: float, q: float, p: float, xs) -> np.ndarray:
    """Closed-form position wavefunction of the squeezed state at ``(q, p)``."""
    xs = np.asarray(xs, dtype=float)
    d = xs - q
    return (u / np.pi) ** 0.25 * np.exp(1j * (xs - q / 2) * p) * np.exp(-0.5 * d * (u + 1j * v) * d)


def squeezed_wavefunction_check(u: float, v: float, q: float, p: float, xs, trunc: TruncationPolicy | None = None) -> float:
    """Max pointwise gap between the Fock-space squeezed state and its closed form."""
    if trunc is None:
        trunc = TruncationPolicy(150)
    vec = squeezed_state(u, v, q, p, trunc)
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    h = hermite_functions(trunc.n_max, xs)
    return float(np.max(np.abs(vec.coeffs @ h - squeezed_wavefunction(u, v, q, p, xs))))
