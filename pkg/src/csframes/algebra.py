"""Deformed ladder operators, their commutators and non-unitary displacements.

For a nonlinearity ``f``::

    A  = a f(N)        A^+  = f(N) a^+
    A' = a f(N)^{-1}   A'^+ = f(N)^{-1} a^+

with ``f(0) := 1`` (it only ever multiplies a zero column). The displacement
``V(z) = exp(z A'^+ - conj(z) A)`` equals ``T^{-1} D(z) T``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .errors import Degenerate, IllConditioned, OutsideDomain
from .families import EntireSeries, Rescaled, evaluate
from .fock import (
    FockOperator,
    FockVector,
    TruncationPolicy,
    basis_vector,
    displacement,
    ladder_lowering,
    ladder_raising,
)
from .frames import convergence_radius
from .nonlinearity import NonlinearitySpec
from .numerics import block_dev, converged_block, interior

# entries of V beyond this size leave no accurate digits in the low block
V_ENTRY_GUARD = 1e12
COND_GUARD = 1e12


@dataclass(frozen=True)
class DeformedQuad:
    A: FockOperator
    A_dag: FockOperator
    A_prime: FockOperator
    A_prime_dag: FockOperator
    spec: NonlinearitySpec | None = None
    shift: float | None = None


def f_diagonal(spec: NonlinearitySpec, n: int) -> np.ndarray:
    """``f(0..n-1)`` with the convention ``f(0) = 1``."""
    f = np.ones(n)
    if n > 1:
        f[1:] = np.exp(spec.log_f(np.arange(1, n)))
    return f


def build_quad(spec: NonlinearitySpec, trunc: TruncationPolicy) -> DeformedQuad:
    """The four deformed ladder operators of a nonlinearity."""
    n = trunc.n_max
    f = f_diagonal(spec, n)
    a = ladder_lowering(trunc).matrix
    A = a * f[None, :]
    Ap = a / f[None, :]
    return DeformedQuad(
        FockOperator(A, "lowering", trunc),
        FockOperator(A.conj().T, "raising", trunc),
        FockOperator(Ap, "lowering", trunc),
        FockOperator(Ap.conj().T, "raising", trunc),
        spec=spec,
    )


def build_shifted_quad(lam: float, trunc: TruncationPolicy) -> DeformedQuad:
    """Quad of the photon-added rescaling: ``A = a - lam``, ``A' = a + lam``."""
    a = ladder_lowering(trunc).matrix
    I = lam * np.eye(trunc.n_max)
    g = lambda m: FockOperator(m, "general", trunc)
    return DeformedQuad(g(a - I), g(a.conj().T - I), g(a + I), g(a.conj().T + I), shift=lam)


def _comm(X: FockOperator, Y: FockOperator) -> np.ndarray:
    return X.matrix @ Y.matrix - Y.matrix @ X.matrix


def commutator_suite(quad: DeformedQuad, trunc: TruncationPolicy | None = None) -> dict[str, float]:
    """Interior deviations of six commutators from their closed forms.

    Keys name the commutator; values are max-entry deviations on the block
    of indices below ``n_max - edge_margin - 2``.
    """
    trunc = trunc or quad.A.trunc
    n = trunc.n_max
    k = interior(trunc, degree=2)
    I = np.eye(n)
    a = ladder_lowering(trunc).matrix
    ad = a.T
    if quad.spec is None:
        expected = {"[A,A'+]": I, "[A',A+]": I, "[A,A+]": I, "[A',A'+]": I, "[A,A']": 0 * I, "[A+,A'+]": 0 * I}
    else:
        f = np.ones(n + 1)
        f[1:] = np.exp(quad.spec.log_f(np.arange(1, n + 1)))
        m = np.arange(n)
        fn, fn1 = f[:n], f[1:]
        fprev = np.ones(n)
        fprev[1:] = f[: n - 1]
        X = np.where(m >= 2, fprev / fn - fn / fprev, 0.0)
        Y = np.where(m >= 2, fn / fprev - fprev / fn, 0.0)
        expected = {
            "[A,A'+]": I,
            "[A',A+]": I,
            "[A,A+]": np.diag(fn1 ** 2 * (m + 1) - fn ** 2 * m),
            "[A',A'+]": np.diag(fn1 ** -2.0 * (m + 1) - fn ** -2.0 * m),
            "[A,A']": a @ a @ np.diag(X),
            "[A+,A'+]": np.diag(Y) @ ad @ ad,
        }
    got = {
        "[A,A'+]": _comm(quad.A, quad.A_prime_dag),
        "[A',A+]": _comm(quad.A_prime, quad.A_dag),
        "[A,A+]": _comm(quad.A, quad.A_dag),
        "[A',A'+]": _comm(quad.A_prime, quad.A_prime_dag),
        "[A,A']": _comm(quad.A, quad.A_prime),
        "[A+,A'+]": _comm(quad.A_dag, quad.A_prime_dag),
    }
    return {key: block_dev(got[key], expected[key], k) for key in got}


@dataclass(frozen=True)
class AlgebraReport:
    """Fit of ``A A^+ - lambda A^+ A = C(N)``."""

    lambda_fit: float
    C_diag: np.ndarray
    residual_offdiag: float
    residual_fit: float


def detect_deformed_algebra(A: FockOperator, A_dag: FockOperator, trunc: TruncationPolicy | None = None) -> AlgebraReport:
    """Find ``lambda`` with ``A A^+ - lambda A^+ A`` diagonal (or constant when already diagonal).

    When ``A^+ A`` has off-diagonal entries, ``lambda`` is the least-squares
    solution cancelling them. When both products are diagonal that
    condition is empty, so ``lambda`` and a constant ``c`` are fitted to
    ``diag(A A^+) = c + lambda diag(A^+ A)``.

    Raises
    ------
    Degenerate
        If ``A^+ A`` is a multiple of the identity.
    """
    trunc = trunc or A.trunc
    k = interior(trunc, degree=1)
    X = (A.matrix @ A_dag.matrix)[:k, :k]
    Y = (A_dag.matrix @ A.matrix)[:k, :k]
    off = ~np.eye(k, dtype=bool)
    yd = np.real(np.diag(Y))
    y_scale = max(1.0, float(np.max(np.abs(Y))))
    if np.max(np.abs(Y[off]), initial=0.0) <= 1e-12 * y_scale and np.ptp(yd) <= 1e-12 * y_scale:
        raise Degenerate("A^+ A is scalar; lambda is not determined")
    if np.max(np.abs(Y[off]), initial=0.0) > 1e-12 * y_scale:
        yo, xo = Y[off], X[off]
        lam = float(np.real(np.vdot(yo, xo)) / np.real(np.vdot(yo, yo)))
        C = np.real(np.diag(X - lam * Y))
        res_off = float(np.linalg.norm((X - lam * Y)[off]))
        return AlgebraReport(lam, C, res_off, res_off)
    xd = np.real(np.diag(X))
    M = np.column_stack([np.ones(k), yd])
    (c, lam), *_ = np.linalg.lstsq(M, xd, rcond=None)
    C = xd - lam * yd
    return AlgebraReport(float(lam), C, float(np.linalg.norm((X - lam * Y)[off])), float(np.linalg.norm(C - c)))


def _require_domain(z: complex, spec: NonlinearitySpec, epsilon: float, dual: bool) -> None:
    rep = convergence_radius(spec)
    L = rep.L_dual if dual else rep.L
    ok = rep.converged_dual if dual else rep.converged_primal
    if not ok or not (L.infinite or abs(z) <= (1 - epsilon) * L.value):
        which = "dual" if dual else "primal"
        raise OutsideDomain(f"|z| = {abs(z):.6g} is outside the {which} disc of radius {L}")


def _V_matrix(z: complex, spec: NonlinearitySpec, trunc: TruncationPolicy, dual: bool) -> np.ndarray:
    q = build_quad(spec, trunc)
    if dual:
        gen = z * q.A_dag.matrix - np.conj(z) * q.A_prime.matrix
    else:
        gen = z * q.A_prime_dag.matrix - np.conj(z) * q.A.matrix
    V = expm(gen)
    if not np.all(np.isfinite(V)) or np.max(np.abs(V)) > V_ENTRY_GUARD:
        raise IllConditioned(f"V(z) entries exceed {V_ENTRY_GUARD:g} at n_max={trunc.n_max}; reduce |z| or n_max")
    return V


def V_operator(z: complex, spec: NonlinearitySpec, trunc: TruncationPolicy, *, epsilon: float = 1e-3) -> FockOperator:
    """``V(z) = exp(z A'^+ - conj(z) A)``, defined for ``z`` in the primal disc.

    Raises
    ------
    OutsideDomain, TruncationInsufficient, IllConditioned
    """
    z = complex(z)
    _require_domain(z, spec, epsilon, dual=False)
    evaluate(Rescaled(spec), z, trunc, epsilon=epsilon)
    return FockOperator(_V_matrix(z, spec, trunc, False), "general", trunc)


def V_prime_operator(z: complex, spec: NonlinearitySpec, trunc: TruncationPolicy, *, epsilon: float = 1e-3) -> FockOperator:
    """``V'(z) = exp(z A^+ - conj(z) A')``, defined for ``z`` in the dual disc."""
    z = complex(z)
    _require_domain(z, spec, epsilon, dual=True)
    evaluate(Rescaled(spec.reciprocal()), z, trunc, epsilon=epsilon)
    return FockOperator(_V_matrix(z, spec, trunc, True), "general", trunc)


def projective_phase(z1: complex, z2: complex) -> complex:
    """Cocycle of ``D(z1) D(z2) = phase * D(z1 + z2)`` for ``D(z) = exp(z a^+ - conj(z) a)``."""
    return complex(np.exp(1j * np.imag(z1 * np.conj(z2))))


def _projective_builder(spec, z1, z2, dual):
    ph = projective_phase(z1, z2)

    def build(tr):
        V1 = _V_matrix(z1, spec, tr, dual)
        V2 = _V_matrix(z2, spec, tr, dual)
        V12 = _V_matrix(z1 + z2, spec, tr, dual)
        return [V1 @ V2, ph * V12]

    return build


def projective_law_check(
    spec: NonlinearitySpec,
    z1: complex,
    z2: complex,
    trunc: TruncationPolicy,
    *,
    dual: bool = False,
    epsilon: float = 1e-3,
    block: int | None = None,
) -> float:
    """Deviation of ``V(z1) V(z2)`` from ``phase * V(z1 + z2)``.

    Measured on the block where the truncated exponentials agree with a
    padded rebuild (or on ``block`` if given).
    """
    z1, z2 = complex(z1), complex(z2)
    for z in (z1, z2, z1 + z2):
        _require_domain(z, spec, epsilon, dual)
    build = _projective_builder(spec, z1, z2, dual)
    if block is None:
        block, (lhs, rhs) = converged_block(build, trunc)
    else:
        lhs, rhs = build(trunc)
    return block_dev(lhs, rhs, block)


def projective_law_sweep(
    spec: NonlinearitySpec, z1: complex, z2: complex, n_values: Sequence[int], trunc: TruncationPolicy, *, dual: bool = False
) -> list[float]:
    """Projective-law deviations over several cutoffs on one fixed block.

    The block is the converged block of the smallest cutoff, so every entry
    of the sweep measures the same matrix elements.
    """
    n_values = sorted(int(n) for n in n_values)
    base = trunc.with_n_max(n_values[0])
    block, _ = converged_block(_projective_builder(spec, complex(z1), complex(z2), dual), base)
    block = max(block, 1)
    return [projective_law_check(spec, z1, z2, trunc.with_n_max(n), dual=dual, block=block) for n in n_values]


def contragredience_check(
    spec: NonlinearitySpec,
    z: complex,
    trunc: TruncationPolicy,
    *,
    epsilon: float = 1e-3,
    cond_limit: float = COND_GUARD,
    block: int | None = None,
) -> float:
    """Deviation of ``V'(z)`` from ``(V(z)^{-1})^+`` on the interior (or ``block``).

    Raises
    ------
    IllConditioned
        If ``cond(V(z))`` exceeds ``cond_limit``.
    """
    z = complex(z)
    if z == 0:
        return 0.0
    _require_domain(z, spec, epsilon, dual=False)
    _require_domain(z, spec, epsilon, dual=True)
    V = _V_matrix(z, spec, trunc, False)
    Vp = _V_matrix(z, spec, trunc, True)
    cond = np.linalg.cond(V)
    if not cond <= cond_limit:
        raise IllConditioned(f"cond(V) = {cond:.3g} exceeds {cond_limit:.3g}")
    Vinv = np.linalg.solve(V, np.eye(trunc.n_max))
    return block_dev(Vp, Vinv.conj().T, interior(trunc) if block is None else block)


def contragredience_sweep(
    spec: NonlinearitySpec, z: complex, n_values: Sequence[int], trunc: TruncationPolicy, *, block: int | None = None
) -> list[float]:
    """Contragredience deviations over several cutoffs on one fixed block.

    The default block is the interior of the smallest cutoff.
    """
    n_values = sorted(int(n) for n in n_values)
    if block is None:
        block = interior(trunc.with_n_max(n_values[0]))
    return [contragredience_check(spec, z, trunc.with_n_max(n), block=block) for n in n_values]


def general_nonlinear_cs(T_inv: FockOperator, z: complex, trunc: TruncationPolicy) -> FockVector:
    """``T^{-1} D(z) phi_0`` for a positive diagonal ``T^{-1}``."""
    d = np.diag(T_inv.matrix)
    if T_inv.structure != "diagonal" or np.any(d.real <= 0) or np.any(d.imag != 0):
        raise ValueError("T_inv must be diagonal with positive entries")
    D = displacement(z, trunc)
    return FockVector(d * (D @ basis_vector(0, trunc)).coeffs, trunc)


def example1_T_inverse(lam: float, G: EntireSeries, trunc: TruncationPolicy) -> np.ndarray:
    """``e^{lam a^+} G(a)`` from exact truncated power series.

    ``a^+`` is nilpotent on the truncated space, so its exponential series
    terminates; ``G(a)`` uses the stored coefficients.
    """
    n = trunc.n_max
    ad = ladder_raising(trunc).matrix
    E = np.eye(n, dtype=complex)
    term = np.eye(n, dtype=complex)
    for k in range(1, n):
        term = term @ ad * (lam / k)
        E = E + term
    return E @ G.of_matrix(ladder_lowering(trunc).matrix)


def example1_commutation_check(lam: float, G: EntireSeries, trunc: TruncationPolicy) -> float:
    """Interior deviation of ``[a, T^{-1}]`` from ``lam T^{-1}``."""
    Ti = example1_T_inverse(lam, G, trunc)
    a = ladder_lowering(trunc).matrix
    return block_dev(a @ Ti - Ti @ a, lam * Ti, interior(trunc))


def transformed_ladder(T_inv: np.ndarray, T: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``(T^{-1} a T, T^{-1} a^+ T)`` for matrices of matching size."""
    n = T.shape[0]
    a = np.diag(np.sqrt(np.arange(1, n)), k=1)
    return T_inv @ a @ T, T_inv @ a.T @ T
