"""Truncated Fock-space arithmetic.

Vectors and operators live on span{phi_0, ..., phi_{N-1}}. The ladder
truncation corrupts the last row/column of products, so operator identities
are compared on an interior block (see :mod:`csframes.numerics`).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln
from scipy.stats import poisson

from .errors import GridOverflow, TruncationInsufficient

STRUCTURES = ("diagonal", "lowering", "raising", "general")
MAX_HERMITE_ORDER = 512
# exp(-x^2/2) underflows past this
_HERMITE_X2_LIMIT = 1400.0


@dataclass(frozen=True)
class TruncationPolicy:
    """Fock cutoff and the tolerances tied to it.

    Parameters
    ----------
    n_max : int
        Dimension of the truncated space.
    tail_tol : float
        Largest coefficient mass allowed to fall beyond ``n_max``.
    edge_margin : int
        Rows/columns dropped near the edge in operator-identity checks.
    """

    n_max: int = 64
    tail_tol: float = 1e-10
    edge_margin: int = 2

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 2:
            raise ValueError(f"n_max must be an integer >= 2, got {self.n_max}")
        if not self.tail_tol >= 0:
            raise ValueError(f"tail_tol must be >= 0, got {self.tail_tol}")
        if int(self.edge_margin) != self.edge_margin or not 0 <= self.edge_margin < self.n_max:
            raise ValueError(f"edge_margin must satisfy 0 <= edge_margin < n_max, got {self.edge_margin}")

    def with_n_max(self, n_max: int) -> "TruncationPolicy":
        return TruncationPolicy(int(n_max), self.tail_tol, self.edge_margin)


@dataclass(frozen=True)
class FockVector:
    """Coefficients of a vector in the truncated number basis."""

    coeffs: np.ndarray
    trunc: TruncationPolicy
    normalized: bool = False

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (self.trunc.n_max,):
            raise ValueError(f"expected {self.trunc.n_max} coefficients, got shape {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        if self.normalized:
            dev = abs(np.linalg.norm(c) - 1.0)
            if dev > 10 * self.trunc.tail_tol + 1e-14:
                raise ValueError(f"vector tagged normalized but | |c| - 1 | = {dev:.3g}")

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def inner(self, other: "FockVector") -> complex:
        """Return <self|other>, antilinear in the first slot."""
        return complex(np.vdot(self.coeffs, other.coeffs))


@dataclass(frozen=True)
class FockOperator:
    """Dense matrix with a structural tag checked against its sparsity."""

    matrix: np.ndarray
    structure: str
    trunc: TruncationPolicy = field(repr=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        n = self.trunc.n_max
        if m.shape != (n, n):
            raise ValueError(f"expected a {n}x{n} matrix, got {m.shape}")
        if self.structure not in STRUCTURES:
            raise ValueError(f"unknown structure tag {self.structure!r}")
        allowed = {
            "diagonal": np.eye(n, dtype=bool),
            "lowering": np.eye(n, k=1, dtype=bool),
            "raising": np.eye(n, k=-1, dtype=bool),
        }.get(self.structure)
        if allowed is not None and np.any(m[~allowed] != 0):
            raise ValueError(f"matrix has entries outside the {self.structure} pattern")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def __matmul__(self, other):
        if isinstance(other, FockOperator):
            return FockOperator(self.matrix @ other.matrix, _compose(self.structure, other.structure), self.trunc)
        if isinstance(other, FockVector):
            return FockVector(self.matrix @ other.coeffs, self.trunc)
        return NotImplemented

    @property
    def H(self) -> "FockOperator":
        tag = {"lowering": "raising", "raising": "lowering"}.get(self.structure, self.structure)
        return FockOperator(self.matrix.conj().T, tag, self.trunc)

    def diagonal(self) -> np.ndarray:
        return np.diag(self.matrix).copy()


def _compose(s1: str, s2: str) -> str:
    if s1 == "diagonal":
        return s2
    if s2 == "diagonal":
        return s1
    return "general"


@dataclass(frozen=True)
class PhasePoint:
    """A point of the phase plane, as ``z`` or as the real pair ``(q, p)``.

    The map is ``z = (q + i p)/sqrt(2)``, which makes ``D(z)`` the
    translation by ``(q, p)`` in position/momentum.
    """

    z: complex

    @classmethod
    def from_qp(cls, q: float, p: float) -> "PhasePoint":
        return cls(complex(q, p) / np.sqrt(2.0))

    @property
    def q(self) -> float:
        return float(np.sqrt(2.0) * self.z.real)

    @property
    def p(self) -> float:
        return float(np.sqrt(2.0) * self.z.imag)


def basis_vector(n: int, trunc: TruncationPolicy) -> FockVector:
    if not 0 <= n < trunc.n_max:
        raise ValueError(f"basis index {n} outside 0..{trunc.n_max - 1}")
    c = np.zeros(trunc.n_max, dtype=complex)
    c[n] = 1.0
    return FockVector(c, trunc, normalized=True)


def ladder_lowering(trunc: TruncationPolicy) -> FockOperator:
    """Annihilation operator, ``a[n-1, n] = sqrt(n)``."""
    n = trunc.n_max
    return FockOperator(np.diag(np.sqrt(np.arange(1, n)), k=1), "lowering", trunc)


def ladder_raising(trunc: TruncationPolicy) -> FockOperator:
    n = trunc.n_max
    return FockOperator(np.diag(np.sqrt(np.arange(1, n)), k=-1), "raising", trunc)


def number_op(trunc: TruncationPolicy) -> FockOperator:
    return FockOperator(np.diag(np.arange(trunc.n_max, dtype=float)), "diagonal", trunc)


def position_momentum(trunc: TruncationPolicy) -> tuple[FockOperator, FockOperator]:
    """Return ``(Q, P)`` with ``Q = (a + a^+)/sqrt2`` and ``P = (a - a^+)/(i sqrt2)``."""
    a = ladder_lowering(trunc).matrix
    ad = ladder_raising(trunc).matrix
    Q = (a + ad) / np.sqrt(2.0)
    P = (a - ad) / (1j * np.sqrt(2.0))
    return FockOperator(Q, "general", trunc), FockOperator(P, "general", trunc)


def poisson_tail(mean: float, n_max: int) -> float:
    """Mass of a Poisson(mean) distribution at indices >= n_max."""
    if mean <= 0:
        return 0.0
    return float(poisson.sf(n_max - 1, mean))


def _check_tail(z: complex, trunc: TruncationPolicy) -> float:
    tail = poisson_tail(abs(z) ** 2, trunc.n_max)
    if tail > trunc.tail_tol:
        raise TruncationInsufficient(
            f"|z|^2 = {abs(z) ** 2:.4g} leaves tail mass {tail:.3g} beyond n_max={trunc.n_max} "
            f"(tail_tol={trunc.tail_tol:.3g})"
        )
    return tail


def displacement(z: complex, trunc: TruncationPolicy) -> FockOperator:
    """Truncated ``D(z) = exp(z a^+ - conj(z) a)``.

    Raises
    ------
    TruncationInsufficient
        If the coherent state ``D(z) phi_0`` does not fit in ``n_max``.
    """
    z = complex(z)
    _check_tail(z, trunc)
    a = ladder_lowering(trunc).matrix
    gen = z * a.conj().T - np.conj(z) * a
    return FockOperator(expm(gen), "general", trunc)


def ccs_coefficients(z: complex, n: int) -> np.ndarray:
    """``exp(-|z|^2/2) z^k / sqrt(k!)`` for ``k < n``, built in log space."""
    z = complex(z)
    k = np.arange(n)
    out = np.zeros(n, dtype=complex)
    if z == 0:
        out[0] = 1.0
        return out
    logmag = -0.5 * abs(z) ** 2 + k * np.log(abs(z)) - 0.5 * gammaln(k + 1)
    return np.exp(logmag) * np.exp(1j * k * np.angle(z))


def ccs(z: complex, trunc: TruncationPolicy) -> FockVector:
    """Canonical coherent state, normalized in the untruncated space."""
    _check_tail(complex(z), trunc)
    return FockVector(ccs_coefficients(z, trunc.n_max), trunc, normalized=True)


def hermite_functions(n: int, xs: np.ndarray) -> np.ndarray:
    """Orthonormal Hermite functions ``h_0..h_{n-1}`` on ``xs``; shape ``(n, len(xs))``."""
    xs = np.asarray(xs, dtype=float)
    if n > MAX_HERMITE_ORDER:
        raise GridOverflow(f"Hermite order {n} exceeds the supported {MAX_HERMITE_ORDER}")
    if xs.size and np.max(xs ** 2) > _HERMITE_X2_LIMIT:
        raise GridOverflow(f"|x| = {np.max(np.abs(xs)):.4g} underflows the Hermite seed")
    h = np.zeros((n, xs.size))
    h[0] = np.pi ** -0.25 * np.exp(-0.5 * xs ** 2)
    if n > 1:
        h[1] = np.sqrt(2.0) * xs * h[0]
    for k in range(1, n - 1):
        h[k + 1] = xs * np.sqrt(2.0 / (k + 1)) * h[k] - np.sqrt(k / (k + 1)) * h[k - 1]
    return h


def position_wavefunction(v: FockVector, xs) -> np.ndarray:
    """Evaluate ``sum_n c_n h_n(x)`` on the grid ``xs``."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    h = hermite_functions(v.trunc.n_max, xs)
    return v.coeffs @ h
