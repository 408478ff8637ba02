"""Diagonal rescalings T(N), deformed metrics F = T*T and convergence radii."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import NonPositiveFactor, NonPositiveMetric, PreconditionViolated, SpecRangeError
from .fock import FockOperator, FockVector, TruncationPolicy
from .nonlinearity import NonlinearitySpec


@dataclass(frozen=True)
class Extent:
    """A nonnegative quantity that may be infinite, carried as an explicit flag."""

    value: float = 0.0
    infinite: bool = False

    def __float__(self) -> float:
        return float("inf") if self.infinite else float(self.value)

    def __str__(self) -> str:
        return "inf" if self.infinite else repr(float(self.value))

    def exceeds(self, x: float) -> bool:
        """True when this extent is strictly larger than ``x``."""
        return self.infinite or self.value > x

    @classmethod
    def inf(cls) -> "Extent":
        return cls(0.0, True)


@dataclass(frozen=True)
class RescalingOperator:
    """Values ``t(0..n_max-1)`` of a diagonal rescaling, ``t(0) = 1``."""

    t_values: np.ndarray
    trunc: TruncationPolicy
    spec: NonlinearitySpec | None = None

    def __post_init__(self):
        t = np.asarray(self.t_values, dtype=float)
        if t.shape != (self.trunc.n_max,):
            raise ValueError(f"expected {self.trunc.n_max} values, got {t.shape}")
        if t[0] != 1.0 or not np.all((t > 0) & np.isfinite(t)):
            raise ValueError("t must start at 1 and be positive and finite")
        t.setflags(write=False)
        object.__setattr__(self, "t_values", t)


def t_from_f(spec: NonlinearitySpec, trunc: TruncationPolicy) -> RescalingOperator:
    """Cumulative products ``t(n) = f(n) f(n-1) ... f(1)``.

    Raises
    ------
    NonPositiveFactor
        If some ``f(n)``, ``1 <= n < n_max``, is not positive.
    """
    return RescalingOperator(spec.t(trunc.n_max), trunc, spec)


def _diag(values, trunc) -> FockOperator:
    return FockOperator(np.diag(np.asarray(values, dtype=complex)), "diagonal", trunc)


def build_T(resc: RescalingOperator) -> FockOperator:
    return _diag(resc.t_values, resc.trunc)


def build_T_inverse(resc: RescalingOperator) -> FockOperator:
    return _diag(1.0 / resc.t_values, resc.trunc)


def build_F(resc: RescalingOperator) -> FockOperator:
    return _diag(resc.t_values ** 2, resc.trunc)


def build_F_inverse(resc: RescalingOperator) -> FockOperator:
    return _diag(resc.t_values ** -2.0, resc.trunc)


def _metric_diagonal(F: FockOperator) -> np.ndarray:
    if F.structure != "diagonal":
        raise NonPositiveMetric("metric must be a diagonal operator")
    d = np.diag(F.matrix)
    if np.any(np.abs(d.imag) > 0) or np.any(d.real <= 0):
        raise NonPositiveMetric("metric has a non-positive diagonal entry")
    return d.real


def deformed_inner(x: FockVector, y: FockVector, F: FockOperator) -> complex:
    """``<x|y>_F = sum conj(x_n) F_nn y_n``."""
    d = _metric_diagonal(F)
    return complex(np.sum(np.conj(x.coeffs) * d * y.coeffs))


def adjoint_in_F(B: FockOperator, F: FockOperator) -> FockOperator:
    """Adjoint of ``B`` for the inner product ``<.|.>_F``: ``F^{-1} B^H F``."""
    d = _metric_diagonal(F)
    BH = B.H
    return FockOperator((BH.matrix / d[:, None]) * d[None, :], BH.structure, B.trunc)


def gelfand_norm_check(v: FockVector, F: FockOperator) -> tuple[float, float, float]:
    """Return ``(|v|_{F^-1}, |v|, |v|_F)`` and assert their ordering.

    Requires every ``F_nn >= 1``.
    """
    d = _metric_diagonal(F)
    if np.any(d < 1):
        raise PreconditionViolated("norm ordering needs F >= I")
    w = np.abs(v.coeffs) ** 2
    norms = (float(np.sqrt(np.sum(w / d))), float(np.sqrt(np.sum(w))), float(np.sqrt(np.sum(w * d))))
    slack = 1e-14 * max(1.0, norms[2])
    assert norms[0] <= norms[1] + slack and norms[1] <= norms[2] + slack
    return norms


@dataclass(frozen=True)
class RadiusReport:
    """Primal and dual convergence data of a nonlinearity.

    ``rho = lim [t(n)/t(n+1)]^2/(n+1)`` and ``L = 1/sqrt(rho)``; the dual
    family uses ``lim f(n+1)^2/(n+1)``.
    """

    rho: Extent
    L: Extent
    rho_dual: Extent
    L_dual: Extent
    converged: bool
    terms_used: int
    converged_primal: bool = True
    converged_dual: bool = True


def _radius_from_rho(rho: Extent) -> Extent:
    if rho.infinite:
        return Extent(0.0)
    if rho.value == 0:
        return Extent.inf()
    return Extent(float(1.0 / np.sqrt(rho.value)))


def _limit_of_ratios(log_r: np.ndarray, n: np.ndarray, tol: float, window: int) -> tuple[Extent, bool]:
    """Estimate ``lim r_n`` from its tail.

    ``r_n`` is fitted as ``rho + c/(n+1) + d/(n+1)^2`` on the last ``window`` terms and
    on the ``window`` before them; the estimate counts as converged when
    both fits agree and describe their data to ``tol * max(1, rho)``.
    A tail that keeps growing like a power of ``n`` is reported as infinite.
    """
    if log_r.size < 2 * window + 1:
        return Extent(0.0), False
    if np.any(log_r[-2 * window:] > 700):
        return Extent.inf(), True
    r = np.exp(log_r)

    def fit(sl):
        x = 1.0 / (n[sl] + 1.0)
        A = np.column_stack([np.ones(window), x, x * x])
        coef, *_ = np.linalg.lstsq(A, r[sl], rcond=None)
        return coef[0], float(np.max(np.abs(A @ coef - r[sl])))

    rho1, res1 = fit(slice(-window, None))
    rho2, res2 = fit(slice(-2 * window, -window))
    scale = max(1.0, abs(rho1))
    if max(res1, res2) <= tol * scale and abs(rho1 - rho2) <= tol * scale and rho1 >= -tol:
        return (Extent(0.0) if abs(rho1) <= tol else Extent(float(rho1))), True
    tail = slice(-window, None)
    slope = np.polyfit(np.log(n[tail] + 1.0), log_r[tail], 1)[0]
    if slope > 0.05 and np.all(np.diff(log_r[tail]) > 0):
        return Extent.inf(), True
    return Extent(max(float(rho1), 0.0)), False


@lru_cache(maxsize=256)
def convergence_radius(spec: NonlinearitySpec, tol: float = 1e-6, n_probe: int = 4000, window: int = 32) -> RadiusReport:
    """Estimate the primal and dual radii ``L = 1/sqrt(rho)`` of a nonlinearity.

    The ratio sequences are computed up to ``n_probe`` (or the table length,
    or the first non-positive ``f``). ``converged`` is False whenever either
    limit could not be certified; it is a flag, not an exception.
    """
    limit = n_probe if spec.valid_up_to is None else min(n_probe, spec.valid_up_to - 1)
    limit = max(limit, 1)
    try:
        log_f = spec.log_f(np.arange(1, limit + 1))
        truncated = False
    except NonPositiveFactor as exc:
        limit = max(exc.index - 1, 1)
        log_f = spec.log_f(np.arange(1, limit + 1)) if limit >= 1 else np.zeros(0)
        truncated = True
    except SpecRangeError:
        raise
    n = np.arange(limit, dtype=float)
    # log f(n+1) for n = 0..limit-1
    log_r = -2.0 * log_f - np.log(n + 1.0)
    log_rd = 2.0 * log_f - np.log(n + 1.0)
    rho, ok_p = _limit_of_ratios(log_r, n, tol, window)
    rho_d, ok_d = _limit_of_ratios(log_rd, n, tol, window)
    ok_p = ok_p and not truncated
    ok_d = ok_d and not truncated
    return RadiusReport(
        rho=rho,
        L=_radius_from_rho(rho),
        rho_dual=rho_d,
        L_dual=_radius_from_rho(rho_d),
        converged=ok_p and ok_d,
        terms_used=int(limit),
        converged_primal=ok_p,
        converged_dual=ok_d,
    )
