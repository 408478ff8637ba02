"""Radial moment problems and frame-operator (resolution of identity) checks.

A family with kernel ``sum w^n/(t(n) sqrt(n!)) phi_n`` resolves the identity
against a rotation-invariant measure ``dnu(r) dtheta`` exactly when
``int r^{2n} dnu(r) = m_n = t(n)^2 n!/(2 pi)`` for every ``n``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import lsq_linear
from scipy.special import gammaln, logsumexp

from .errors import IllConditioned, InfeasibleMoments, MomentOverflow, PreconditionViolated, SupportMismatch
from .families import FamilyDescriptor, PhotonAdded, domain_radius, family_spec, frame_kernel
from .fock import TruncationPolicy
from .frames import Extent, convergence_radius
from .nonlinearity import NonlinearitySpec
from .numerics import interior

_LOG_MAX = np.log(np.finfo(float).max)


@dataclass(frozen=True)
class MomentTargets:
    """``log m_n`` for ``n < n_count``."""

    log_m: np.ndarray
    spec: NonlinearitySpec
    n_count: int

    @property
    def m(self) -> np.ndarray:
        return np.exp(self.log_m)


def target_moments(spec: NonlinearitySpec, n_count: int) -> MomentTargets:
    """``m_n = t(n)^2 n! / (2 pi)``, accumulated in log space.

    Raises
    ------
    MomentOverflow
        If some ``m_n`` is not representable as a double.
    """
    n = np.arange(n_count)
    log_m = 2 * spec.log_t(n_count) + gammaln(n + 1) - np.log(2 * np.pi)
    if np.any(np.abs(log_m) > _LOG_MAX):
        bad = int(np.argmax(np.abs(log_m) > _LOG_MAX))
        raise MomentOverflow(f"m_{bad} leaves the double range; use n_count <= {bad}")
    return MomentTargets(log_m, spec, int(n_count))


@dataclass(frozen=True)
class RadialMeasure:
    """Radial measure ``sum_k w_k delta(r - r_k)``, or the named Gaussian one."""

    kind: str
    nodes: np.ndarray
    weights: np.ndarray
    support_radius: Extent
    fit_residual: float | None = None

    def __post_init__(self):
        if self.kind not in ("gaussian_canonical", "discrete"):
            raise ValueError(f"unknown measure kind {self.kind!r}")
        r = np.asarray(self.nodes, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if r.shape != w.shape:
            raise ValueError("nodes and weights differ in length")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        if np.any(np.diff(r) <= 0) or np.any(r < 0):
            raise ValueError("nodes must be nonnegative and strictly increasing")
        if r.size and not self.support_radius.infinite and r[-1] > self.support_radius.value:
            raise ValueError("nodes exceed the support radius")
        object.__setattr__(self, "nodes", r)
        object.__setattr__(self, "weights", w)

    def log_moments(self, n_count: int) -> np.ndarray:
        """``log sum_k w_k r_k^{2n}`` for ``n < n_count``."""
        n = np.arange(n_count)
        keep = self.weights > 0
        if not keep.any():
            return np.full(n_count, -np.inf)
        r, w = self.nodes[keep], self.weights[keep]
        with np.errstate(divide="ignore"):
            lr = np.log(r)
        terms = np.log(w)[None, :] + 2 * n[:, None] * lr[None, :]
        terms[:, r == 0] = np.where(n[:, None] == 0, np.log(w[r == 0])[None, :], -np.inf)
        return logsumexp(terms, axis=1)


def gaussian_canonical(n_nodes: int = 32) -> RadialMeasure:
    """Gauss-Laguerre discretization of ``e^{-r^2} r dr / pi``.

    With ``s = r^2`` the measure is ``e^{-s} ds/(2 pi)``, so nodes are
    ``sqrt(s_k)`` and weights ``W_k/(2 pi)``.
    """
    s, W = np.polynomial.laguerre.laggauss(n_nodes)
    return RadialMeasure("gaussian_canonical", np.sqrt(s), W / (2 * np.pi), Extent.inf())


def discrete(nodes, weights, support_radius: Extent | float | None = None) -> RadialMeasure:
    if support_radius is None:
        support_radius = Extent(float(np.max(nodes))) if len(nodes) else Extent(0.0)
    elif not isinstance(support_radius, Extent):
        support_radius = Extent(float(support_radius))
    return RadialMeasure("discrete", np.asarray(nodes, float), np.asarray(weights, float), support_radius)


def zero_measure() -> RadialMeasure:
    return RadialMeasure("discrete", np.zeros(0), np.zeros(0), Extent(0.0))


def _check_support(measure: RadialMeasure, L: Extent) -> None:
    R = measure.support_radius
    if L.infinite:
        return
    if R.infinite or R.value > L.value or (measure.nodes.size and measure.nodes[-1] >= L.value):
        raise SupportMismatch(f"measure support {R} reaches the convergence radius {L}")


def verify_measure(measure: RadialMeasure, targets: MomentTargets, n_count: int | None = None) -> float:
    """Max relative error ``|int r^{2n} dnu - m_n| / m_n`` over ``n < n_count``."""
    n_count = targets.n_count if n_count is None else min(n_count, targets.n_count)
    if measure.kind == "gaussian_canonical" and targets.spec.name != "canonical":
        raise PreconditionViolated("the Gaussian measure only serves canonical targets")
    _check_support(measure, convergence_radius(targets.spec).L)
    lm = measure.log_moments(n_count)
    rel = np.abs(np.expm1(lm - targets.log_m[:n_count]))
    return float(np.max(rel, initial=0.0))


def default_grid(spec: NonlinearitySpec, n_count: int, n_nodes: int = 64) -> np.ndarray:
    """Default radial nodes for matching ``n_count`` moments of the nonlinearity.

    Finite radius: area-uniform nodes ``0.995 L sqrt(k/K)``. Infinite
    radius: log-spaced nodes from ``1e-4`` up to twice the largest ratio
    scale ``sqrt(m_n/m_{n-1}) = sqrt(n) f(n)``, ``n <= n_count``; for the
    canonical targets that is ``2 sqrt(n_count)``.
    """
    L = convergence_radius(spec).L
    if L.infinite:
        k = np.arange(1, max(n_count, 1) + 1)
        scale = float(np.max(np.sqrt(k) * np.exp(spec.log_f(k))))
        return np.geomspace(1e-4, 2 * max(scale, 1.0), n_nodes)
    return 0.995 * L.value * np.sqrt(np.arange(1, n_nodes + 1) / n_nodes)


def fit_discrete_measure(
    targets: MomentTargets,
    grid_nodes=None,
    max_n: int | None = None,
    *,
    tol: float = 1e-6,
    cond_limit: float = 1e20,
) -> RadialMeasure:
    """Nonnegative weights on ``grid_nodes`` matching ``m_0..m_max_n``.

    Solved as a bound-constrained least-squares problem by the active-set
    BVLS method.

    Each moment equation is divided by ``m_n`` before the NNLS solve, so the
    residual is measured in relative terms; node columns are then scaled to
    unit length.

    Raises
    ------
    SupportMismatch
        If a node is not inside ``(0, L)``.
    IllConditioned
        If the scaled system's condition number exceeds ``cond_limit``.
    InfeasibleMoments
        If the residual exceeds ``tol``; the best-effort measure is attached.
    """
    L = convergence_radius(targets.spec).L
    max_n = targets.n_count - 1 if max_n is None else int(max_n)
    if not 0 <= max_n < targets.n_count:
        raise ValueError(f"max_n must lie in 0..{targets.n_count - 1}")
    r = default_grid(targets.spec, max_n + 1) if grid_nodes is None else np.sort(np.asarray(grid_nodes, dtype=float))
    if np.any(r <= 0) or (not L.infinite and np.any(r >= L.value)):
        raise SupportMismatch(f"grid nodes must lie in (0, {L})")
    n = np.arange(max_n + 1)
    A = np.exp(2 * n[:, None] * np.log(r)[None, :] - targets.log_m[: max_n + 1, None])
    # unit node columns; w = v / norm keeps the sign constraint intact
    col = np.linalg.norm(A, axis=0)
    As = A / col[None, :]
    cond = np.linalg.cond(As)
    if not cond <= cond_limit:
        raise IllConditioned(f"scaled moment matrix has condition {cond:.3g} > {cond_limit:.3g}")
    sol = lsq_linear(As, np.ones(max_n + 1), bounds=(0.0, np.inf), method="bvls", tol=1e-15, max_iter=50 * r.size)
    w = np.maximum(sol.x, 0.0) / col
    residual = float(np.linalg.norm(A @ w - 1.0))
    support = L if L.infinite else Extent(float(min(L.value, r[-1])))
    measure = RadialMeasure("discrete", r, w, support, residual)
    if residual > tol:
        raise InfeasibleMoments(f"no nonnegative measure on this grid: residual {residual:.3g} > {tol:.3g}", measure, residual)
    return measure


@dataclass(frozen=True)
class FrameReport:
    operator_norm_deviation: float
    grid: str
    measure: RadialMeasure
    offdiag_max: float = 0.0
    S: np.ndarray = field(default=None, repr=False)


def frame_operator(fam: FamilyDescriptor, measure: RadialMeasure, n_theta: int, trunc: TruncationPolicy) -> FrameReport:
    """Assemble ``S = sum_k w_k sum_j dtheta N(z) |eta_z><eta_z|`` on a polar grid.

    Grid points are ``w = r_k e^{i theta_j}`` in the family's re-expressed
    variable (``z = w - lam`` for photon-added states).

    Raises
    ------
    PreconditionViolated
        If ``n_theta < 2 n_max``.
    SupportMismatch
        If the measure reaches the family's radius.
    """
    n = trunc.n_max
    if n_theta < 2 * n:
        raise PreconditionViolated(f"n_theta={n_theta} < 2 n_max={2 * n} breaks exact angular integration")
    L, _ = domain_radius(fam)
    _check_support(measure, L)
    shift = fam.lam if isinstance(fam, PhotonAdded) else 0.0
    dtheta = 2 * np.pi / n_theta
    ring = np.exp(1j * dtheta * np.arange(n_theta))
    S = np.zeros((n, n), dtype=complex)
    for r, wk in zip(measure.nodes, measure.weights):
        if wk == 0:
            continue
        rows = frame_kernel(fam, r * ring - shift, n)
        S += (wk * dtheta) * (rows.T @ rows.conj())
    k = interior(trunc, degree=0)
    dev = float(np.linalg.norm(S[:k, :k] - np.eye(k), 2))
    off = np.abs(S - np.diag(np.diag(S)))
    grid = f"{measure.kind}:{measure.nodes.size}x{n_theta}"
    return FrameReport(dev, grid, measure, float(off.max(initial=0.0)), S)


def photon_added_resolution_check(lam: float, trunc: TruncationPolicy, n_nodes: int = 32, n_theta: int | None = None) -> FrameReport:
    """Frame operator of the photon-added family against the shifted Gaussian measure."""
    n_theta = 2 * trunc.n_max if n_theta is None else n_theta
    return frame_operator(PhotonAdded(lam), gaussian_canonical(n_nodes), n_theta, trunc)
