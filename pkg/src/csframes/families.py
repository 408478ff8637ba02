"""Coherent-state families, their duals and closed-form relations.

Every family except ``Squeezed`` is diagonal in the number basis::

    eta_z = pref(z) * sum_n w^n / (t(n) sqrt(n!)) phi_n

where ``t`` comes from the family's nonlinearity, ``w`` is the re-expressed
variable and ``pref`` carries the family's own normalization. The unweighted
sum is the *frame kernel*; ``|pref|^-2`` is the frame weight.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.special import gammaln, ive, logsumexp

from . import nonlinearity as nl
from .errors import OutsideDomain, TruncationInsufficient, UnsupportedFamily
from .fock import FockVector, TruncationPolicy
from .frames import Extent, convergence_radius
from .nonlinearity import NonlinearitySpec
from .symplectic import squeezed_coherent_vector, workspace_size, metaplectic_matrix

DEFAULT_EPSILON = 1e-3
# extended norm series are never summed beyond this many terms
_MAX_SERIES = 1 << 21


@dataclass(frozen=True)
class EntireSeries:
    """Real power series ``G(z) = sum_k c_k z^k`` with ``G(0) != 0``."""

    coefficients: tuple = (1.0,)

    def __post_init__(self):
        c = tuple(float(x) for x in self.coefficients)
        if not c or c[0] == 0.0:
            raise ValueError("G(0) must be nonzero")
        if not all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "coefficients", c)

    @property
    def max_degree(self) -> int:
        return len(self.coefficients) - 1

    @classmethod
    def exponential(cls, mu: float, max_degree: int = 64) -> "EntireSeries":
        """Truncated Taylor series of ``exp(mu z)``."""
        k = np.arange(max_degree + 1)
        with np.errstate(divide="ignore"):
            logc = k * np.log(abs(mu)) - gammaln(k + 1) if mu != 0 else np.where(k == 0, 0.0, -np.inf)
        c = np.exp(logc) * np.sign(mu) ** k
        return cls(tuple(c))

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for c in reversed(self.coefficients):
            out = out * z + c
        return out if out.ndim else complex(out)

    def is_constant_one(self) -> bool:
        return self.coefficients == (1.0,)

    def min_modulus(self, center: complex, radius: float, n_r: int = 16, n_theta: int = 64) -> float:
        """Smallest ``|G|`` sampled on the closed disc around ``center``."""
        r = np.linspace(0.0, radius, n_r)
        th = np.linspace(0.0, 2 * np.pi, n_theta, endpoint=False)
        pts = center + r[:, None] * np.exp(1j * th[None, :])
        return float(np.min(np.abs(self(pts))))

    def of_matrix(self, X: np.ndarray) -> np.ndarray:
        """``G(X)`` by Horner's scheme on a square matrix."""
        out = np.zeros_like(X, dtype=complex)
        eye = np.eye(X.shape[0])
        for c in reversed(self.coefficients):
            out = out @ X + c * eye
        return out


@dataclass(frozen=True)
class Canonical:
    pass


@dataclass(frozen=True)
class Rescaled:
    spec: NonlinearitySpec


@dataclass(frozen=True)
class PhotonAdded:
    """Photon-added family ``e^{lam a^+} G(a) eta_z``.

    ``dual_form`` marks the member of the pair whose prefactor is
    ``1/G(z + lam)``; it is produced by :func:`dual`.
    """

    lam: float
    G: EntireSeries = EntireSeries()
    dual_form: bool = False


@dataclass(frozen=True)
class Binomial:
    mu: float


def _check_kappa(kappa: float) -> None:
    if not (kappa >= 1 and float(2 * kappa).is_integer()):
        raise ValueError(f"kappa must be one of 1, 3/2, 2, ..., got {kappa}")


@dataclass(frozen=True)
class GilmorePerelomov:
    kappa: float = 1.0

    def __post_init__(self):
        _check_kappa(self.kappa)


@dataclass(frozen=True)
class BarutGirardello:
    kappa: float = 1.0

    def __post_init__(self):
        _check_kappa(self.kappa)


@dataclass(frozen=True)
class Hypergeometric:
    """``T eta_z`` with ``t(n)^2 = prod (alpha_i)_n / prod (beta_j)_n``.

    With ``inverse`` set the family is ``T^{-1} eta_z`` instead.
    """

    alpha: tuple = ()
    beta: tuple = (1.0,)
    inverse: bool = False

    def __post_init__(self):
        a = tuple(float(x) for x in self.alpha)
        b = tuple(float(x) for x in self.beta)
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)
        if len(b) < 1:
            raise ValueError("need q >= 1")
        if not len(b) - 1 <= len(a) <= len(b) + 1:
            raise ValueError(f"need q-1 <= p <= q+1, got p={len(a)}, q={len(b)}")
        if any(not x > 0 for x in a + b):
            raise ValueError("alpha and beta must be positive")

    @property
    def p(self) -> int:
        return len(self.alpha)

    @property
    def q(self) -> int:
        return len(self.beta)


@dataclass(frozen=True)
class Squeezed:
    u: float
    v: float = 0.0

    def __post_init__(self):
        if not self.u > 0:
            raise ValueError(f"u must be positive, got {self.u}")


FamilyDescriptor = Union[Canonical, Rescaled, PhotonAdded, Binomial, GilmorePerelomov, BarutGirardello, Hypergeometric, Squeezed]


@dataclass(frozen=True)
class CSResult:
    vector: FockVector
    norm_in_H: float
    domain_ok: bool
    family: FamilyDescriptor
    z: complex
    tail_mass: float = 0.0


@dataclass(frozen=True)
class Reexpression:
    """``eta_z = N'^{-1/2} phase * sum w^n / sqrt(x_n!) phi_n``."""

    w: complex
    x_seq: np.ndarray
    phase: complex
    norm_const: float


def family_spec(fam: FamilyDescriptor) -> NonlinearitySpec:
    """Nonlinearity whose frame kernel the family shares."""
    if isinstance(fam, Rescaled):
        return fam.spec
    if isinstance(fam, GilmorePerelomov):
        return nl.gp(fam.kappa)
    if isinstance(fam, BarutGirardello):
        return nl.bg(fam.kappa)
    if isinstance(fam, Hypergeometric):
        # the nonlinearity's t^2 = prod(beta)_n / prod(alpha)_n is 1/t_h^2, so its
        # rescaled family T_spec^{-1} eta_z is exactly T_h eta_z
        s = nl.hypergeometric(fam.alpha, fam.beta)
        return s.reciprocal() if fam.inverse else s
    return nl.canonical()


def dual(fam: FamilyDescriptor) -> FamilyDescriptor:
    """Dual family obtained by exchanging ``T`` and ``T^{-1}``."""
    if isinstance(fam, Canonical):
        return fam
    if isinstance(fam, Rescaled):
        return Rescaled(fam.spec.reciprocal())
    if isinstance(fam, PhotonAdded):
        return PhotonAdded(-fam.lam, fam.G, not fam.dual_form)
    if isinstance(fam, Binomial):
        return Binomial(-fam.mu)
    if isinstance(fam, GilmorePerelomov):
        return BarutGirardello(fam.kappa)
    if isinstance(fam, BarutGirardello):
        return GilmorePerelomov(fam.kappa)
    if isinstance(fam, Hypergeometric):
        return Hypergeometric(fam.alpha, fam.beta, not fam.inverse)
    if isinstance(fam, Squeezed):
        # M(u,v)^{-1} = M(1/u, -v/u)
        return Squeezed(1.0 / fam.u, -fam.v / fam.u)
    raise UnsupportedFamily(f"no dual for {fam!r}")


def domain_radius(fam: FamilyDescriptor) -> tuple[Extent, bool]:
    """Radius ``L`` of the family's disc in ``z`` and whether it is certified."""
    if isinstance(fam, (Canonical, PhotonAdded, Binomial, Squeezed, BarutGirardello)):
        return Extent.inf(), True
    if isinstance(fam, GilmorePerelomov):
        return Extent(1.0), True
    rep = convergence_radius(family_spec(fam))
    return rep.L, rep.converged_primal


def in_domain(fam: FamilyDescriptor, z: complex, epsilon: float = DEFAULT_EPSILON) -> bool:
    L, ok = domain_radius(fam)
    return ok and (L.infinite or abs(z) <= (1 - epsilon) * L.value)


def _log_prefactor(fam: FamilyDescriptor, z: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(log|pref|, arg pref, w)`` for arrays of ``z``."""
    z = np.asarray(z, dtype=complex)
    r2 = np.abs(z) ** 2
    zero = np.zeros(z.shape)
    if isinstance(fam, (Canonical, Rescaled, Hypergeometric)):
        return -0.5 * r2, zero, z
    if isinstance(fam, Binomial):
        return fam.mu * z.real - 0.5 * r2, zero, z
    if isinstance(fam, PhotonAdded):
        w = z + fam.lam
        g = np.asarray(fam.G(w) if fam.dual_form else fam.G(z), dtype=complex)
        with np.errstate(divide="ignore"):
            lg = np.log(np.abs(g))
        sign = -1.0 if fam.dual_form else 1.0
        return sign * lg - 0.5 * r2, sign * np.angle(g), w
    if isinstance(fam, GilmorePerelomov):
        with np.errstate(divide="ignore", invalid="ignore"):
            return fam.kappa * np.log1p(-r2), zero, z
    if isinstance(fam, BarutGirardello):
        nu = 2 * fam.kappa - 1
        s = 2 * np.sqrt(r2)
        # N_BG = x^{-nu/2} I_nu(2 sqrt x); ive carries a factor exp(-s)
        with np.errstate(divide="ignore"):
            log_I = np.log(ive(nu, s)) + s
            log_N = np.where(r2 > 0, -0.5 * nu * np.log(np.where(r2 > 0, r2, 1.0)) + log_I, -gammaln(nu + 1))
        return -0.5 * (gammaln(nu + 1) + log_N), zero, z
    raise UnsupportedFamily(f"{type(fam).__name__} is not diagonal in the number basis")


def _log_kernel_weights(spec: NonlinearitySpec, count: int) -> np.ndarray:
    """``-log t(n) - log(n!)/2`` for ``n < count``."""
    return -spec.log_t(count) - 0.5 * gammaln(np.arange(count) + 1)


def _series_mass(spec: NonlinearitySpec, log_pref: float, w: complex, n_max: int) -> tuple[float, float]:
    """Norm and tail mass beyond ``n_max`` of the full (untruncated) series.

    The series is extended by doubling until its terms are negligible. If
    the nonlinearity cannot be evaluated far enough the tail is reported as NaN.
    """
    if w == 0:
        return float(np.exp(log_pref)), 0.0
    lw = np.log(abs(w))
    count = max(2 * n_max, 64)
    limit = spec.valid_up_to
    while True:
        if limit is not None and count > limit + 1:
            count = limit + 1
        try:
            g = _log_kernel_weights(spec, count)
        except Exception:
            return float("nan"), float("nan")
        la = 2 * (g + np.arange(count) * lw)
        total = logsumexp(la)
        done = la[-1] < total + np.log(1e-30) and la[-1] <= la[-min(count, 9)]
        if done or count >= _MAX_SERIES or (limit is not None and count == limit + 1):
            break
        count *= 2
    norm = float(np.exp(log_pref + 0.5 * total))
    if not done:
        return norm, float("nan")
    tail = float(np.exp(logsumexp(la[n_max:]) - total)) if count > n_max else 0.0
    return norm, tail


def evaluate(
    fam: FamilyDescriptor,
    z: complex,
    trunc: TruncationPolicy,
    *,
    epsilon: float = DEFAULT_EPSILON,
    allow_boundary: bool = False,
    check_tail: bool = True,
) -> CSResult:
    """Coefficients of the family member at ``z`` in the orthonormal basis.

    Vectors carry each family's own normalization; ``norm_in_H`` is the
    norm of the untruncated vector.

    Raises
    ------
    OutsideDomain
        If ``|z| > (1 - epsilon) L`` and ``allow_boundary`` is False.
    TruncationInsufficient
        If more than ``tail_tol`` of the squared norm lies beyond ``n_max``.
    """
    z = complex(z)
    ok = in_domain(fam, z, epsilon)
    if not ok and not allow_boundary:
        L, cert = domain_radius(fam)
        why = f"|z| = {abs(z):.6g} exceeds (1 - {epsilon:g}) L with L = {L}" if cert else "radius could not be certified"
        raise OutsideDomain(f"{type(fam).__name__}: {why}")
    if isinstance(fam, PhotonAdded):
        _check_G(fam, z)
    if isinstance(fam, Squeezed):
        vec, tail = squeezed_coherent_vector(fam.u, fam.v, z, trunc)
        norm = float(np.sqrt(np.sum(np.abs(vec) ** 2) + tail))
        tail = tail / norm ** 2
    else:
        lp, ph, w = _log_prefactor(fam, np.array([z]))
        lp, ph, w = float(lp[0]), float(ph[0]), complex(w[0])
        spec = family_spec(fam)
        vec = _coefficients(spec, lp, ph, w, trunc.n_max)
        if check_tail:
            norm, tail = _series_mass(spec, lp, w, trunc.n_max)
        else:
            norm, tail = float(np.linalg.norm(vec)), 0.0
    if check_tail and not tail <= trunc.tail_tol:
        raise TruncationInsufficient(
            f"{type(fam).__name__} at z={z:.4g}: tail mass {tail:.3g} beyond n_max={trunc.n_max} "
            f"exceeds tail_tol={trunc.tail_tol:.3g}"
        )
    return CSResult(FockVector(vec, trunc), norm, ok, fam, z, tail)


def _coefficients(spec: NonlinearitySpec, log_pref: float, phase: float, w: complex, n: int) -> np.ndarray:
    g = _log_kernel_weights(spec, n)
    k = np.arange(n)
    if w == 0:
        out = np.zeros(n, dtype=complex)
        out[0] = np.exp(log_pref + 1j * phase)
        return out
    return np.exp(log_pref + g + k * np.log(abs(w)) + 1j * (phase + k * np.angle(w)))


def _check_G(fam: PhotonAdded, z: complex) -> None:
    point = z + fam.lam if fam.dual_form else z
    if abs(fam.G(point)) == 0.0:
        raise OutsideDomain(f"G vanishes at {point:.4g}")


def frame_weight(fam: FamilyDescriptor, z) -> np.ndarray:
    """Weight ``N(z)`` with ``sqrt(N) eta_z`` equal to the frame kernel up to a phase."""
    if isinstance(fam, Squeezed):
        return np.exp(np.abs(np.asarray(z)) ** 2)
    lp, _, _ = _log_prefactor(fam, np.atleast_1d(z))
    return np.exp(-2 * lp)


def frame_kernel(fam: FamilyDescriptor, zs, n: int) -> np.ndarray:
    """Rows ``sqrt(N(z)) eta_z`` (phase dropped) for each ``z``; shape ``(len(zs), n)``."""
    zs = np.atleast_1d(np.asarray(zs, dtype=complex))
    if isinstance(fam, Squeezed):
        nw = workspace_size(n)
        W = metaplectic_matrix(fam.u, fam.v, 2 * np.pi, nw)
        base = _kernel_rows(nl.canonical(), zs, nw)
        return (base @ W.T)[:, :n]
    _, _, w = _log_prefactor(fam, zs)
    return _kernel_rows(family_spec(fam), w, n)


def _kernel_rows(spec: NonlinearitySpec, w: np.ndarray, n: int) -> np.ndarray:
    g = _log_kernel_weights(spec, n)
    k = np.arange(n)
    with np.errstate(divide="ignore"):
        lw = np.log(np.abs(w))
    lw = np.where(np.abs(w) > 0, lw, 0.0)
    rows = np.exp(g[None, :] + k[None, :] * lw[:, None] + 1j * k[None, :] * np.angle(w)[:, None])
    rows[np.abs(w) == 0, 1:] = 0.0
    return rows


def reexpress(fam: FamilyDescriptor, z: complex, n_count: int = 64) -> Reexpression:
    """Write ``eta_z`` as ``N'^{-1/2} phase * sum w^n/sqrt(x_n!) phi_n``.

    ``x_n! = x_1 x_2 ... x_n``; here ``x_n = n f(n)^2``.
    """
    if not isinstance(fam, (Canonical, Rescaled, PhotonAdded, Binomial)):
        raise UnsupportedFamily(f"re-expression is not provided for {type(fam).__name__}")
    lp, ph, w = _log_prefactor(fam, np.array([complex(z)]))
    spec = family_spec(fam)
    k = np.arange(1, n_count + 1)
    x = k * np.exp(2 * spec.log_f(k))
    return Reexpression(complex(w[0]), x, complex(np.exp(1j * ph[0])), float(np.exp(-2 * lp[0])))


def overlap(famA: FamilyDescriptor, zA: complex, famB: FamilyDescriptor, zB: complex, trunc: TruncationPolicy, **kw) -> complex:
    """``<eta^A_{zA} | eta^B_{zB}>`` in the ordinary inner product."""
    a = evaluate(famA, zA, trunc, **kw).vector
    b = evaluate(famB, zB, trunc, **kw).vector
    return a.inner(b)


def photon_added_basis(lam: float, n: int, trunc: TruncationPolicy) -> FockVector:
    """``e^{lam a^+} phi_n = sum_k lam^k/k! sqrt((n+k)!/n!) phi_{n+k}``."""
    N = trunc.n_max
    if not 0 <= n < N:
        raise ValueError(f"basis index {n} outside 0..{N - 1}")
    out = np.zeros(N, dtype=complex)
    if lam == 0:
        out[n] = 1.0
        return FockVector(out, trunc)
    # extend far enough to measure the neglected tail
    K = max(2 * N, n + 64)
    while True:
        k = np.arange(K)
        lc = k * np.log(abs(lam)) - gammaln(k + 1) + 0.5 * (gammaln(n + k + 1) - gammaln(n + 1))
        if lc[-1] < logsumexp(2 * lc) / 2 + np.log(1e-20) or K >= _MAX_SERIES:
            break
        K *= 2
    la = 2 * lc
    total = logsumexp(la)
    inside = N - n
    tail = float(np.exp(logsumexp(la[inside:]) - total))
    if tail > trunc.tail_tol:
        raise TruncationInsufficient(f"photon-added basis vector {n} leaves mass {tail:.3g} beyond n_max={N}")
    out[n:] = np.exp(lc[:inside]) * np.sign(lam) ** k[:inside]
    return FockVector(out, trunc)


def binomial_basis(mu: float, n: int, trunc: TruncationPolicy) -> FockVector:
    """``(a^+ + mu)^n phi_0 / sqrt(n!) = sum_k mu^k/k! sqrt(n!/(n-k)!) phi_{n-k}``."""
    N = trunc.n_max
    if not 0 <= n < N:
        raise ValueError(f"basis index {n} outside 0..{N - 1}")
    out = np.zeros(N, dtype=complex)
    if mu == 0:
        out[n] = 1.0
        return FockVector(out, trunc)
    k = np.arange(n + 1)
    lc = k * np.log(abs(mu)) - gammaln(k + 1) + 0.5 * (gammaln(n + 1) - gammaln(n - k + 1))
    out[n - k] = np.exp(lc) * np.sign(mu) ** k
    return FockVector(out, trunc)


def dual_overlap_closed_form(fam: FamilyDescriptor, z: complex) -> complex | None:
    """Untruncated ``<dual(fam)_z | fam_z>``, or None where no closed form is available.

    For the diagonal families the kernels pair up to ``exp(conj(w') w)``,
    leaving only the two prefactors.
    """
    if isinstance(fam, Squeezed):
        return None
    d = dual(fam)
    lp, ph, w = _log_prefactor(fam, np.array([complex(z)]))
    lpd, phd, wd = _log_prefactor(d, np.array([complex(z)]))
    val = lp[0] + lpd[0] + 1j * (ph[0] - phd[0]) + np.conj(wd[0]) * w[0]
    return complex(np.exp(val))
