"""Nonlinearity sequences f(n) and their cumulative products t(n) = f(n)!.

Built-in closed forms (``n >= 1``):

=================  ==========================================================
canonical          ``f = 1``
gp(kappa)          ``f = 1/sqrt(2 kappa + n - 1)``
bg(kappa)          ``f = sqrt(2 kappa + n - 1)``; ``kappa = 1/2`` gives ``sqrt(n)``
q_osc(q)           ``f = sqrt([n]_q / n)`` with ``[n]_q = (1 - q^n)/(1 - q)``
trapped_ion        ``standard``: ``L^1_n(eta^2) / ((n+1) L^0_n(eta^2))``;
                   ``verbatim``: ``L^0_n(eta^2) / ((n+1) L^0_n(eta^2))``
hypergeometric     ``f^2 = prod(beta + n - 1) / prod(alpha + n - 1)``, so that
                   ``t(n)^2 = prod (beta)_n / prod (alpha)_n``
table              ``f(n) = values[n - 1]``
=================  ==========================================================
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import eval_genlaguerre

from .errors import NonPositiveFactor, RangeOverflow, SpecRangeError


def _param_dict(params) -> dict:
    return dict(params)


def _canonical(n, p):
    return np.zeros(n.shape)


def _gp_log(n, p):
    return -0.5 * np.log(2 * p["kappa"] + n - 1)


def _bg_log(n, p):
    return 0.5 * np.log(2 * p["kappa"] + n - 1)


def _qosc_log(n, p):
    q = p["q"]
    if q == 1.0:
        return np.zeros(n.shape)
    lq = np.log(q)
    if q < 1:
        # [n]_q = (1 - q^n)/(1 - q)
        log_bracket = np.log(-np.expm1(n * lq)) - np.log(-np.expm1(lq))
    else:
        # (q^n - 1)/(q - 1), kept in log form so large n does not overflow
        log_bracket = n * lq + np.log(-np.expm1(-n * lq)) - np.log(np.expm1(lq))
    return 0.5 * (log_bracket - np.log(n))


def _trapped_ion(n, p):
    x = p["eta"] ** 2
    l0 = eval_genlaguerre(n, 0, x)
    num = eval_genlaguerre(n, 1, x) if p["variant"] == "standard" else l0
    with np.errstate(divide="ignore", invalid="ignore"):
        return num / ((n + 1) * l0)


def _hyper_log(n, p):
    alpha = np.asarray(p["alpha"], dtype=float)
    beta = np.asarray(p["beta"], dtype=float)
    num = np.sum(np.log(beta[:, None] + n[None, :] - 1), axis=0) if beta.size else 0.0
    den = np.sum(np.log(alpha[:, None] + n[None, :] - 1), axis=0) if alpha.size else 0.0
    return 0.5 * (num - den) + np.zeros(n.shape)


# name -> (evaluator, returns_log)
_BUILTINS: dict[str, tuple[Callable, bool]] = {
    "canonical": (_canonical, True),
    "gp": (_gp_log, True),
    "bg": (_bg_log, True),
    "q_osc": (_qosc_log, True),
    "trapped_ion": (_trapped_ion, False),
    "hypergeometric": (_hyper_log, True),
}


@dataclass(frozen=True)
class NonlinearitySpec:
    """The sequence ``f(n)``, ``n >= 1``, defining a diagonal rescaling.

    Parameters
    ----------
    name : str
        One of the built-in names or ``"table"``.
    params : tuple of (str, value) pairs
        Named parameters; kept as a tuple so specs are hashable.
    table : tuple of float, optional
        Literal values ``f(1), f(2), ...`` for tabulated specs.
    inverted : bool
        When set the sequence describes ``1/f``.
    """

    name: str
    params: tuple = ()
    table: tuple | None = None
    inverted: bool = False

    def __post_init__(self):
        if self.name == "table":
            if not self.table:
                raise ValueError("a tabulated nonlinearity needs at least one value")
            object.__setattr__(self, "table", tuple(float(x) for x in self.table))
        elif self.name not in _BUILTINS:
            raise ValueError(f"unknown nonlinearity {self.name!r}")

    @property
    def kind(self) -> str:
        return "tabulated" if self.table is not None else "closed_form"

    @property
    def valid_up_to(self) -> int | None:
        """Largest ``n`` at which the sequence may be evaluated, or None if unbounded."""
        return len(self.table) if self.table is not None else None

    def param(self, key: str):
        return _param_dict(self.params)[key]

    def reciprocal(self) -> "NonlinearitySpec":
        return NonlinearitySpec(self.name, self.params, self.table, not self.inverted)

    def _raw(self, n: np.ndarray) -> tuple[np.ndarray, bool]:
        if self.table is not None:
            if n.size and (n.max() > len(self.table)):
                raise SpecRangeError(f"table has {len(self.table)} entries, asked for f({int(n.max())})")
            return np.asarray(self.table)[n - 1], False
        fn, is_log = _BUILTINS[self.name]
        return np.asarray(fn(n.astype(float), _param_dict(self.params)), dtype=float), is_log

    def f(self, n) -> np.ndarray:
        """Return ``f(n)`` without positivity checks (may be <= 0 for some specs)."""
        n = np.atleast_1d(np.asarray(n, dtype=int))
        vals, is_log = self._raw(n)
        vals = np.exp(vals) if is_log else vals
        if self.inverted:
            with np.errstate(divide="ignore"):
                vals = 1.0 / vals
        return vals

    def log_f(self, n) -> np.ndarray:
        """Return ``log f(n)``.

        Raises
        ------
        NonPositiveFactor
            At the first ``n`` where ``f(n)`` is not positive and finite.
        """
        n = np.atleast_1d(np.asarray(n, dtype=int))
        if n.size and n.min() < 1:
            raise ValueError("f(n) is defined for n >= 1")
        vals, is_log = self._raw(n)
        if not is_log:
            bad = ~(np.isfinite(vals) & (vals > 0))
            if bad.any():
                i = int(np.argmax(bad))
                raise NonPositiveFactor(f"{self.name}: f({int(n[i])}) = {vals[i]!r} is not positive", int(n[i]))
            vals = np.log(vals)
        elif not np.all(np.isfinite(vals)):
            i = int(np.argmax(~np.isfinite(vals)))
            raise NonPositiveFactor(f"{self.name}: f({int(n[i])}) is not positive and finite", int(n[i]))
        return -vals if self.inverted else vals

    def log_t(self, count: int) -> np.ndarray:
        """``log t(n)`` for ``n = 0..count-1``, with ``t(0) = 1``."""
        out = np.zeros(count)
        if count > 1:
            out[1:] = np.cumsum(self.log_f(np.arange(1, count)))
        return out

    def t(self, count: int) -> np.ndarray:
        lt = self.log_t(count)
        if np.max(np.abs(lt), initial=0.0) > 700:
            raise RangeOverflow(f"t(n) leaves the double range before n = {count}")
        return np.exp(lt)


def canonical() -> NonlinearitySpec:
    return NonlinearitySpec("canonical")


def _check_kappa(kappa: float, *, half_allowed: bool) -> float:
    kappa = float(kappa)
    low = 0.5 if half_allowed else 1.0
    if not kappa >= low:
        raise ValueError(f"kappa must be >= {low}, got {kappa}")
    return kappa


def gp(kappa: float = 1.0) -> NonlinearitySpec:
    return NonlinearitySpec("gp", (("kappa", _check_kappa(kappa, half_allowed=True)),))


def bg(kappa: float = 1.0) -> NonlinearitySpec:
    return NonlinearitySpec("bg", (("kappa", _check_kappa(kappa, half_allowed=True)),))


def q_osc(q: float) -> NonlinearitySpec:
    if not q > 0:
        raise ValueError(f"q must be positive, got {q}")
    return NonlinearitySpec("q_osc", (("q", float(q)),))


def trapped_ion(eta: float, variant: str = "standard") -> NonlinearitySpec:
    if variant not in ("standard", "verbatim"):
        raise ValueError(f"variant must be 'standard' or 'verbatim', got {variant!r}")
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    return NonlinearitySpec("trapped_ion", (("eta", float(eta)), ("variant", variant)))


def hypergeometric(alpha, beta) -> NonlinearitySpec:
    alpha = tuple(float(a) for a in alpha)
    beta = tuple(float(b) for b in beta)
    if any(not x > 0 for x in alpha + beta):
        raise ValueError("all alpha and beta parameters must be positive")
    return NonlinearitySpec("hypergeometric", (("alpha", alpha), ("beta", beta)))


def table(values) -> NonlinearitySpec:
    return NonlinearitySpec("table", (), tuple(values))
