"""Laplace transforms, Gevrey-1 series, optimal truncation and Borel sums.

Series convention: an :class:`AsymptoticSeries` with coefficients ``a_k``
(k = 0, 1, ...) and ``offset`` m stands for ``sum_k a_k tau**-(k + m)``. With
the default offset 1 this is both the expansion of a Laplace transform,
``L q(tau) ~ sum_k q^(k)(0) tau**-(k+1)``, and of an order -1 symbol
``sum_{k>=1} c_k tau**-k`` with ``c_{k+1} = a_k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np
from scipy import integrate, special


class RadiusError(ValueError):
    """Borel radius incompatible with the coefficient growth."""


def _log_kk(k):
    """log(k**k) with the convention 0**0 = 1."""
    k = np.asarray(k, dtype=float)
    return np.where(k > 0, k * np.log(np.where(k > 0, k, 1.0)), 0.0)


def required_constants(coefficients) -> np.ndarray:
    """Per-index constants ``(|a_k| / k**k) ** (1 / (k + 1))``.

    ``max`` of this array is the smallest C with ``|a_k| <= C**(k+1) k**k``
    for all stored k.
    """
    a = np.abs(np.asarray(coefficients, dtype=complex))
    k = np.arange(len(a))
    with np.errstate(divide="ignore"):
        loga = np.log(a)
    return np.exp((loga - _log_kk(k)) / (k + 1))


@dataclass(frozen=True, eq=False)
class AsymptoticSeries:
    """Coefficients with a tracked Gevrey-1 growth constant.

    Attributes:
        coefficients: complex array a_0, a_1, ...
        growth_constant: smallest C~ with |a_k| <= C~**(k+1) k**k over stored k
            (computed when not given).
        offset: power of the leading term, see module docstring.
        errors: optional per-coefficient error estimates.
    """

    coefficients: np.ndarray
    growth_constant: Optional[float] = None
    offset: int = 1
    errors: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coefficients, dtype=complex))
        object.__setattr__(self, "coefficients", c)
        if not np.all(np.isfinite(c)):
            raise ValueError("series coefficients must be finite")
        needed = float(np.max(required_constants(c))) if len(c) else 0.0
        if self.growth_constant is None:
            object.__setattr__(self, "growth_constant", needed)
        elif self.growth_constant < needed * (1 - 1e-12):
            raise ValueError(f"growth constant {self.growth_constant} below the "
                             f"required {needed} for the stored coefficients")

    def __len__(self):
        return len(self.coefficients)

    def partial_sum(self, tau, n_terms: int):
        tau = np.asarray(tau, dtype=complex)
        k = np.arange(n_terms)
        return np.sum(self.coefficients[:n_terms, None] * tau.ravel()[None, :] ** -(k[:, None] + self.offset),
                      axis=0).reshape(tau.shape)


class Truncation(NamedTuple):
    value: complex
    index: int          # last summed k
    saturated: bool     # True when floor(tau/C) exceeded the available terms


def laplace(f: Callable, tau: float, upper: float = np.inf, *, epsrel: float = 1e-13,
            epsabs: float = 0.0, limit: int = 400) -> complex:
    """``int_0^upper exp(-t tau) f(t) dt`` by adaptive Gauss-Kronrod quadrature.

    The substitution s = t tau puts the exponential scale at O(1).

    Raises:
        ValueError: tau <= 0 or f returns non-finite values.
    """
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")

    def g(s):
        val = complex(f(s / tau))
        if not (math.isfinite(val.real) and math.isfinite(val.imag)):
            raise ValueError(f"non-finite integrand sample at t={s / tau:.6g}")
        return val

    s_max = tau * upper
    kw = dict(epsrel=epsrel, epsabs=epsabs, limit=limit)
    if np.isinf(s_max):
        re = integrate.quad(lambda s: math.exp(-s) * g(s).real, 0.0, np.inf, **kw)[0]
        im = integrate.quad(lambda s: math.exp(-s) * g(s).imag, 0.0, np.inf, **kw)[0]
    else:
        # split off the bulk so QUADPACK sees the exponential scale
        brk = [b for b in (1.0, 10.0, 40.0) if b < s_max]
        re = integrate.quad(lambda s: math.exp(-s) * g(s).real, 0.0, s_max, points=brk or None, **kw)[0]
        im = integrate.quad(lambda s: math.exp(-s) * g(s).imag, 0.0, s_max, points=brk or None, **kw)[0]
    return complex(re, im) / tau


def truncated_sum(s: AsymptoticSeries, tau: float, C: float) -> Truncation:
    """``sum_{k=0}^{floor(tau/C)} a_k tau**-(k+offset)``."""
    if not tau > 0 or not C > 0:
        raise ValueError("tau and C must be positive")
    k_star = int(math.floor(tau / C))
    saturated = k_star >= len(s)
    k_star = min(k_star, len(s) - 1)
    k = np.arange(k_star + 1)
    terms = s.coefficients[: k_star + 1] * np.exp(-(k + s.offset) * np.log(tau))
    return Truncation(complex(np.sum(terms)), k_star, saturated)


# -- incomplete gamma estimates ------------------------------------------------

def gamma_tail(k: int, x: float) -> float:
    """``int_x^inf exp(-s) s**k / k! ds = exp(-x) sum_{j<=k} x**j / j!``.

    Accumulated in log space, so large ``x`` and ``k`` neither overflow nor
    underflow prematurely.
    """
    if k < 0 or x < 0:
        raise ValueError("need k >= 0 and x >= 0")
    if x == 0:
        return 1.0
    j = np.arange(k + 1)
    logs = j * math.log(x) - special.gammaln(j + 1) - x
    return float(np.exp(special.logsumexp(logs)))


def entropy_f(x):
    """``f(x) = x + x ln(1/x)`` on [0, 1], with f(0) = 0."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(x > 0, x - x * np.log(np.where(x > 0, x, 1.0)), 0.0)
    return out if out.ndim else float(out)


def gamma_tail_bound(k: int, a: float, tau: float, theta: float) -> float:
    """``theta**-k exp(-(1-theta) a tau) / (1-theta)``, valid for 0 < theta < 1."""
    if not 0 < theta < 1:
        raise ValueError(f"theta must lie in (0, 1), got {theta}")
    return math.exp(-k * math.log(theta) - (1 - theta) * a * tau - math.log1p(-theta))


def optimal_gamma_tail_bound(k: int, a: float, tau: float) -> float:
    """The bound at the minimizing theta = k / (a tau).

    Equals ``exp(-a tau (1 - f(theta))) / (1 - theta)`` with f from
    :func:`entropy_f`; for k = 0 it is exp(-a tau).
    """
    x = a * tau
    theta = k / x
    if not theta < 1:
        raise ValueError(f"need k < a*tau, got k={k}, a*tau={x}")
    return math.exp(-x * (1.0 - entropy_f(theta)) - math.log1p(-theta))


def fit_growth_constant(s: AsymptoticSeries) -> tuple[float, float]:
    """Smallest C~ with |a_k| <= C~**(k+1) k**k, and a truncation constant C.

    C = e * C~: with |a_k| ~ C~**(k+1) k**k the ratio of consecutive terms
    a_k tau**-k is about e C~ k / tau, so terms keep decreasing up to
    k = tau / C.
    """
    if len(s) == 0:
        raise ValueError("empty series")
    c_tilde = float(np.max(required_constants(s.coefficients)))
    return c_tilde, math.e * max(c_tilde, np.finfo(float).tiny)


# -- Borel resummation ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BorelSum:
    """``t -> sum_k a_k t**k / k!`` on [0, a], zero beyond."""

    coefficients: np.ndarray
    radius: float
    growth_constant: float

    def __post_init__(self):
        k = np.arange(len(self.coefficients))
        terms = np.abs(self.coefficients) * np.exp(k * np.log(self.radius) - special.gammaln(k + 1))
        object.__setattr__(self, "_term_sizes", terms)

    @property
    def ratio_bounded(self) -> bool:
        """|a_k| a**k / k! stays bounded over the stored k."""
        t = self._term_sizes
        if len(t) < 4:
            return True
        head = max(np.max(t[: len(t) // 2]), np.finfo(float).tiny)
        return bool(np.max(t[len(t) // 2:]) <= head)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        inside = (t >= 0) & (t <= self.radius)
        k = np.arange(len(self.coefficients))
        # Horner on a_k / k!
        c = self.coefficients / special.factorial(k)
        val = np.zeros(t.shape, dtype=complex)
        for ck in c[::-1]:
            val = val * t + ck
        return np.where(inside, val, 0.0)

    def in_domain(self, t):
        t = np.asarray(t, dtype=float)
        return (t >= 0) & (t <= self.radius)


def borel_resum(s: AsymptoticSeries, a: float) -> BorelSum:
    """Resum Taylor data ``a_k = q^(k)(0)`` into q~ on [0, a].

    Raises:
        RadiusError: a >= 1 / (2 C~), C~ the series growth constant.
    """
    if s.offset != 1:
        raise ValueError("borel_resum expects the Laplace convention (offset 1)")
    if not a > 0:
        raise ValueError(f"radius must be positive, got {a}")
    c_tilde = float(s.growth_constant)
    if c_tilde > 0 and a >= 1.0 / (2.0 * c_tilde):
        raise RadiusError(f"radius a={a} exceeds 1/(2 C~) = {1 / (2 * c_tilde):.4g} "
                          f"for fitted growth constant C~={c_tilde:.4g}")
    return BorelSum(s.coefficients.copy(), float(a), c_tilde)


def laplace_taylor_coefficients(coefficients: Sequence[complex], scale: float = 1.0) -> np.ndarray:
    """Map symbol coefficients c_1, c_2, ... of sum c_k tau**-k, where the
    symbol is L q(scale * tau), to the Taylor data q^(k)(0) = c_{k+1} scale**(k+1)."""
    c = np.asarray(coefficients, dtype=complex)
    k = np.arange(len(c))
    return c * float(scale) ** (k + 1)
