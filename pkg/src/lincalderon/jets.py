"""Truncated bivariate Taylor jets.

A :class:`Jet` holds coefficients ``c[a, b]`` of ``sum c[a, b] s**a t**b``
truncated to a <= P, b <= N. Arithmetic follows power-series rules, so an
analytic function written with ``+ - * / **`` and the helpers :func:`sqrt`,
:func:`exp`, :func:`cos`, :func:`sin` evaluates to its Taylor jet when fed
jets instead of numbers.
"""

from __future__ import annotations

import cmath
import math
from numbers import Number

import numpy as np
from scipy import signal


class BranchCutError(ValueError):
    """Square root requested too close to the negative real axis."""


def _binom(p, n: int) -> complex:
    """Generalized binomial coefficient p (p-1) ... (p-n+1) / n!, valid for negative p."""
    out = 1.0
    for i in range(n):
        out *= (p - i) / (i + 1)
    return out


class Jet:
    """Coefficient array ``c[a, b]`` of a bivariate power series in (s, t)."""

    __array_priority__ = 100

    def __init__(self, coeffs):
        c = np.array(coeffs, dtype=complex)
        if c.ndim != 2:
            raise ValueError(f"jet coefficients must be 2-D, got shape {c.shape}")
        self.c = c

    @property
    def orders(self) -> tuple[int, int]:
        return self.c.shape[0] - 1, self.c.shape[1] - 1

    @classmethod
    def constant(cls, value, orders):
        c = np.zeros((orders[0] + 1, orders[1] + 1), dtype=complex)
        c[0, 0] = value
        return cls(c)

    @classmethod
    def variable(cls, which: str, orders, at=0.0):
        """The jet of ``at + s`` (which="s") or ``at + t`` (which="t")."""
        j = cls.constant(at, orders)
        if which == "s" and orders[0] >= 1:
            j.c[1, 0] = 1.0
        elif which == "t" and orders[1] >= 1:
            j.c[0, 1] = 1.0
        elif which not in ("s", "t"):
            raise ValueError(f"variable must be 's' or 't', got {which!r}")
        return j

    def _coerce(self, other):
        if isinstance(other, Jet):
            if other.c.shape != self.c.shape:
                raise ValueError(f"jet orders differ: {self.orders} vs {other.orders}")
            return other
        if isinstance(other, (Number, np.number)):
            return Jet.constant(other, self.orders)
        return NotImplemented

    @property
    def value(self) -> complex:
        return complex(self.c[0, 0])

    def copy(self):
        return Jet(self.c.copy())

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Jet(self.c + o.c)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Jet(self.c - o.c)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Jet(o.c - self.c)

    def __mul__(self, other):
        if isinstance(other, (Number, np.number)):
            return Jet(self.c * other)
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        P, N = self.orders
        return Jet(signal.convolve(self.c, o.c, method="direct")[: P + 1, : N + 1])

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (Number, np.number)):
            return Jet(self.c / other)
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o ** -1

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o * self ** -1

    def _unit_series(self, coefficient_of):
        """``sum_n coefficient_of(n) X**n`` with X = self / c00 - 1."""
        c0 = self.value
        if c0 == 0:
            raise ZeroDivisionError("series about a jet with zero constant term")
        X = Jet(self.c / c0)
        X.c[0, 0] = 0.0
        n_max = sum(self.orders)
        out = Jet.constant(coefficient_of(0), self.orders)
        Xn = Jet.constant(1.0, self.orders)
        for n in range(1, n_max + 1):
            Xn = Xn * X
            out = out + coefficient_of(n) * Xn
        return out

    def __pow__(self, p):
        if isinstance(p, (int, np.integer)) and p >= 0:
            out = Jet.constant(1.0, self.orders)
            for _ in range(int(p)):
                out = out * self
            return out
        if not isinstance(p, (Number, np.number)):
            return NotImplemented
        base = self.value ** p
        return self._unit_series(lambda n: base * _binom(p, n))

    def deriv_s(self):
        """Jet of the s-derivative; the top s-order becomes inexact."""
        d = np.zeros_like(self.c)
        a = np.arange(1, self.c.shape[0])
        d[:-1] = self.c[1:] * a[:, None]
        return Jet(d)

    def __call__(self, s, t):
        """Evaluate the truncated polynomial."""
        s = np.asarray(s, dtype=complex)
        t = np.asarray(t, dtype=complex)
        out = np.zeros(np.broadcast(s, t).shape, dtype=complex)
        for a in range(self.c.shape[0] - 1, -1, -1):
            row = np.zeros_like(out)
            for b in range(self.c.shape[1] - 1, -1, -1):
                row = row * t + self.c[a, b]
            out = out * s + row
        return out

    def __repr__(self):
        return f"Jet(orders={self.orders}, value={self.value:.6g})"


def sqrt(x):
    """Principal square root; for jets the constant term must have Re > 0."""
    if not isinstance(x, Jet):
        return np.sqrt(x) if isinstance(x, np.ndarray) else cmath.sqrt(x)
    c0 = x.value
    if not c0.real > 0:
        raise BranchCutError(f"square root of {c0:.6g}: real part must be positive "
                             f"to stay on the principal branch")
    return x ** 0.5


def exp(x):
    if not isinstance(x, Jet):
        return np.exp(x) if isinstance(x, np.ndarray) else cmath.exp(x)
    e0 = cmath.exp(x.value)
    X = x - x.value
    out = Jet.constant(e0, x.orders)
    Xn = Jet.constant(1.0, x.orders)
    for n in range(1, sum(x.orders) + 1):
        Xn = Xn * X
        out = out + (e0 / math.factorial(n)) * Xn
    return out


def cos(x):
    if not isinstance(x, Jet):
        return np.cos(x) if isinstance(x, np.ndarray) else cmath.cos(x)
    return (exp(1j * x) + exp(-1j * x)) * 0.5


def sin(x):
    if not isinstance(x, Jet):
        return np.sin(x) if isinstance(x, np.ndarray) else cmath.sin(x)
    return (exp(1j * x) - exp(-1j * x)) * (-0.5j)
