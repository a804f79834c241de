"""Complex eikonal phase as a Taylor jet near the boundary.

Solves ``d phi/d y_n = i r(y', y_n, d phi/d y')**(1/2)`` with
``phi(y', 0) = y' xi`` order by order in y_n, using bivariate jets in
(s, y_n) with s = y' - y0 the offset from the base point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import jets
from .jets import BranchCutError, Jet


@dataclass(frozen=True, eq=False)
class SymbolModel:
    """Principal symbol ``r(y', y_n, eta')`` of the tangential operator.

    ``r`` must be built from arithmetic and the helpers in
    :mod:`lincalderon.jets` so it accepts both numbers and jets.
    """

    r: Callable
    eta0: float = 1.0
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def __call__(self, y_prime, y_n, eta):
        return self.r(y_prime, y_n, eta)

    @property
    def normalized(self) -> bool:
        """r(0, eta0) equals 1/4."""
        return abs(complex(self.r(0.0, 0.0, self.eta0)) - 0.25) < 1e-12

    def homogeneity_error(self, lambdas=(0.5, 2.0, 3.0), points=((0.0, 0.0), (0.1, 0.05))) -> float:
        """Max relative deviation from r(y, lam eta) = lam**2 r(y, eta)."""
        worst = 0.0
        for yp, yn in points:
            base = complex(self.r(yp, yn, self.eta0))
            for lam in lambdas:
                v = complex(self.r(yp, yn, lam * self.eta0))
                worst = max(worst, abs(v - lam ** 2 * base) / abs(lam ** 2 * base))
        return worst

    def to_dict(self) -> dict:
        return {"name": self.name, "eta0": self.eta0, **self.params}


def constant_metric(scale: float = 0.25) -> SymbolModel:
    """r = scale * eta**2."""
    if not scale > 0:
        raise ValueError("scale must be positive")
    return SymbolModel(lambda yp, yn, eta: scale * eta ** 2, name="constant", params={"scale": scale})


def quadratic_metric(epsilon: float = 0.1) -> SymbolModel:
    """r = (1 + epsilon y'**2) eta**2 / 4."""
    return SymbolModel(lambda yp, yn, eta: (1 + epsilon * yp ** 2) * eta ** 2 * 0.25,
                       name="quadratic", params={"epsilon": epsilon})


def depth_metric(epsilon: float = 0.1) -> SymbolModel:
    """r = (1 + epsilon y_n) exp(epsilon y') eta**2 / 4, coupling both variables."""
    return SymbolModel(lambda yp, yn, eta: (1 + epsilon * yn) * jets.exp(epsilon * yp) * eta ** 2 * 0.25,
                       name="depth", params={"epsilon": epsilon})


METRIC_FACTORIES = {"constant": constant_metric, "quadratic": quadratic_metric, "depth": depth_metric}


def metric_from_spec(spec: dict) -> SymbolModel:
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind not in METRIC_FACTORIES:
        raise ValueError(f"unknown metric kind {kind!r}; expected one of {sorted(METRIC_FACTORIES)}")
    return METRIC_FACTORIES[kind](**spec)


@dataclass(frozen=True, eq=False)
class PhaseJet:
    """Taylor jet of phi about (y0, y_n = 0) for frequency xi.

    Attributes:
        base_point: (y0, xi).
        jet: coefficients c[a, b] of (y' - y0)**a y_n**b.
        order: N, the highest y_n power.
        s_order: P, the highest s power carried; c[a, b] is exact for a <= P - b.
    """

    base_point: tuple[float, float]
    jet: Jet
    order: int
    s_order: int

    def coefficient(self, m: int) -> Callable:
        """phi_m as a function of y' near the base point."""
        if not 0 <= m <= self.order:
            raise ValueError(f"order {m} outside 0..{self.order}")
        col = self.jet.c[: self.s_order - m + 1, m]
        y0 = self.base_point[0]
        return lambda yp: np.polyval(col[::-1], np.asarray(yp, dtype=float) - y0)

    @property
    def exact_coefficients(self) -> np.ndarray:
        """c[a, b] with entries outside the exact region set to zero."""
        c = self.jet.c.copy()
        a, b = np.indices(c.shape)
        c[a > self.s_order - b] = 0.0
        return c

    def __call__(self, y_prime, y_n):
        c = Jet(self.exact_coefficients)
        return c(np.asarray(y_prime, dtype=float) - self.base_point[0], y_n)

    def psi(self, y_prime, y_n):
        """phi - y' xi."""
        return self(y_prime, y_n) - np.asarray(y_prime, dtype=float) * self.base_point[1]

    def gradients(self, y_prime, y_n):
        """(d phi/d y', d phi/d y_n) from the exact part of the jet."""
        c = self.exact_coefficients
        s = np.asarray(y_prime, dtype=float) - self.base_point[0]
        ds = Jet(np.vstack([c[1:] * np.arange(1, c.shape[0])[:, None], np.zeros((1, c.shape[1]))]))
        dt = Jet(np.hstack([c[:, 1:] * np.arange(1, c.shape[1])[None, :], np.zeros((c.shape[0], 1))]))
        return ds(s, y_n), dt(s, y_n)

    def to_dict(self) -> dict:
        return {"base_point": list(self.base_point), "order": self.order, "s_order": self.s_order,
                "re": self.exact_coefficients.real.tolist(), "im": self.exact_coefficients.imag.tolist()}


def solve_phase_jet(model: SymbolModel, xi: float, N: int = 8, *, base_point: float = 0.0,
                    s_extra: int = 6) -> PhaseJet:
    """Order-by-order solution of the eikonal equation.

    Differentiating the equation b times in y_n at y_n = 0 gives
    ``(b+1) phi_{b+1} = i [r(y, d phi/d y')**(1/2)]_b``, whose right side only
    involves phi_0..phi_b.

    Raises:
        ValueError: N < 1 or xi == 0.
        BranchCutError: Re r <= 0 at the base point.
    """
    if N < 1:
        raise ValueError(f"order N must be at least 1, got {N}")
    if xi == 0:
        raise ValueError("xi must be nonzero")
    P = N + 1 + max(int(s_extra), 0)
    orders = (P, N)
    c = np.zeros((P + 1, N + 1), dtype=complex)
    c[0, 0] = base_point * xi
    c[1, 0] = xi
    S = Jet.variable("s", orders, at=base_point)
    T = Jet.variable("t", orders)
    for b in range(N):
        rhs = 1j * jets.sqrt(model.r(S, T, Jet(c).deriv_s()))
        c[:, b + 1] = rhs.c[:, b] / (b + 1)
    return PhaseJet((float(base_point), float(xi)), Jet(c), N, P)


def residual_jet(model: SymbolModel, pj: PhaseJet) -> Jet:
    """Jet of ``d phi/d y_n - i r(..)**(1/2)``; vanishes for y_n-orders < N."""
    c = pj.exact_coefficients
    orders = pj.jet.orders
    dt = np.zeros_like(c)
    dt[:, :-1] = c[:, 1:] * np.arange(1, c.shape[1])[None, :]
    S = Jet.variable("s", orders, at=pj.base_point[0])
    T = Jet.variable("t", orders)
    return Jet(dt) - 1j * jets.sqrt(model.r(S, T, Jet(c).deriv_s()))


def eikonal_residual(model: SymbolModel, pj: PhaseJet, y_n, y_prime: Optional[float] = None):
    """Pointwise residual of the truncated phase at (y', y_n)."""
    yp = pj.base_point[0] if y_prime is None else y_prime
    d_s, d_t = pj.gradients(yp, y_n)
    r = np.vectorize(lambda e, t: complex(model.r(yp, t, e)))(d_s, np.asarray(y_n, dtype=float))
    return np.abs(d_t - 1j * np.sqrt(r))


def residual_ratio(model: SymbolModel, pj: PhaseJet, y_n: float = 0.1) -> float:
    """residual(y_n) / residual(y_n / 2); about 2**N for a correct order-N jet."""
    r1 = float(eikonal_residual(model, pj, y_n))
    r2 = float(eikonal_residual(model, pj, y_n / 2))
    if r2 == 0:
        return np.inf if r1 > 0 else np.nan
    return r1 / r2


@dataclass(frozen=True)
class PsiBoundsReport:
    """c1 y_n <= Im psi <= c2 y_n and |Re psi| <= c3 y_n**2 on the sampled box."""

    c1: float
    c2: float
    c3: float
    ok: bool


def psi_bounds_check(pj: PhaseJet, y_prime_range=(-0.1, 0.1), y_n_max: float = 0.1,
                     n_samples: int = 21) -> PsiBoundsReport:
    if pj.order < 2:
        raise ValueError("psi bounds need a jet of order at least 2")
    if not y_n_max > 0:
        raise ValueError("y_n_max must be positive")
    yp = np.linspace(*y_prime_range, n_samples)
    yn = np.linspace(y_n_max / n_samples, y_n_max, n_samples)
    YP, YN = np.meshgrid(yp, yn, indexing="ij")
    psi = pj.psi(YP, YN)
    im_ratio = psi.imag / YN
    re_ratio = np.abs(psi.real) / YN ** 2
    c1, c2, c3 = float(im_ratio.min()), float(im_ratio.max()), float(re_ratio.max())
    ok = bool(c1 > 0 and np.all(np.isfinite(psi)))
    return PsiBoundsReport(c1, c2, c3, ok)


def _branch_sqrt(v: complex) -> complex:
    v = complex(v)
    if not v.real > 0:
        raise BranchCutError(f"r = {v:.6g} leaves the principal-branch region Re r > 0")
    return np.sqrt(v)


def boundary_normal_data(model: SymbolModel, phase_gradient, t, eta0: Optional[float] = None,
                         y_prime: float = 0.0) -> complex:
    """``i (r(y', 0, grad - t eta0)**(1/2) + r(y', 0, t eta0)**(1/2))``.

    Raises:
        BranchCutError: either r value has Re r <= 0.
    """
    eta0 = model.eta0 if eta0 is None else eta0
    a = _branch_sqrt(model.r(y_prime, 0.0, phase_gradient - t * eta0))
    b = _branch_sqrt(model.r(y_prime, 0.0, t * eta0))
    return complex(1j * (a + b))


def conormal_point_value(pj: PhaseJet) -> complex:
    """Normal derivative -2 d phi/d y_n at the base point, equal to -2i r(0, xi)**(1/2)."""
    return complex(-2.0 * pj.jet.c[0, 1])
