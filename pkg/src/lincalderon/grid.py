"""Model domain: the periodic half-strip [0, 2*pi) x [0, L].

The tangential variable y' is periodic and handled by Fourier modes, the
normal variable y_n in [0, L] is sampled on a depth grid. Two depth rules are
available:

``uniform``
    equispaced nodes, trapezoid weights, second order finite differences.
``chebyshev``
    spectral collocation on Gauss-Lobatto nodes. The nodes are the
    Legendre-Gauss-Lobatto points (clustered at both ends like Chebyshev
    points) because their quadrature weights form a diagonal
    summation-by-parts norm for the collocation derivative, which is what
    makes the discrete Green formula hold to rounding error.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import special

DEPTH_RULES = ("uniform", "chebyshev")


class ProfileEvaluationError(ValueError):
    """Raised when a profile evaluator fails or returns non-finite values."""


@dataclass(frozen=True, eq=False)
class HalfStrip:
    """Sampling grid on the half-strip.

    Attributes:
        n_boundary_modes: number of Fourier modes (and boundary points) in y'.
        L: truncation depth of the normal variable.
        n_depth_points: size of the normal grid, endpoints included.
        depth_rule: ``"uniform"`` or ``"chebyshev"``.
    """

    n_boundary_modes: int
    L: float
    n_depth_points: int
    depth_rule: str = "chebyshev"

    def __post_init__(self):
        if int(self.n_boundary_modes) != self.n_boundary_modes or self.n_boundary_modes < 1:
            raise ValueError(f"n_boundary_modes must be a positive integer, got {self.n_boundary_modes}")
        if not np.isfinite(self.L) or self.L <= 0:
            raise ValueError(f"depth L must be positive, got {self.L}")
        if int(self.n_depth_points) != self.n_depth_points or self.n_depth_points < 4:
            raise ValueError(f"n_depth_points must be an integer >= 4, got {self.n_depth_points}")
        if self.depth_rule not in DEPTH_RULES:
            raise ValueError(f"depth_rule must be one of {DEPTH_RULES}, got {self.depth_rule!r}")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_boundary_modes, self.n_depth_points)

    @cached_property
    def boundary_points(self) -> np.ndarray:
        n = self.n_boundary_modes
        return 2.0 * np.pi * np.arange(n) / n

    @cached_property
    def modes(self) -> np.ndarray:
        """Integer wavenumbers in FFT order."""
        n = self.n_boundary_modes
        return np.rint(np.fft.fftfreq(n, 1.0 / n)).astype(int)

    @cached_property
    def reflection(self) -> np.ndarray:
        """Index map j -> -j on the mode axis (exact for the DFT)."""
        n = self.n_boundary_modes
        return (-np.arange(n)) % n

    @cached_property
    def _depth_rule_data(self):
        if self.depth_rule == "uniform":
            return _uniform_rule(self.n_depth_points, self.L)
        return _lobatto_rule(self.n_depth_points, self.L)

    @property
    def depth_points(self) -> np.ndarray:
        return self._depth_rule_data[0]

    @property
    def weights(self) -> np.ndarray:
        """Quadrature weights on [0, L] (nonnegative, summing to L)."""
        return self._depth_rule_data[1]

    @property
    def second_derivative(self) -> np.ndarray:
        """d^2/dy_n^2 on the depth grid; only interior rows enter the scheme."""
        return self._depth_rule_data[2]

    @property
    def flux_rows(self) -> tuple[np.ndarray, np.ndarray]:
        """Rows ``(d1, d2)`` at y_n = 0 used by the boundary flux.

        The outward normal derivative of a grid solution u is
        ``-(d1 @ u) - w_0 * (d2 @ u - (j**2 + V_0) u_0 - source_0)``, i.e. the
        one-sided derivative corrected by the boundary residual. This is the
        flux for which the discrete Green formula is exact.
        """
        return self._depth_rule_data[3], self._depth_rule_data[4]

    def quadrature(self, values: np.ndarray) -> np.ndarray:
        """Integrate samples over [0, L] along the last axis."""
        return np.asarray(values) @ self.weights

    @property
    def spacing(self) -> Optional[float]:
        if self.depth_rule == "uniform":
            return self.L / (self.n_depth_points - 1)
        return None

    def to_dict(self) -> dict:
        return {
            "n_boundary_modes": int(self.n_boundary_modes),
            "L": float(self.L),
            "n_depth_points": int(self.n_depth_points),
            "depth_rule": self.depth_rule,
        }


def make_grid(n_boundary_modes: int, L: float, n_depth_points: int,
              depth_rule: str = "chebyshev") -> HalfStrip:
    return HalfStrip(n_boundary_modes, float(L), n_depth_points, depth_rule)


def _uniform_rule(n, L):
    y = np.linspace(0.0, L, n)
    h = L / (n - 1)
    w = np.full(n, h)
    w[0] = w[-1] = h / 2
    d2 = (np.diag(np.full(n - 1, 1.0), 1) + np.diag(np.full(n - 1, 1.0), -1)
          - 2.0 * np.eye(n)) / h**2
    d2[0] = 0.0
    d2[-1] = 0.0
    d1_row = np.zeros(n)
    d1_row[0], d1_row[1] = -1.0 / h, 1.0 / h
    return y, w, d2, d1_row, np.zeros(n)


def _lobatto_rule(n, L):
    N = n - 1
    interior = special.roots_jacobi(N - 1, 1.0, 1.0)[0]
    x = np.concatenate([[-1.0], np.sort(interior), [1.0]])
    PN = special.eval_legendre(N, x)
    w = 2.0 / (N * (N + 1) * PN**2)
    dx = x[:, None] - x[None, :]
    np.fill_diagonal(dx, 1.0)
    D = (PN[:, None] / PN[None, :]) / dx
    np.fill_diagonal(D, 0.0)
    D[0, 0] = -N * (N + 1) / 4.0
    D[-1, -1] = N * (N + 1) / 4.0
    scale = 2.0 / L
    y = L * (x + 1.0) / 2.0
    y[0], y[-1] = 0.0, L
    D1 = D * scale
    D2 = D1 @ D1
    return y, w * L / 2.0, D2, D1[0].copy(), D2[0].copy()


@dataclass(frozen=True, eq=False)
class AnalyticProfile:
    """Scalar field on the half-strip.

    ``evaluator(y_prime, y_n)`` must broadcast over numpy arrays.
    ``boundary_taylor[k](y_prime)`` is d^k/dy_n^k at y_n = 0, so the partial
    sums are ``sum_k boundary_taylor[k](y') * y_n**k / k!``.
    """

    evaluator: Callable[[np.ndarray, np.ndarray], np.ndarray]
    boundary_taylor: Optional[Sequence[Callable[[np.ndarray], np.ndarray]]] = None
    support_depth: Optional[float] = None
    name: str = "custom"
    tangential: bool = True  # False when the profile does not depend on y'
    params: dict = field(default_factory=dict)

    def __call__(self, y_prime, y_n):
        y_prime = np.asarray(y_prime, dtype=float)
        y_n = np.asarray(y_n, dtype=float)
        out = np.asarray(self.evaluator(y_prime, y_n), dtype=complex)
        out = np.broadcast_to(out, np.broadcast_shapes(y_prime.shape, y_n.shape, out.shape))
        if self.support_depth is not None:
            out = np.where(y_n <= self.support_depth, out, 0.0)
        return out

    def taylor_partial_sum(self, y_prime, y_n, order: int):
        if self.boundary_taylor is None:
            raise ValueError(f"profile {self.name!r} carries no boundary Taylor data")
        y_n = np.asarray(y_n, dtype=float)
        total = 0.0
        for k, coeff in enumerate(self.boundary_taylor[: order + 1]):
            total = total + np.asarray(coeff(y_prime)) * y_n**k / special.factorial(k)
        return total

    def is_zero(self, grid: HalfStrip) -> bool:
        return not np.any(sample_profile(self, grid).values)


@dataclass(frozen=True, eq=False)
class GridField:
    """Samples of a field; ``values`` has shape (n_boundary_modes, n_depth_points).

    ``space`` is ``"points"`` (row p is y' = 2 pi p / N) or ``"modes"`` (row is
    the Fourier coefficient of wavenumber ``grid.modes[row]``).
    """

    values: np.ndarray
    grid: HalfStrip
    space: str = "points"

    def __post_init__(self):
        if self.values.shape != self.grid.shape:
            raise ValueError(f"field shape {self.values.shape} does not match grid {self.grid.shape}")
        if self.space not in ("points", "modes"):
            raise ValueError(f"unknown field space {self.space!r}")

    def to_modes(self) -> "GridField":
        if self.space == "modes":
            return self
        coeffs = np.fft.fft(self.values, axis=0) / self.grid.n_boundary_modes
        return GridField(coeffs, self.grid, "modes")

    def to_points(self) -> "GridField":
        if self.space == "points":
            return self
        vals = np.fft.ifft(self.values, axis=0) * self.grid.n_boundary_modes
        return GridField(vals, self.grid, "points")


def sample_profile(p: AnalyticProfile, g: HalfStrip, space: str = "points") -> GridField:
    yp, yn = np.meshgrid(g.boundary_points, g.depth_points, indexing="ij")
    try:
        vals = p(yp, yn)
    except Exception as exc:
        _locate_failure(p, yp, yn, exc)
        raise
    vals = np.array(vals, dtype=complex)
    bad = ~np.isfinite(vals)
    if bad.any():
        i, k = np.argwhere(bad)[0]
        raise ProfileEvaluationError(
            f"profile {p.name!r} is not finite at y'={yp[i, k]:.6g}, y_n={yn[i, k]:.6g}")
    field_ = GridField(vals, g, "points")
    return field_.to_modes() if space == "modes" else field_


def _locate_failure(p, yp, yn, exc):
    for a, b in zip(yp.ravel(), yn.ravel()):
        try:
            p(a, b)
        except Exception as inner:
            raise ProfileEvaluationError(
                f"profile {p.name!r} failed at y'={a:.6g}, y_n={b:.6g}: {inner}") from inner
    raise ProfileEvaluationError(f"profile {p.name!r} failed on the grid: {exc}") from exc


# -- named closed forms ------------------------------------------------------

def zero_profile() -> AnalyticProfile:
    return AnalyticProfile(lambda yp, yn: np.zeros(np.broadcast_shapes(np.shape(yp), np.shape(yn))),
                           boundary_taylor=[lambda yp: np.zeros_like(np.asarray(yp, dtype=float))],
                           name="zero", tangential=False)


def constant_profile(value: complex) -> AnalyticProfile:
    return AnalyticProfile(lambda yp, yn: np.full(np.broadcast_shapes(np.shape(yp), np.shape(yn)), value,
                                                  dtype=complex),
                           boundary_taylor=[lambda yp: np.full(np.shape(yp), value, dtype=complex)],
                           name="constant", tangential=False, params={"value": value})


def _exp_taylor(amplitude, rate, angular=None, n_terms=60):
    def coeff(k):
        if angular is None:
            return lambda yp: np.full(np.shape(yp), amplitude * (-rate) ** k, dtype=complex)
        return lambda yp: amplitude * (-rate) ** k * angular(np.asarray(yp, dtype=float))
    return [coeff(k) for k in range(n_terms)]


def exponential_profile(amplitude: float = 1.0, rate: float = 1.0) -> AnalyticProfile:
    """``amplitude * exp(-rate * y_n)``."""
    return AnalyticProfile(lambda yp, yn: amplitude * np.exp(-rate * yn) + 0.0 * yp,
                           boundary_taylor=_exp_taylor(amplitude, rate),
                           name="exp", tangential=False,
                           params={"amplitude": amplitude, "rate": rate})


def exp_cos_profile(amplitude: float = 1.0, rate: float = 1.0, mode: int = 1) -> AnalyticProfile:
    """``amplitude * exp(-rate * y_n) * cos(mode * y')``."""
    ang = lambda yp: np.cos(mode * yp)
    return AnalyticProfile(lambda yp, yn: amplitude * np.exp(-rate * yn) * np.cos(mode * yp),
                           boundary_taylor=_exp_taylor(amplitude, rate, ang),
                           name="exp_cos", tangential=mode != 0,
                           params={"amplitude": amplitude, "rate": rate, "mode": mode})


def inverse_linear_profile(scale: float = 1.0) -> AnalyticProfile:
    """``1 / (1 + scale * y_n)``, analytic on |y_n| < 1/scale."""
    taylor = [(lambda k: (lambda yp: np.full(np.shape(yp), (-scale) ** k * special.factorial(k),
                                             dtype=complex)))(k) for k in range(60)]
    return AnalyticProfile(lambda yp, yn: 1.0 / (1.0 + scale * yn) + 0.0 * yp,
                           boundary_taylor=taylor, name="inverse_linear", tangential=False,
                           params={"scale": scale})


def basis_profile(j: int, m: int, rate: float = 1.0) -> AnalyticProfile:
    """``exp(i j y') * y_n**m * exp(-rate * y_n)``."""
    def ev(yp, yn):
        return np.exp(1j * j * yp) * yn**m * np.exp(-rate * yn)

    def coeff(k):
        # d^k/dy^k [y^m e^{-ry}] at 0 = k!/(k-m)! (-r)^(k-m) for k >= m
        if k < m:
            c = 0.0
        else:
            c = special.factorial(k) / special.factorial(k - m) * (-rate) ** (k - m)
        return lambda yp: c * np.exp(1j * j * np.asarray(yp, dtype=float))

    return AnalyticProfile(ev, boundary_taylor=[coeff(k) for k in range(40)],
                           name="basis", tangential=j != 0,
                           params={"j": j, "m": m, "rate": rate})


PROFILE_FACTORIES = {
    "zero": zero_profile,
    "constant": constant_profile,
    "exp": exponential_profile,
    "exp_cos": exp_cos_profile,
    "inverse_linear": inverse_linear_profile,
    "basis": basis_profile,
}


def profile_from_spec(spec: dict) -> AnalyticProfile:
    """Build a named closed-form profile from ``{"kind": ..., **params}``."""
    spec = dict(spec)
    kind = spec.pop("kind")
    if kind not in PROFILE_FACTORIES:
        raise ValueError(f"unknown profile kind {kind!r}; expected one of {sorted(PROFILE_FACTORIES)}")
    return PROFILE_FACTORIES[kind](**spec)
