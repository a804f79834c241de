"""Gaussian FBI transform, its weight functions and a decay-rate detector.

The transform is ``Tu(z; h) = C h**(-3n/4) int exp(-(z - y)**2 / (2h)) u(y) dy``
with C = 2**(-n/2) pi**(-3n/4), which makes u -> Tu exp(-Phi0/h) an isometry
from L2(R^n) into L2(C^n). Magnitudes are handled in log form: the factor
exp(|Im z|**2 / (2h)) is split off analytically.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate

WEIGHT_KINDS = ("phi0", "phi1", "phi1_ext", "phi3", "phi4")


class SamplingError(ValueError):
    """Sample grid too coarse for the Gaussian kernel width."""


def _as_z(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    if z.shape[-1] != 2:
        raise ValueError(f"weights are defined for z in C^2, got trailing dimension {z.shape[-1]}")
    return z


def weight(kind: str, z) -> np.ndarray:
    """Closed-form weight for the quadratic phase ``i (z - y)**2 / 2``.

    ``z`` has trailing dimension 2, ordered (z', z_n).
    """
    z = _as_z(z)
    im2 = np.sum(z.imag ** 2, axis=-1)
    re_n = z[..., 1].real
    phi0 = 0.5 * im2
    if kind == "phi0":
        out = phi0
    elif kind == "phi1_ext":
        out = phi0 - 0.5 * re_n ** 2
    elif kind == "phi1":
        out = np.where(re_n >= 0, phi0, phi0 - 0.5 * re_n ** 2)
    elif kind == "phi3":
        out = 0.5 * (z[..., 1].imag ** 2 - re_n ** 2)
    elif kind == "phi4":
        out = np.zeros_like(phi0)
    else:
        raise ValueError(f"unknown weight kind {kind!r}; expected one of {WEIGHT_KINDS}")
    return out if np.ndim(out) else float(out)


@dataclass(frozen=True)
class FBIWeight:
    kind: str

    def __post_init__(self):
        if self.kind not in WEIGHT_KINDS:
            raise ValueError(f"unknown weight kind {self.kind!r}")

    def __call__(self, z):
        return weight(self.kind, z)


@dataclass(frozen=True)
class FBISample:
    z: tuple
    h: float
    value: complex
    log_abs: float


def _trapezoid_weights(y: np.ndarray) -> np.ndarray:
    d = np.diff(y)
    w = np.zeros_like(y)
    w[:-1] += d / 2
    w[1:] += d / 2
    return w


def _check_axes(u: np.ndarray, axes: Sequence[np.ndarray], h: float):
    if not 0 < h <= 1:
        raise ValueError(f"h must lie in (0, 1], got {h}")
    if len(axes) != u.ndim:
        raise ValueError(f"need {u.ndim} sample axes for a {u.ndim}-D array, got {len(axes)}")
    need = math.sqrt(h) / 8
    for k, ax in enumerate(axes):
        ax = np.asarray(ax, dtype=float)
        if ax.ndim != 1 or len(ax) != u.shape[k]:
            raise ValueError(f"axis {k} does not match sample shape {u.shape}")
        if np.any(np.diff(ax) <= 0):
            raise ValueError(f"axis {k} must be strictly increasing")
        step = float(np.max(np.diff(ax)))
        if step > need * (1 + 1e-9):
            raise SamplingError(f"axis {k} spacing {step:.3g} exceeds sqrt(h)/8 = {need:.3g}; "
                                f"need at least {int(math.ceil((ax[-1] - ax[0]) / need)) + 1} points")


def _scaled_transform(u, axes, z, h):
    """Tu(z) exp(-|Im z|^2 / (2h)) and the split-off log factor."""
    u = np.asarray(u, dtype=complex)
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if len(z) != u.ndim:
        raise ValueError(f"z has {len(z)} components for a {u.ndim}-D sample")
    _check_axes(u, axes, h)
    n = u.ndim
    out = u
    for k in range(n - 1, -1, -1):
        y = np.asarray(axes[k], dtype=float)
        x, xi = z[k].real, z[k].imag
        ker = np.exp(-(x - y) ** 2 / (2 * h) - 1j * (x - y) * xi / h) * _trapezoid_weights(y)
        out = out @ ker
    const = 2 ** (-n / 2) * math.pi ** (-3 * n / 4) * h ** (-3 * n / 4)
    return complex(out) * const, float(np.sum(z.imag ** 2)) / (2 * h)


def fbi(u, axes, z, h: float) -> complex:
    """FBI transform of samples ``u`` on the tensor grid ``axes`` at ``z``.

    Raises:
        SamplingError: spacing coarser than sqrt(h)/8 on some axis.
    """
    val, logf = _scaled_transform(u, axes, z, h)
    return val * math.exp(logf)


def fbi_log_abs(u, axes, z, h: float) -> float:
    """log|Tu(z; h)|, -inf where the transform vanishes."""
    val, logf = _scaled_transform(u, axes, z, h)
    return math.log(abs(val)) + logf if val != 0 else -math.inf


def fbi_sample(u, axes, z, h: float) -> FBISample:
    val, logf = _scaled_transform(u, axes, z, h)
    la = math.log(abs(val)) + logf if val != 0 else -math.inf
    return FBISample(tuple(complex(c) for c in np.atleast_1d(z)), float(h), val * math.exp(logf), la)


def weighted_norm_sq(u, axes, x_grid, xi_grid, h: float) -> float:
    """``int |Tu|^2 exp(-2 Phi0 / h)`` over a box in z = x + i xi (one variable)."""
    u = np.asarray(u)
    if u.ndim != 1:
        raise ValueError("weighted_norm_sq is implemented for 1-D samples")
    vals = np.array([[abs(_scaled_transform(u, axes, [x + 1j * xi], h)[0]) ** 2 for xi in xi_grid]
                     for x in x_grid])
    return float(integrate.trapezoid(integrate.trapezoid(vals, xi_grid, axis=1), x_grid))


# -- gap and rate diagnostics ---------------------------------------------------

@dataclass(frozen=True)
class GapReport:
    """(Phi0 - Phi1) / (Re z_n)**2 per sample; 1/2 on the negative half-space."""

    gaps: np.ndarray
    max_deviation: float
    ok: bool


def halfspace_gap_check(zs, tol: float = 1e-12) -> GapReport:
    zs = _as_z(np.atleast_2d(zs))
    re_n = zs[:, 1].real
    if np.any(re_n == 0):
        raise ValueError("samples must avoid the interface Re z_n = 0")
    gaps = (weight("phi0", zs) - weight("phi1", zs)) / re_n ** 2
    neg = re_n < 0
    dev = float(np.max(np.abs(gaps[neg] - 0.5))) if neg.any() else 0.0
    return GapReport(np.asarray(gaps), dev, bool(dev <= tol and np.all(gaps[~neg] == 0)))


def fit_rate(hs, log_abs) -> float:
    """Limit of h log|Tu| as h -> 0 from a geometric ladder.

    Fits ``h log|Tu| = rate + a h log h + b h``, which captures the power-law
    prefactors of Gaussian integrals exactly.
    """
    hs = np.asarray(hs, dtype=float)
    la = np.asarray(log_abs, dtype=float)
    if len(hs) < 3:
        raise ValueError("rate fit needs at least three h values")
    ratios = hs[1:] / hs[:-1]
    if not np.allclose(ratios, ratios[0], rtol=1e-9):
        raise ValueError("h ladder must be geometric")
    if np.any(np.isneginf(la)):
        return -math.inf
    M = np.column_stack([np.ones_like(hs), hs * np.log(hs), hs])
    coef, *_ = np.linalg.lstsq(M, hs * la, rcond=None)
    return float(coef[0])


@dataclass(frozen=True)
class IndicatorResult:
    z: tuple
    rate: float
    phi3: float
    label: str


def classify_rate(rate: float, phi3: float, rel_tol: float = 0.25) -> str:
    """'analytic-like' near Phi4 = 0, 'boundary-cut-like' near Phi3, else 'undetermined'."""
    if rate == -math.inf:
        return "analytic-like"
    tol = rel_tol * abs(phi3)
    near4 = abs(rate) <= tol
    near3 = abs(rate - phi3) <= tol
    if near4 and not near3:
        return "analytic-like"
    if near3 and not near4:
        return "boundary-cut-like"
    return "undetermined"


def analyticity_indicator(u, axes, zs, hs, rel_tol: float = 0.25) -> list[IndicatorResult]:
    """Classify the exponential decay rate of Tu at each z."""
    hs = np.asarray(hs, dtype=float)
    out = []
    for z in np.atleast_2d(np.asarray(zs, dtype=complex)):
        la = [fbi_log_abs(u, axes, z, h) for h in hs]
        rate = fit_rate(hs, la)
        p3 = float(weight("phi3", z))
        out.append(IndicatorResult(tuple(complex(c) for c in z), rate, p3, classify_rate(rate, p3, rel_tol)))
    return out


def write_indicator_csv(path, results: Sequence[IndicatorResult]):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["re_z1", "im_z1", "re_z2", "im_z2", "h_rate", "class"])
        for r in results:
            z1, z2 = r.z
            w.writerow([f"{v:.17g}" for v in (z1.real, z1.imag, z2.real, z2.imag, r.rate)] + [r.label])
