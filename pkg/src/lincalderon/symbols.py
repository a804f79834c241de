"""Symbol probing of a boundary operator and asymptotic coefficient extraction.

A probe is a coherent state ``w(s) exp(i tau s)``, s = y - y0, periodized
over the circle. The window w is a Gaussian of standard deviation
``gaussian_width * sqrt(h)`` (h = 1/tau by default) times a smooth compactly
supported cutoff. For an operator A on boundary modes the raw symbol

    (A p)(y0) = sum_j w^_j sigma(y0, j)

is an exact average of the frequency-domain symbol
``sigma(y0, j) = sum_m A[m, j] exp(i (m - j) y0)`` against the probe's
spectral weights. Coefficient extraction uses these same weights to remove
the smoothing bias, so the fitted c_k belong to sigma itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .forward import DiscreteOperator
from .laplace import AsymptoticSeries, required_constants


class AliasingError(ValueError):
    """Probe spectrum reaches the Nyquist frequency of the grid."""


class NotAsymptoticError(ValueError):
    """Table does not decay like an order -1 symbol."""


# spectral half-width of the probe, in units of 1/std
_SPECTRAL_REACH = 8.0
# tolerated probe mass on frequencies j <= 0, relative to the total
_LEAK_TOL = 1e-9


@dataclass(frozen=True)
class ProbeParams:
    """Coherent-state probe shape.

    Attributes:
        h: semiclassical parameter; None ties it to the frequency, h = 1/tau.
        gaussian_width: window std in units of sqrt(h).
        cutoff_radius: support radius of the smooth cutoff, in window stds.
    """

    h: Optional[float] = None
    gaussian_width: float = 4.0
    cutoff_radius: float = 10.0

    def __post_init__(self):
        if self.h is not None and not 0 < self.h <= 1:
            raise ValueError(f"h must lie in (0, 1], got {self.h}")
        if not self.gaussian_width > 0:
            raise ValueError(f"gaussian_width must be positive, got {self.gaussian_width}")
        if not self.cutoff_radius > 2:
            raise ValueError(f"cutoff_radius must exceed 2, got {self.cutoff_radius}")

    def std(self, tau: float) -> float:
        h = self.h if self.h is not None else 1.0 / abs(tau)
        return self.gaussian_width * math.sqrt(h)

    def to_dict(self) -> dict:
        return {"h": self.h, "gaussian_width": self.gaussian_width, "cutoff_radius": self.cutoff_radius}


def _smooth_step(u):
    """C-infinity step: 1 for u <= 0, 0 for u >= 1."""
    u = np.clip(u, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(u < 1, np.exp(-1.0 / np.where(u < 1, 1 - u, 1.0)), 0.0)
        b = np.where(u > 0, np.exp(-1.0 / np.where(u > 0, u, 1.0)), 0.0)
    return a / (a + b)


def _window_line(s, std: float, cutoff_radius: float):
    """Gaussian times smooth cutoff on the line, 1 at s = 0."""
    R = cutoff_radius * std
    return np.exp(-0.5 * (s / std) ** 2) * _smooth_step(2 * np.abs(s) / R - 1)


def _images(std: float, cutoff_radius: float) -> range:
    n = int(math.ceil(cutoff_radius * std / (2 * math.pi))) + 1
    return range(-n, n + 1)


def probe_values(y, y0: float, tau: float, probe: ProbeParams):
    """Probe ``sum_n w(s + 2 pi n) exp(i tau (s + 2 pi n))``, s = y - y0.

    Smooth and periodic for every real tau. Normalized to 1 at y = y0.
    """
    std = probe.std(tau)
    s = np.asarray(y, dtype=float) - y0
    out = np.zeros(s.shape, dtype=complex)
    centre = 0j
    for n in _images(std, probe.cutoff_radius):
        z = s + 2 * math.pi * n
        out += _window_line(z, std, probe.cutoff_radius) * np.exp(1j * tau * z)
        centre += _window_line(2 * math.pi * n, std, probe.cutoff_radius) * np.exp(2j * math.pi * tau * n)
    return out / centre


def probe_spectrum(n_modes: int, y0, tau: float, probe: ProbeParams) -> np.ndarray:
    """Mode coefficients of the probes centred at each ``y0``, shape (len(y0), N).

    Raises:
        AliasingError: the probe spectrum would wrap past N/2.
    """
    std = probe.std(tau)
    reach = abs(tau) + _SPECTRAL_REACH / std
    if reach >= n_modes / 2:
        raise AliasingError(f"probe at tau={tau} reaches frequency {reach:.1f}, at or beyond "
                            f"the grid Nyquist frequency {n_modes // 2}; refine the boundary grid")
    y = 2 * np.pi * np.arange(n_modes) / n_modes
    y0 = np.atleast_1d(np.asarray(y0, dtype=float))
    p = np.stack([probe_values(y, c, tau, probe) for c in y0])
    return np.fft.fft(p, axis=1) / n_modes


def spectral_weights(n_modes: int, y0, tau: float, probe: ProbeParams) -> np.ndarray:
    """Weights ``w^_j`` with raw symbol = sum_j w^_j sigma(y0, j), shape (len(y0), N)."""
    j = np.fft.fftfreq(n_modes, 1.0 / n_modes)
    y0 = np.atleast_1d(np.asarray(y0, dtype=float))
    return probe_spectrum(n_modes, y0, tau, probe) * np.exp(1j * j[None, :] * y0[:, None])


def _operator_matrix(op) -> np.ndarray:
    m = op.matrix if isinstance(op, DiscreteOperator) else np.asarray(op)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square boundary operator, got shape {m.shape}")
    return m


def raw_symbol(op, y_prime, tau: float, probe: Optional[ProbeParams] = None, *, direction: int = 1):
    """Probe an operator on boundary modes at points ``y_prime`` and frequency tau.

    ``direction=-1`` probes the reflected ray (frequency -tau).

    Raises:
        ValueError: tau < 1 or direction not +-1.
        AliasingError: tau too close to the grid Nyquist frequency.
    """
    if not tau >= 1:
        raise ValueError(f"tau must be at least 1, got {tau}")
    if direction not in (1, -1):
        raise ValueError(f"direction must be +1 or -1, got {direction}")
    tau = direction * tau
    probe = probe or ProbeParams()
    A = _operator_matrix(op)
    n = A.shape[0]
    y0 = np.atleast_1d(np.asarray(y_prime, dtype=float))
    P = probe_spectrum(n, y0, tau, probe)          # (npts, N)
    R = P @ A.T                                    # (A p)^ for each probe
    m = np.fft.fftfreq(n, 1.0 / n)
    vals = np.sum(R * np.exp(1j * m[None, :] * y0[:, None]), axis=1)
    return vals if np.ndim(y_prime) else complex(vals[0])


@dataclass(frozen=True, eq=False)
class SymbolTable:
    """Raw symbol samples on a (boundary point, frequency) grid.

    ``probe`` and ``n_modes`` record how the samples were taken. Tables
    loaded from data without them are treated as exact samples of sigma.
    ``direction`` is +1 for the ray xi' = tau and -1 for xi' = -tau.
    """

    boundary_points: np.ndarray
    frequencies: np.ndarray
    values: np.ndarray
    probe: Optional[ProbeParams] = None
    n_modes: Optional[int] = None
    direction: int = 1
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = np.atleast_1d(np.asarray(self.boundary_points, dtype=float))
        fr = np.atleast_1d(np.asarray(self.frequencies, dtype=float))
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (len(pts), len(fr)):
            raise ValueError(f"values shape {v.shape} does not match "
                             f"({len(pts)} points, {len(fr)} frequencies)")
        if np.any(np.diff(fr) <= 0):
            raise ValueError("frequencies must be strictly increasing")
        if len(fr) and fr[0] < 1:
            raise ValueError(f"frequencies must be at least 1, got {fr[0]}")
        if not np.all(np.isfinite(v)):
            raise ValueError("symbol values must be finite")
        if self.direction not in (1, -1):
            raise ValueError(f"direction must be +1 or -1, got {self.direction}")
        for name, val in (("boundary_points", pts), ("frequencies", fr), ("values", v)):
            object.__setattr__(self, name, val)

    def basis(self, point_index: int, n_terms: int) -> np.ndarray:
        """``B_k(tau) = sum_j w^_j j**-k`` for k = 1..n_terms, shape (n_freq, n_terms)."""
        k = np.arange(1, n_terms + 1)
        tau = self.frequencies
        if self.probe is None:
            return tau[:, None] ** -k[None, :]
        j = np.fft.fftfreq(self.n_modes, 1.0 / self.n_modes)
        pos = j >= 1
        out = np.empty((len(tau), n_terms), dtype=complex)
        y0 = self.boundary_points[point_index]
        for i, t in enumerate(tau):
            w = spectral_weights(self.n_modes, y0, t, self.probe)[0]
            leak = np.sum(np.abs(w[~pos]))
            if leak > _LEAK_TOL * np.sum(np.abs(w)):
                raise ValueError(f"probe at tau={t} leaks into non-positive frequencies "
                                 f"(mass {leak:.2e}); raise the lowest frequency")
            out[i] = (w[pos, None] * j[pos, None] ** -k[None, :].astype(float)).sum(axis=0)
        return out

    def conjugate_partner(self) -> "SymbolTable":
        """Table on the reflected ray, from conjugate symmetry of real potentials."""
        return replace(self, values=np.conj(self.values), direction=-self.direction)

    def subset(self, lo: float, hi: float) -> "SymbolTable":
        sel = (self.frequencies >= lo * (1 - 1e-12)) & (self.frequencies <= hi * (1 + 1e-12))
        return replace(self, frequencies=self.frequencies[sel], values=self.values[:, sel])


def geometric_frequencies(tau_min: float, tau_max: float, n: int) -> np.ndarray:
    if not 1 <= tau_min < tau_max:
        raise ValueError("need 1 <= tau_min < tau_max")
    return np.geomspace(tau_min, tau_max, n)


def build_symbol_table(op, boundary_points: Sequence[float], frequencies: Sequence[float],
                       probe: Optional[ProbeParams] = None, *, direction: int = 1) -> SymbolTable:
    """Raw symbol at every (point, frequency) pair."""
    probe = probe or ProbeParams()
    A = _operator_matrix(op)
    pts = np.atleast_1d(np.asarray(boundary_points, dtype=float))
    fr = np.asarray(frequencies, dtype=float)
    vals = np.stack([raw_symbol(A, pts, t, probe, direction=direction) for t in fr], axis=1)
    return SymbolTable(pts, fr, vals, probe=probe, n_modes=A.shape[0], direction=direction)


# -- coefficient extraction ---------------------------------------------------

def _check_order(tau, sigma):
    scale = np.max(np.abs(sigma))
    if scale == 0:
        return False
    mag = np.abs(sigma) * tau
    keep = mag > 1e-12 * np.max(mag)
    if keep.sum() >= 3:
        slope = np.polyfit(np.log(tau[keep]), np.log(mag[keep]), 1)[0]
        if slope > 0.5:
            raise NotAsymptoticError(f"not an asymptotic series of order -1: tau*|sigma| grows "
                                     f"like tau**{slope:.2f}")
    return True


def _lstsq_fit(B, sigma, tau, rcond):
    t0 = tau.min()
    col = t0 ** np.arange(1, B.shape[1] + 1)
    row = tau
    M = B * col[None, :] * row[:, None]
    sol, *_ = np.linalg.lstsq(M, sigma * row, rcond=rcond)
    return sol * col


def _richardson_fit(B, sigma, tau):
    ratios = tau[1:] / tau[:-1]
    if not np.allclose(ratios, 2.0, rtol=1e-9):
        raise ValueError("richardson extraction needs a ladder with ratio 2")
    K = B.shape[1]
    c = np.zeros(K, dtype=complex)
    err = np.zeros(K)
    resid = sigma.astype(complex).copy()
    for k in range(K):
        g = resid / B[:, k]
        # g(tau) = c_k + O(1/tau); eliminate two correction orders on the top rungs
        r1 = 2 * g[1:] - g[:-1]
        r2 = (4 * r1[1:] - r1[:-1]) / 3
        c[k] = r2[-1]
        err[k] = abs(r2[-1] - r1[-1])
        resid = resid - c[k] * B[:, k]
    return c, err


def extract_coefficients(table: SymbolTable, n_terms: int, *, method: str = "lstsq",
                         rcond: float = 1e-13) -> list[AsymptoticSeries]:
    """Fit ``sigma(y0, tau) ~ sum_{k=1}^{n_terms} c_k tau**-k`` at each boundary point.

    Each result stores c_1, c_2, ... as coefficients a_0, a_1, ... (offset 1),
    so it is directly the Laplace-side series when sigma is a Laplace transform.

    Args:
        method: "lstsq" for a scaled global least-squares fit over all rungs,
            or "richardson" for ladder peeling on a ratio-2 ladder.

    Raises:
        ValueError: too few frequencies, or a range shorter than one decade.
        NotAsymptoticError: tau*|sigma| grows along the table.
    """
    tau = table.frequencies
    if n_terms < 1:
        raise ValueError("n_terms must be positive")
    if table.direction != 1:
        raise ValueError("extraction works on the +1 ray; take conjugate_partner of a -1 table")
    if method == "lstsq":
        if len(tau) < n_terms + 2:
            raise ValueError(f"need at least {n_terms + 2} frequencies for {n_terms} terms, got {len(tau)}")
        if tau.max() < 10 * tau.min():
            raise ValueError("frequency range must span at least one decade")
    elif method == "richardson":
        if len(tau) < n_terms + 3:
            raise ValueError(f"richardson needs at least {n_terms + 3} rungs, got {len(tau)}")
    else:
        raise ValueError(f"unknown method {method!r}")

    out = []
    for p in range(len(table.boundary_points)):
        sigma = table.values[p]
        if not _check_order(tau, sigma):
            out.append(AsymptoticSeries(np.zeros(n_terms), errors=np.zeros(n_terms),
                                        meta={"point": float(table.boundary_points[p])}))
            continue
        B = table.basis(p, n_terms)
        if method == "lstsq":
            c = _lstsq_fit(B, sigma, tau, rcond)
            # spread against a fit that drops the lowest quarter of the ladder
            keep = tau >= np.quantile(tau, 0.25)
            c2 = _lstsq_fit(B[keep], sigma[keep], tau[keep], rcond) if keep.sum() >= n_terms + 2 else c
            err = np.abs(c - c2)
        else:
            c, err = _richardson_fit(B, sigma, tau)
        out.append(AsymptoticSeries(c, errors=err, meta={"point": float(table.boundary_points[p])}))
    return out


# -- analytic-class diagnostics ------------------------------------------------

@dataclass(frozen=True)
class ClasReport:
    """Outcome of the Gevrey-1 class test.

    Attributes:
        min_constant: smallest C with |a_k| <= C**(k+1) k**k over the fitted k.
        passes: the bound holds for the requested C and growth is not Gevrey-1.
        growth_slope: slope of log C_k against log k on the tail; ~0 for
            analytic data, ~1 for (k!)**2 growth.
        gevrey1: growth_slope exceeds 0.5.
        remainder_slope: slope of log|remainder| against tau after optimal
            truncation, when a table was given.
    """

    min_constant: float
    passes: bool
    growth_slope: float
    gevrey1: bool
    remainder_slope: Optional[float] = None


def validate_clas(series: AsymptoticSeries, C: float, table: Optional[SymbolTable] = None,
                  point_index: int = 0) -> ClasReport:
    """Check the coefficients against the Gevrey-1 bound with constant C."""
    if not C > 0:
        raise ValueError("C must be positive")
    ck = required_constants(series.coefficients)
    cmin = float(np.max(ck)) if len(ck) else 0.0
    k = np.arange(len(ck))
    tail = (k >= max(2, len(ck) // 3)) & (ck > 0)
    slope = float(np.polyfit(np.log(k[tail]), np.log(ck[tail]), 1)[0]) if tail.sum() >= 3 else 0.0
    gev = slope > 0.5
    rem_slope = None
    if table is not None:
        tau = table.frequencies
        B = table.basis(point_index, len(series))
        a = series.coefficients
        rem = []
        for i, t in enumerate(tau):
            kstar = min(int(t // (math.e * max(cmin, 1e-300))) + 1, len(a))
            rem.append(abs(table.values[point_index, i] - B[i, :kstar] @ a[:kstar]))
        rem = np.asarray(rem)
        ok = rem > 0
        if ok.sum() >= 3:
            rem_slope = float(np.polyfit(tau[ok], np.log(rem[ok]), 1)[0])
    return ClasReport(cmin, bool(cmin <= C * (1 + 1e-12) and not gev), slope, bool(gev), rem_slope)


def homogeneity_check(table: SymbolTable, n_terms: int = 4, *, fit_terms: int = 12,
                      point_index: int = 0, rcond: float = 1e-13) -> np.ndarray:
    """Relative mismatch of c_1..c_{n_terms} fitted on [t0, t1] and on [2 t0, 2 t1].

    The table must span at least [t0, 2 t1] with t1 >= 10 t0 and so that both
    windows hold enough rungs. The homogeneous term of degree -k read off at
    2t must equal 2**-k times its value at t, which is the same as the
    two windows agreeing on c_k.
    """
    tau = table.frequencies
    t0 = tau.min()
    t1 = tau.max() / 2
    if t1 < 10 * t0 * (1 - 1e-12):
        raise ValueError("table too short: need tau_max >= 20 tau_min")
    sub = replace(table, boundary_points=table.boundary_points[point_index:point_index + 1],
                  values=table.values[point_index:point_index + 1])
    lo = extract_coefficients(sub.subset(t0, t1), fit_terms, rcond=rcond)[0].coefficients[:n_terms]
    hi = extract_coefficients(sub.subset(2 * t0, 2 * t1), fit_terms, rcond=rcond)[0].coefficients[:n_terms]
    scale = np.maximum(np.abs(lo), np.finfo(float).tiny)
    return np.abs(hi - lo) / scale
