"""Linear probe map, injectivity diagnostics and near-boundary reconstruction."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .forward import DiscreteOperator, linearized_dn, poisson_operator
from .grid import AnalyticProfile, HalfStrip, basis_profile, sample_profile
from .laplace import AsymptoticSeries, BorelSum, borel_resum, laplace_taylor_coefficients
from .symbols import ProbeParams, build_symbol_table, extract_coefficients, validate_clas


class ClasGateError(ValueError):
    """Symbol data fail the analytic-class test required before resummation."""


@dataclass(frozen=True)
class BasisSpec:
    """Basis q_jm = exp(i j y') y_n**m exp(-rate y_n)."""

    tangential_modes: tuple = (0, 1, 2)
    depth_monomials: tuple = (0, 1, 2)
    envelope_rate: float = 1.0

    def __post_init__(self):
        if not self.tangential_modes or not self.depth_monomials:
            raise ValueError("basis needs at least one tangential mode and one depth monomial")
        if any(m < 0 for m in self.depth_monomials):
            raise ValueError("depth monomials must be non-negative")
        if not self.envelope_rate > 0:
            raise ValueError("envelope rate must be positive")

    @property
    def labels(self) -> list[tuple[int, int]]:
        return [(j, m) for j in self.tangential_modes for m in self.depth_monomials]

    def profiles(self) -> list[AnalyticProfile]:
        return [basis_profile(j, m, self.envelope_rate) for j, m in self.labels]

    def gram_rank(self, g: HalfStrip, tol: float = 1e-10) -> int:
        """Numerical rank of the weighted Gram matrix on the grid."""
        w = np.tile(g.weights, g.n_boundary_modes) * (2 * np.pi / g.n_boundary_modes)
        S = np.stack([sample_profile(p, g).values.ravel() for p in self.profiles()], axis=1)
        gram = S.conj().T @ (w[:, None] * S)
        ev = np.linalg.eigvalsh(gram)
        return int(np.sum(ev > tol * ev.max()))

    def __len__(self):
        return len(self.tangential_modes) * len(self.depth_monomials)


@dataclass(frozen=True, eq=False)
class LinearMap:
    """Matrix whose column b holds the vectorized symbol table of basis element b."""

    matrix: np.ndarray
    basis: BasisSpec
    boundary_points: np.ndarray
    frequencies: np.ndarray
    probe: ProbeParams

    @property
    def n_probes(self) -> int:
        return self.matrix.shape[0]


def build_linear_map(V, basis: BasisSpec, g: HalfStrip, boundary_points: Sequence[float],
                     frequencies: Sequence[float], probe: Optional[ProbeParams] = None,
                     *, check_linearity: bool = True) -> LinearMap:
    """Symbol samples of the linearized DN map for each basis element.

    Raises:
        RuntimeError: solver failure, with the offending basis element attached.
    """
    probe = probe or ProbeParams()
    K = poisson_operator(V, g)
    cols = []

    def column(q):
        lam = linearized_dn(V, q, g, K=K)
        return build_symbol_table(lam, boundary_points, frequencies, probe).values.ravel()

    for (j, m), q in zip(basis.labels, basis.profiles()):
        try:
            cols.append(column(q))
        except Exception as exc:
            raise type(exc)(f"basis element (j={j}, m={m}): {exc}") from exc
    M = np.stack(cols, axis=1)
    if check_linearity and len(cols) >= 2:
        p = basis.profiles()
        s = AnalyticProfile(lambda yp, yn: p[0](yp, yn) + p[1](yp, yn), name="sum",
                            tangential=p[0].tangential or p[1].tangential)
        diff = np.linalg.norm(column(s) - M[:, 0] - M[:, 1])
        scale = max(np.linalg.norm(M[:, 0]) + np.linalg.norm(M[:, 1]), np.finfo(float).tiny)
        if diff > 1e-10 * scale:
            raise RuntimeError(f"probe map failed the linearity spot check (relative {diff / scale:.2e})")
    return LinearMap(M, basis, np.atleast_1d(np.asarray(boundary_points, dtype=float)),
                     np.asarray(frequencies, dtype=float), probe)


@dataclass(frozen=True)
class InjectivityReport:
    """Singular values (descending, padded with zeros up to the column count)."""

    singular_values: np.ndarray
    condition_number: float
    rank: int
    rank_deficient: bool
    shape: tuple
    meta: dict = field(default_factory=dict)

    @property
    def sigma_min(self) -> float:
        return float(self.singular_values[-1])

    def to_dict(self) -> dict:
        return {"singular_values": [float(s) for s in self.singular_values],
                "condition_number": self.condition_number, "rank": self.rank,
                "rank_deficient": self.rank_deficient, "shape": list(self.shape), **self.meta}


def injectivity_report(matrix, rtol: Optional[float] = None, meta: Optional[dict] = None) -> InjectivityReport:
    """SVD-based injectivity diagnostics.

    A map with fewer rows than columns cannot be injective; the missing
    singular values are reported as zeros.
    """
    M = np.asarray(matrix.matrix if isinstance(matrix, LinearMap) else matrix)
    if M.ndim != 2 or M.size == 0:
        raise ValueError("injectivity_report needs a nonempty 2-D matrix")
    s = np.linalg.svd(M, compute_uv=False)
    n_cols = M.shape[1]
    if len(s) < n_cols:
        s = np.concatenate([s, np.zeros(n_cols - len(s))])
    rtol = max(M.shape) * np.finfo(float).eps if rtol is None else rtol
    rank = int(np.sum(s > rtol * s[0])) if s[0] > 0 else 0
    cond = float(s[0] / s[-1]) if s[-1] > 0 else math.inf
    md = dict(meta or {})
    if isinstance(matrix, LinearMap):
        md.update({"basis": [list(l) for l in matrix.basis.labels],
                   "boundary_points": matrix.boundary_points.tolist(),
                   "frequencies": matrix.frequencies.tolist(), "probe": matrix.probe.to_dict()})
    return InjectivityReport(s, cond, rank, rank < n_cols, M.shape, md)


# -- reconstruction ---------------------------------------------------------------

@dataclass(frozen=True)
class ReconParams:
    """Settings of the symbol -> coefficients -> Borel pipeline."""

    tau_min: float = 4.0
    tau_max: float = 256.0
    n_frequencies: int = 64
    n_terms: int = 20
    radius: float = 0.3
    method: str = "lstsq"
    probe: ProbeParams = field(default_factory=ProbeParams)
    clas_constant: Optional[float] = None

    def __post_init__(self):
        if not 1 <= self.tau_min < self.tau_max:
            raise ValueError("need 1 <= tau_min < tau_max")
        if self.n_terms < 1 or self.n_frequencies < 3:
            raise ValueError("n_terms must be positive and n_frequencies at least 3")
        if not self.radius > 0:
            raise ValueError("radius must be positive")

    @property
    def frequencies(self) -> np.ndarray:
        if self.method == "richardson":
            n = int(math.floor(math.log2(self.tau_max / self.tau_min))) + 1
            return self.tau_min * 2.0 ** np.arange(n)
        return np.geomspace(self.tau_min, self.tau_max, self.n_frequencies)


@dataclass(frozen=True, eq=False)
class ReconstructedProfile:
    """Borel sums q~(y', .) on [0, radius] at each reconstructed boundary point."""

    boundary_points: np.ndarray
    sums: list
    symbol_series: list
    flags: tuple = ()

    @property
    def radius(self) -> float:
        return min(b.radius for b in self.sums)

    def evaluate(self, y_n) -> np.ndarray:
        """Values of shape (n_points, len(y_n)); zero outside [0, radius]."""
        y_n = np.atleast_1d(np.asarray(y_n, dtype=float))
        return np.stack([b(y_n) for b in self.sums])

    def taylor(self, k: int) -> np.ndarray:
        """q^(k)(y', 0) at each point."""
        return np.array([b.coefficients[k] if k < len(b.coefficients) else 0.0 for b in self.sums])

    def as_profile(self) -> AnalyticProfile:
        """Profile taking the nearest reconstructed point in y'."""
        pts = self.boundary_points
        sums = self.sums

        def nearest(yp):
            yp = np.asarray(yp, dtype=float)
            return np.argmin(np.abs(np.angle(np.exp(1j * (yp[..., None] - pts)))), axis=-1)

        def ev(yp, yn):
            yp, yn = np.broadcast_arrays(np.asarray(yp, dtype=float), np.asarray(yn, dtype=float))
            idx = nearest(yp)
            out = np.zeros(yp.shape, dtype=complex)
            for i, b in enumerate(sums):
                sel = idx == i
                out[sel] = b(yn[sel])
            return out

        def coeff(k):
            vals = self.taylor(k)
            return lambda yp: vals[nearest(yp)]

        n_k = min(len(b.coefficients) for b in sums)
        return AnalyticProfile(ev, boundary_taylor=[coeff(k) for k in range(n_k)],
                               support_depth=self.radius, name="reconstructed", tangential=len(pts) > 1)

    def write_csv(self, path, y_n) -> None:
        y_n = np.atleast_1d(np.asarray(y_n, dtype=float))
        vals = self.evaluate(y_n)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["y_prime", "y_n", "re_q", "im_q"])
            for i, yp in enumerate(self.boundary_points):
                for k, t in enumerate(y_n):
                    w.writerow([f"{yp:.17g}", f"{t:.17g}", f"{vals[i, k].real:.17g}", f"{vals[i, k].imag:.17g}"])


def reconstruct_q(lam: DiscreteOperator, boundary_points: Sequence[float],
                  params: Optional[ReconParams] = None, *, V=None) -> ReconstructedProfile:
    """Recover q near the boundary from the linearized DN map alone.

    Symbol samples at tau are read as L q(2 tau), so the fitted c_{k+1}
    become q^(k)(0) = c_{k+1} 2**(k+1) before Borel summation.

    Raises:
        ClasGateError: fitted coefficients show Gevrey growth beyond order 1,
            or exceed the requested class constant.
        RadiusError: radius too large for the fitted growth constant.
    """
    params = params or ReconParams()
    pts = np.atleast_1d(np.asarray(boundary_points, dtype=float))
    table = build_symbol_table(lam, pts, params.frequencies, params.probe)
    series = extract_coefficients(table, params.n_terms, method=params.method)
    flags = []
    A = lam.matrix if isinstance(lam, DiscreteOperator) else np.asarray(lam)
    if V is not None and not (isinstance(V, AnalyticProfile) and V.is_zero(lam.grid)):
        flags.append("leading-order only: nonzero background potential")
    if np.linalg.norm(A - np.diag(np.diag(A))) > 1e-12 * max(np.linalg.norm(A), np.finfo(float).tiny):
        flags.append("leading-order only: tangentially varying perturbation")
    sums = []
    for p, s in zip(pts, series):
        C_gate = params.clas_constant if params.clas_constant is not None else math.inf
        rep = validate_clas(s, C_gate if math.isfinite(C_gate) else 1e300)
        if rep.gevrey1 or (params.clas_constant is not None and not rep.passes):
            raise ClasGateError(f"y'={p:.6g}: symbol coefficients fail the analytic-class test "
                                f"(minimal C {rep.min_constant:.4g}, growth slope {rep.growth_slope:.3g})")
        qk = laplace_taylor_coefficients(s.coefficients, 2.0)
        try:
            sums.append(borel_resum(AsymptoticSeries(qk), params.radius))
        except ValueError as exc:
            raise type(exc)(f"y'={p:.6g}: {exc}") from exc
    return ReconstructedProfile(pts, sums, series, tuple(flags))
