"""scikit-learn style wrappers around the extraction and reconstruction pipelines."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .forward import DiscreteOperator
from .laplace import borel_resum, AsymptoticSeries, laplace_taylor_coefficients
from .recon import ReconParams, reconstruct_q
from .symbols import ProbeParams, SymbolTable, extract_coefficients


def _complex_target(y, n):
    y = np.asarray(y, dtype=complex).ravel()
    if len(y) != n:
        raise ValueError(f"X has {n} rows but y has {len(y)} entries")
    if not np.all(np.isfinite(y)):
        raise ValueError("y contains non-finite values")
    return y


class SymbolSeriesEstimator(BaseEstimator):
    """Fit ``sigma(tau) ~ sum_{k=1}^{n_terms} c_k tau**-k`` to exact samples.

    ``X`` holds frequencies (one column), ``y`` the complex symbol values.

    Attributes:
        coef_: fitted c_1..c_K.
        growth_constant_: Gevrey-1 constant of the fitted coefficients.
    """

    def __init__(self, n_terms: int = 10, method: str = "lstsq", rcond: float = 1e-13):
        self.n_terms = n_terms
        self.method = method
        self.rcond = rcond

    def fit(self, X, y):
        X = check_array(X, ensure_min_samples=3)
        if X.shape[1] != 1:
            raise ValueError(f"X must have a single frequency column, got {X.shape[1]}")
        tau = X[:, 0]
        y = _complex_target(y, len(tau))
        order = np.argsort(tau)
        table = SymbolTable([0.0], tau[order], y[order][None, :])
        self.series_ = extract_coefficients(table, self.n_terms, method=self.method, rcond=self.rcond)[0]
        self.coef_ = self.series_.coefficients.copy()
        self.growth_constant_ = float(self.series_.growth_constant)
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X)
        if X.shape[1] != 1:
            raise ValueError(f"X must have a single frequency column, got {X.shape[1]}")
        return self.series_.partial_sum(X[:, 0], len(self.coef_))

    def borel(self, radius: float, scale: float = 2.0):
        """Borel sum of the Taylor data read off from the fitted coefficients."""
        check_is_fitted(self, "coef_")
        return borel_resum(AsymptoticSeries(laplace_taylor_coefficients(self.coef_, scale)), radius)


class NearBoundaryReconstructor(BaseEstimator):
    """Recover q near the boundary from a linearized DN map.

    ``fit`` takes the operator (a :class:`DiscreteOperator` or square mode
    matrix); ``predict`` evaluates the estimate at rows (y', y_n).
    """

    def __init__(self, boundary_points=(0.0,), tau_min: float = 4.0, tau_max: float = 256.0,
                 n_frequencies: int = 64, n_terms: int = 20, radius: float = 0.3,
                 gaussian_width: float = 4.0, cutoff_radius: float = 10.0):
        self.boundary_points = boundary_points
        self.tau_min = tau_min
        self.tau_max = tau_max
        self.n_frequencies = n_frequencies
        self.n_terms = n_terms
        self.radius = radius
        self.gaussian_width = gaussian_width
        self.cutoff_radius = cutoff_radius

    def _params(self) -> ReconParams:
        return ReconParams(self.tau_min, self.tau_max, self.n_frequencies, self.n_terms, self.radius,
                           probe=ProbeParams(None, self.gaussian_width, self.cutoff_radius))

    def fit(self, X, y=None):
        if isinstance(X, DiscreteOperator):
            if X.domain_space != "boundary_modes" or X.codomain_space != "boundary_modes":
                raise ValueError("expected an operator on boundary modes")
        else:
            X = np.asarray(X)
            if X.ndim != 2 or X.shape[0] != X.shape[1]:
                raise ValueError(f"expected a square mode matrix, got shape {X.shape}")
            if not np.all(np.isfinite(X)):
                raise ValueError("operator matrix contains non-finite values")
        self.result_ = reconstruct_q(X, list(self.boundary_points), self._params())
        self.profile_ = self.result_.as_profile()
        self.flags_ = self.result_.flags
        return self

    def predict(self, X):
        check_is_fitted(self, "profile_")
        X = check_array(X)
        if X.shape[1] != 2:
            raise ValueError(f"X must have columns (y_prime, y_n), got {X.shape[1]} columns")
        return self.profile_(X[:, 0], X[:, 1])
