"""Discrete Green, Poisson and Dirichlet-to-Neumann operators for P = Delta - V.

All operators act on Fourier-mode coefficients in y'. Interior fields are
flattened mode-major, index ``p * n_depth + i`` for mode position ``p`` and
depth node ``i``. Transposes are taken with respect to the continuum pairings

    <f, g>_boundary = 2 pi sum_j f_j g_{-j},
    <u, v>_interior = 2 pi sum_{l, i} w_i u_{l, i} v_{-l, i},

so quadrature weights and the mode reflection j -> -j enter explicitly.

When V does not depend on y' the problem decouples mode by mode and the
Poisson operator is stored as one depth profile per mode.
"""

from __future__ import annotations

from collections import Counter

import logging
from typing import Optional

import numpy as np
from scipy import linalg

from .grid import AnalyticProfile, HalfStrip, sample_profile, zero_profile

log = logging.getLogger(__name__)

SPACES = ("boundary_modes", "interior_field")


class DirichletSpectrumCollision(RuntimeError):
    """0 is (numerically) a Dirichlet eigenvalue of the discretized operator."""

    def __init__(self, singular_value, mode=None):
        self.singular_value = singular_value
        self.mode = mode
        where = f" (mode {mode})" if mode is not None else ""
        super().__init__(
            f"Dirichlet spectrum collision: smallest singular value of the interior "
            f"block is {singular_value:.3e}{where}")


class DiscreteOperator:
    """Dense complex matrix between sampled spaces, with grid metadata.

    Operators that are diagonal in the Fourier modes may be stored compactly
    through ``mode_blocks``; ``matrix`` then materializes on first access.
    For the Poisson operator the blocks have shape (N, n_depth), for the
    Green operator (N, n_depth, n_depth).
    """

    def __init__(self, matrix=None, *, domain_space, codomain_space, grid, mode_blocks=None):
        if domain_space not in SPACES or codomain_space not in SPACES:
            raise ValueError(f"spaces must be in {SPACES}")
        if (matrix is None) == (mode_blocks is None):
            raise ValueError("give exactly one of matrix or mode_blocks")
        self.domain_space = domain_space
        self.codomain_space = codomain_space
        self.grid = grid
        self.mode_blocks = mode_blocks
        self._matrix = None if matrix is None else np.asarray(matrix, dtype=complex)
        if self._matrix is not None and self._matrix.shape != self.expected_shape:
            raise ValueError(f"matrix shape {self._matrix.shape} inconsistent with "
                             f"{codomain_space} <- {domain_space} on grid {grid.shape}")

    def _dim(self, space):
        n, nd = self.grid.shape
        return n if space == "boundary_modes" else n * nd

    @property
    def expected_shape(self):
        return (self._dim(self.codomain_space), self._dim(self.domain_space))

    @property
    def shape(self):
        return self.expected_shape

    @property
    def matrix(self) -> np.ndarray:
        if self._matrix is None:
            self._matrix = self._materialize()
        return self._matrix

    def _materialize(self):
        n, nd = self.grid.shape
        b = self.mode_blocks
        out = np.zeros(self.expected_shape, dtype=complex)
        if b.ndim == 2:  # Poisson: interior <- boundary
            for p in range(n):
                out[p * nd:(p + 1) * nd, p] = b[p]
        else:
            for p in range(n):
                out[p * nd:(p + 1) * nd, p * nd:(p + 1) * nd] = b[p]
        return out

    def apply(self, x):
        x = np.asarray(x, dtype=complex)
        if self._matrix is not None or self.mode_blocks is None:
            return self.matrix @ x
        n, nd = self.grid.shape
        b = self.mode_blocks
        if b.ndim == 2:
            return (b * x[:, None]).reshape(-1)
        return np.einsum("pij,pj->pi", b, x.reshape(n, nd)).reshape(-1)

    def __repr__(self):
        return (f"DiscreteOperator({self.codomain_space} <- {self.domain_space}, "
                f"shape={self.shape}, compact={self._matrix is None})")


# -- assembly ----------------------------------------------------------------

class _Problem:
    """Discretized Dirichlet problem for Delta - V on one grid."""

    def __init__(self, V: Optional[AnalyticProfile], g: HalfStrip, sv_tol: float = 1e-6):
        self.grid = g
        V = zero_profile() if V is None else V
        Vp = sample_profile(V, g).values
        self.V_points = Vp
        self.decoupled = np.allclose(Vp, Vp[:1], rtol=0, atol=1e-15)
        self.V_modes = np.fft.fft(Vp, axis=0) / g.n_boundary_modes
        self.sv_tol = sv_tol
        n, nd = g.shape
        self.interior = np.arange(1, nd - 1)
        self.k2 = g.modes.astype(float) ** 2

    # -- decoupled path: one (nd-2)x(nd-2) system per distinct |j|
    def _mode_matrix(self, j2):
        g = self.grid
        return g.second_derivative - j2 * np.eye(g.n_depth_points) - np.diag(self.V_points[0])

    def _check_mode(self, A_II, j):
        vmax = np.max(np.abs(self.V_points[0]))
        if j * j > vmax + 1.0:
            return  # |j|^2 dominates |V|: no collision possible
        smin = linalg.svdvals(A_II)[-1]
        if smin < self.sv_tol:
            raise DirichletSpectrumCollision(smin, mode=j)

    def _decoupled_factors(self):
        if not hasattr(self, "_lu"):
            I = self.interior
            self._lu = {}
            for j in sorted(set(np.abs(self.grid.modes).tolist())):
                A = self._mode_matrix(float(j) ** 2)
                A_II = A[np.ix_(I, I)]
                self._check_mode(A_II, j)
                self._lu[j] = (linalg.lu_factor(A_II), A[I, 0])
        return self._lu

    # -- coupled path
    def _coupled_system(self):
        if hasattr(self, "_coupled"):
            return self._coupled
        g = self.grid
        n, nd = g.shape
        size = n * nd
        A = np.zeros((size, size), dtype=complex)
        D2 = g.second_derivative
        for p in range(n):
            blk = slice(p * nd, (p + 1) * nd)
            A[blk, blk] = D2 - self.k2[p] * np.eye(nd)
        P, Q, I = np.meshgrid(np.arange(n), np.arange(n), np.arange(nd), indexing="ij")
        A[(P * nd + I).ravel(), (Q * nd + I).ravel()] -= self.V_modes[(P - Q) % n, I].ravel()
        interior = (np.arange(n)[:, None] * nd + self.interior[None, :]).ravel()
        bottom0 = np.arange(n) * nd
        A_II = A[np.ix_(interior, interior)]
        if A_II.shape[0] <= 4000:
            smin = linalg.svdvals(A_II)[-1]
            if smin < self.sv_tol:
                raise DirichletSpectrumCollision(smin)
        lu = linalg.lu_factor(A_II)
        self._coupled = (A, interior, bottom0, lu)
        return self._coupled

    def poisson(self) -> DiscreteOperator:
        g = self.grid
        n, nd = g.shape
        I = self.interior
        if self.decoupled:
            lu = self._decoupled_factors()
            cols = {}
            for j, (fac, a_i0) in lu.items():
                u = np.zeros(nd, dtype=complex)
                u[0] = 1.0
                u[I] = -linalg.lu_solve(fac, a_i0)
                cols[j] = u
            blocks = np.array([cols[abs(int(j))] for j in g.modes])
            return DiscreteOperator(domain_space="boundary_modes", codomain_space="interior_field",
                                    grid=g, mode_blocks=blocks)
        A, interior, bottom0, lu = self._coupled_system()
        K = np.zeros((n * nd, n), dtype=complex)
        K[bottom0, np.arange(n)] = 1.0
        K[interior] = -linalg.lu_solve(lu, A[np.ix_(interior, bottom0)])
        return DiscreteOperator(K, domain_space="boundary_modes", codomain_space="interior_field", grid=g)

    def green(self) -> DiscreteOperator:
        g = self.grid
        n, nd = g.shape
        I = self.interior
        if self.decoupled:
            lu = self._decoupled_factors()
            inv = {}
            for j, (fac, _) in lu.items():
                Gj = np.zeros((nd, nd), dtype=complex)
                Gj[np.ix_(I, I)] = linalg.lu_solve(fac, np.eye(len(I)))
                inv[j] = Gj
            blocks = np.array([inv[abs(int(j))] for j in g.modes])
            return DiscreteOperator(domain_space="interior_field", codomain_space="interior_field",
                                    grid=g, mode_blocks=blocks)
        A, interior, bottom0, lu = self._coupled_system()
        G = np.zeros((n * nd, n * nd), dtype=complex)
        G[np.ix_(interior, interior)] = linalg.lu_solve(lu, np.eye(len(interior)))
        return DiscreteOperator(G, domain_space="interior_field", codomain_space="interior_field", grid=g)

    def flux(self, U: np.ndarray) -> np.ndarray:
        """Outward normal derivative -d/dy_n at y_n = 0 of grid solutions.

        ``U`` has shape (N, nd, m): m mode-space solutions. Returns (N, m).
        """
        g = self.grid
        d1, d2 = g.flux_rows
        w0 = g.weights[0]
        u0 = U[:, 0, :]
        Vu0 = _circulant_apply(self.V_modes[:, 0], u0)
        residual = np.einsum("i,pim->pm", d2, U) - self.k2[:, None] * u0 - Vu0
        return -np.einsum("i,pim->pm", d1, U) - w0 * residual


def _circulant_apply(c, x):
    """(C x)_p = sum_q c[(p - q) mod N] x_q, along axis 0."""
    n = len(c)
    if not np.any(c):
        return np.zeros_like(x, dtype=complex)
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    return c[idx] @ x


def _poisson_field(K: DiscreteOperator) -> np.ndarray:
    """Poisson operator as an array (N, nd, N_boundary)."""
    n, nd = K.grid.shape
    if K.mode_blocks is not None and K._matrix is None:
        out = np.zeros((n, nd, n), dtype=complex)
        out[np.arange(n), :, np.arange(n)] = K.mode_blocks
        return out
    return K.matrix.reshape(n, nd, n)


# -- public operations ---------------------------------------------------------

def green_poisson(V: Optional[AnalyticProfile], g: HalfStrip, *, sv_tol: float = 1e-6):
    """Green and Poisson operators of (Delta - V, restriction to y_n = 0).

    For boundary data f and interior source w, ``u = K f + G w`` solves the
    discrete equation at interior nodes with u = f at y_n = 0 and u = 0 at
    y_n = L. Source values on the boundary rows are ignored by G.

    Raises:
        DirichletSpectrumCollision: the interior block is numerically singular.
    """
    prob = _Problem(V, g, sv_tol)
    return prob.green(), prob.poisson()


def poisson_operator(V, g, *, sv_tol=1e-6) -> DiscreteOperator:
    return _Problem(V, g, sv_tol).poisson()


def dn_map(V, g, *, sv_tol=1e-6) -> DiscreteOperator:
    """Dirichlet-to-Neumann operator on boundary modes, with d_nu = -d/dy_n."""
    prob = _Problem(V, g, sv_tol)
    K = prob.poisson()
    if K.mode_blocks is not None:
        n = g.n_boundary_modes
        U = K.mode_blocks[:, :, None]
        diag = prob.flux(U)[:, 0]
        return DiscreteOperator(np.diag(diag), domain_space="boundary_modes",
                                codomain_space="boundary_modes", grid=g)
    lam = prob.flux(_poisson_field(K))
    return DiscreteOperator(lam, domain_space="boundary_modes", codomain_space="boundary_modes", grid=g)


def transpose_poisson(K: DiscreteOperator) -> np.ndarray:
    """K^t with respect to the continuum pairings, shape (N, N * nd)."""
    g = K.grid
    n, nd = g.shape
    R = g.reflection
    F = _poisson_field(K)  # [l, i, j]
    # K^t[j, (l, i)] = w_i K[(-l, i), -j]
    Kt = np.transpose(F[R][:, :, R], (2, 0, 1)) * g.weights[None, None, :]
    return Kt.reshape(n, n * nd)


def greens_identity_check(V, g, *, sv_tol=1e-6) -> float:
    """Relative residual of gamma d_nu G = K^t on interior sources.

    Returns ``||gamma d_nu G - K^t|| / ||K^t||`` (Frobenius), with the
    transpose taken in the weighted pairings.
    """
    prob = _Problem(V, g, sv_tol)
    n, nd = g.shape
    I = prob.interior
    if prob.decoupled:
        # mode-diagonal: K^t[j, (j, i)] = w_i kappa_j[i]; one solve per distinct |j|
        d1, d2 = g.flux_rows
        row = d1[I] + g.weights[0] * d2[I]  # boundary rows of G vanish
        K = prob.poisson()
        counts = Counter(abs(int(j)) for j in g.modes)
        num = den = 0.0
        for j, (fac, _) in prob._decoupled_factors().items():
            dG = -linalg.lu_solve(fac, row, trans=1)  # row @ inv(A_II)
            p = int(np.flatnonzero(np.abs(g.modes) == j)[0])
            kt = K.mode_blocks[p, I] * g.weights[I]
            num += counts[j] * np.linalg.norm(dG - kt) ** 2
            den += counts[j] * np.linalg.norm(kt) ** 2
        return float(np.sqrt(num / den))
    G = prob.green()
    K = prob.poisson()
    interior_cols = (np.arange(n)[:, None] * nd + prob.interior[None, :]).ravel()
    Kt = transpose_poisson(K)[:, interior_cols]
    GF = G.matrix.reshape(n, nd, n * nd)[:, :, interior_cols]
    dG = prob.flux(GF)
    return float(np.linalg.norm(dG - Kt) / np.linalg.norm(Kt))


def linearized_dn(V, q: AnalyticProfile, g: HalfStrip, *, K: Optional[DiscreteOperator] = None,
                  sv_tol=1e-6) -> DiscreteOperator:
    """Derivative of the DN map in the direction q: K^t (w q) K on boundary modes.

    The quadrature includes the boundary node, which makes this the exact
    derivative of :func:`dn_map` with respect to the potential.
    """
    if K is None:
        K = poisson_operator(V, g, sv_tol=sv_tol)
    n, nd = g.shape
    qm = sample_profile(q, g, space="modes").values  # (N, nd), q_hat[l, i]
    w = g.weights
    if K.mode_blocks is not None and K._matrix is None:
        kap = K.mode_blocks  # kappa[p, i], same for p and its reflection
        out = np.zeros((n, n), dtype=complex)
        rows = np.arange(n)
        for l in np.flatnonzero(np.any(qm != 0, axis=1)):
            cols = (rows - l) % n
            out[rows, cols] = np.einsum("pi,pi->p", kap * (w * qm[l])[None, :], kap[cols])
        return DiscreteOperator(out, domain_space="boundary_modes", codomain_space="boundary_modes", grid=g)
    F = _poisson_field(K)  # [m, i, j]
    qK = _mode_multiply(qm, F)
    Kt = transpose_poisson(K)
    out = Kt @ qK.reshape(n * nd, n)
    return DiscreteOperator(out, domain_space="boundary_modes", codomain_space="boundary_modes", grid=g)


def _mode_multiply(qm, F):
    """Pointwise product in y' expressed on mode coefficients: (q u)_l = sum_m q_{l-m} u_m."""
    n = qm.shape[0]
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n  # [l, m]
    C = qm[idx]  # [l, m, i]
    return np.einsum("lmi,mij->lij", C, F)


def combine_profiles(V: Optional[AnalyticProfile], q: AnalyticProfile, t: float) -> AnalyticProfile:
    """The potential V + t q."""
    V = zero_profile() if V is None else V
    return AnalyticProfile(lambda yp, yn: V(yp, yn) + t * q(yp, yn),
                           name=f"{V.name}+t*{q.name}", tangential=V.tangential or q.tangential)
