"""Desk-scale laboratory for the linearized Calderon problem on a periodic half-strip.

Forward solver (DN map and its linearization), wave-packet symbol probing,
Laplace/Borel asymptotics, complex eikonal jets, the Gaussian FBI transform
and an end-to-end near-boundary reconstruction harness.
"""

from .eikonal import (PhaseJet, SymbolModel, boundary_normal_data, conormal_point_value,
                      psi_bounds_check, solve_phase_jet)
from .estimators import NearBoundaryReconstructor, SymbolSeriesEstimator
from .fbi import FBIWeight, analyticity_indicator, fbi, halfspace_gap_check, weight
from .forward import (DirichletSpectrumCollision, DiscreteOperator, dn_map, green_poisson,
                      greens_identity_check, linearized_dn, poisson_operator)
from .grid import AnalyticProfile, GridField, HalfStrip, make_grid, profile_from_spec, sample_profile
from .laplace import (AsymptoticSeries, BorelSum, borel_resum, fit_growth_constant, gamma_tail,
                      gamma_tail_bound, laplace, optimal_gamma_tail_bound, truncated_sum)
from .recon import (BasisSpec, InjectivityReport, ReconParams, build_linear_map, injectivity_report,
                    reconstruct_q)
from .symbols import (ProbeParams, SymbolTable, build_symbol_table, extract_coefficients, raw_symbol,
                      validate_clas)

__version__ = "0.1.0"

__all__ = [
    "AnalyticProfile", "AsymptoticSeries", "BasisSpec", "BorelSum", "DirichletSpectrumCollision",
    "DiscreteOperator", "FBIWeight", "GridField", "HalfStrip", "InjectivityReport",
    "NearBoundaryReconstructor", "PhaseJet", "ProbeParams", "ReconParams", "SymbolModel",
    "SymbolSeriesEstimator", "SymbolTable", "analyticity_indicator", "borel_resum",
    "boundary_normal_data", "build_linear_map", "build_symbol_table", "conormal_point_value",
    "dn_map", "extract_coefficients", "fbi", "fit_growth_constant", "gamma_tail", "gamma_tail_bound",
    "green_poisson", "greens_identity_check", "halfspace_gap_check", "injectivity_report", "laplace",
    "linearized_dn", "make_grid", "optimal_gamma_tail_bound", "poisson_operator", "profile_from_spec",
    "psi_bounds_check", "raw_symbol", "reconstruct_q", "sample_profile", "solve_phase_jet",
    "truncated_sum", "validate_clas", "weight",
]
