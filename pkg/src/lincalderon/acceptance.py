"""Acceptance criteria as plain functions returning pass/fail records.

Shared by ``lincalderon verify`` and the test suite.
"""

from __future__ import annotations

import functools
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import mpmath
import numpy as np

from .eikonal import (conormal_point_value, constant_metric, depth_metric, quadratic_metric,
                      residual_ratio, solve_phase_jet)
from .fbi import analyticity_indicator, halfspace_gap_check, weight
from .forward import combine_profiles, dn_map, greens_identity_check, linearized_dn
from .grid import exp_cos_profile, exponential_profile, make_grid, zero_profile
from .laplace import (AsymptoticSeries, entropy_f, gamma_tail, gamma_tail_bound, laplace,
                      optimal_gamma_tail_bound, truncated_sum)
from .recon import BasisSpec, ReconParams, build_linear_map, injectivity_report, reconstruct_q
from .symbols import build_symbol_table, homogeneity_check, raw_symbol


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        info = ", ".join(f"{k}={_fmt(v)}" for k, v in self.details.items())
        return f"[{tag}] {self.number:02d} {self.title}: {info}"


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.3g}"
    return str(v)


@functools.lru_cache(maxsize=None)
def _wide_grid():
    """Grid that resolves probe frequencies up to 256."""
    return make_grid(1024, 4.5, 200)


@functools.lru_cache(maxsize=None)
def _exp_lambda_dot():
    return linearized_dn(None, exponential_profile(1.0, 1.0), _wide_grid())


def criterion_01() -> CriterionResult:
    worst = 0.0
    for k in range(11):
        for tau in (1.0, 5.0, 25.0):
            exact = math.factorial(k) / tau ** (k + 1)
            worst = max(worst, abs(laplace(lambda t: t ** k, tau) - exact) / exact)
    return CriterionResult(1, "Laplace monomial law", worst <= 1e-10, {"worst_rel_err": worst})


def criterion_02() -> CriterionResult:
    rng = np.random.default_rng(20240601)
    theta0 = 0.8
    violations = 0
    for _ in range(200):
        a = rng.uniform(0.05, 2.0)
        tau = rng.uniform(1.0, 200.0)
        k = int(rng.integers(0, int(math.floor(theta0 * a * tau)) + 1))
        tail = gamma_tail(k, a * tau)
        if tail > optimal_gamma_tail_bound(k, a, tau) * (1 + 1e-12):
            violations += 1
        if tail > gamma_tail_bound(k, a, tau, theta0) * (1 + 1e-12):
            violations += 1
    x = np.linspace(0, 1, 1002)[1:-1]
    increasing = bool(np.all(np.diff(entropy_f(x)) > 0))
    return CriterionResult(2, "incomplete-gamma bound chain", violations == 0 and increasing,
                           {"violations": violations, "f_increasing": increasing})


def criterion_03() -> CriterionResult:
    series = AsymptoticSeries([(-1) ** k * math.factorial(k) for k in range(40)])
    taus = [int(t) for t in range(5, 61)]
    errs = []
    agree = 0.0
    with mpmath.workdps(60):
        for tau in taus:
            ref = mpmath.quad(lambda t: mpmath.exp(-t * tau) / (1 + t), [0, 0.5, 1])
            tr = truncated_sum(series, float(tau), 2.0)
            exact_sum = mpmath.fsum((-1) ** k * mpmath.factorial(k) / mpmath.mpf(tau) ** (k + 1)
                                    for k in range(tr.index + 1))
            agree = max(agree, abs(float((tr.value.real - exact_sum) / exact_sum)))
            errs.append(float(abs(ref - exact_sum)))
    slope = float(np.polyfit(taus, np.log(errs), 1)[0])
    return CriterionResult(3, "optimal truncation", slope <= -0.2 and agree < 1e-13,
                           {"log_slope": slope, "double_vs_exact_sum": agree})


def criterion_04() -> CriterionResult:
    r0 = greens_identity_check(None, make_grid(32, 4.0, 64))
    r1 = greens_identity_check(exp_cos_profile(0.3, 1.0, 1), make_grid(16, 4.0, 64))
    return CriterionResult(4, "Green identity", r0 <= 1e-8 and r1 <= 1e-5,
                           {"V0_residual": r0, "Vcos_residual": r1})


def criterion_05() -> CriterionResult:
    L = 4.0
    g = make_grid(64, L, 64)
    lam = np.diag(dn_map(None, g).matrix).real
    j = np.abs(g.modes)
    oracle = np.where(j > 0, j / np.tanh(np.where(j > 0, j, 1.0) * L), 1.0 / L)
    dn_err = float(np.max(np.abs(lam - oracle) / oracle))
    t = 1e-3
    worst = 0.0
    cases = [(None, exponential_profile(1.0, 1.0), g),
             (exp_cos_profile(0.3, 1.0, 1), exp_cos_profile(0.5, 2.0, 2), make_grid(16, L, 48))]
    for V, q, grid in cases:
        ld = linearized_dn(V, q, grid).matrix
        dq = (dn_map(combine_profiles(V, q, t), grid).matrix - dn_map(V, grid).matrix) / t
        worst = max(worst, float(np.linalg.norm(dq - ld, 2) / (t * np.linalg.norm(ld, 2))))
    return CriterionResult(5, "DN oracle and difference quotient", dn_err <= 1e-8 and worst <= 10,
                           {"dn_rel_err": dn_err, "dq_err_over_t_norm": worst})


def criterion_06() -> CriterionResult:
    lam = _exp_lambda_dot()
    taus = np.geomspace(8, 256, 24)
    dev = np.array([abs(raw_symbol(lam, 0.0, t) * (2 * t + 1) - 1) for t in taus])
    slope = float(np.polyfit(np.log(taus), np.log(dev), 1)[0])
    C = float(np.max(dev * taus))
    return CriterionResult(6, "symbol-Laplace law", -1.3 <= slope <= -0.7,
                           {"slope": slope, "C": C})


def criterion_07() -> CriterionResult:
    table = build_symbol_table(_exp_lambda_dot(), [0.0], np.geomspace(8, 256, 40))
    rel = homogeneity_check(table, 4)
    return CriterionResult(7, "homogeneity", bool(np.max(rel) <= 5e-2),
                           {"max_rel": float(np.max(rel))})


def criterion_08() -> CriterionResult:
    pj = solve_phase_jet(constant_metric(), 1.0, 8)
    c = pj.exact_coefficients.copy()
    c[0, 0] = c[1, 0] = c[0, 1] = 0.0
    collapse = float(np.max(np.abs(c)))
    md = depth_metric(0.3)
    ratio_ok = True
    ratios = {}
    for N in (4, 6, 8):
        r = residual_ratio(md, solve_phase_jet(md, 1.0, N), 0.1)
        ratios[N] = r
        ratio_ok &= bool(r >= 2 ** (N - 1) * 0.9)
    ys = np.linspace(-0.1, 0.1, 5)
    sym = 0.0
    for m in (quadratic_metric(0.1), md):
        p, q = solve_phase_jet(m, 1.0, 8), solve_phase_jet(m, -1.0, 8)
        for yn in (0.0, 0.05, 0.1):
            sym = max(sym, float(np.max(np.abs(q(ys, yn) + np.conj(p(ys, yn))))))
    point = abs(conormal_point_value(pj) - (-1j))
    ok = collapse <= 1e-12 and ratio_ok and sym <= 1e-12 and point <= 1e-12
    return CriterionResult(8, "eikonal jet", ok,
                           {"collapse": collapse, "min_ratio_over_bound": min(ratios[N] / 2 ** (N - 1) for N in ratios),
                            "symmetry": sym, "point_err": point})


def criterion_09() -> CriterionResult:
    W = weight
    exact = [abs(W("phi0", [1j, 1j]) - 1.0), abs(W("phi1", [0.0, -0.5]) + 0.125),
             abs(W("phi1", [0.3, 1.0 + 0.2j]) - 0.02), abs(W("phi4", [1 + 2j, 3 - 1j]))]
    rng = np.random.default_rng(7)
    zs = rng.normal(size=(200, 2)) + 1j * rng.normal(size=(200, 2))
    exact.append(float(np.max(np.abs(W("phi1_ext", zs) - W("phi3", zs) - 0.5 * zs[:, 0].imag ** 2))))
    order_ok = bool(np.all(W("phi1", zs) <= W("phi0", zs)) and np.all(W("phi3", zs) <= W("phi1_ext", zs)))
    weights_err = float(max(exact))
    neg = zs.copy()
    neg[:, 1] = -np.abs(neg[:, 1].real) - 0.05 + 1j * neg[:, 1].imag
    gap = halfspace_gap_check(neg)

    y = np.linspace(-3, 3, 1201)
    Y1, Y2 = np.meshgrid(y, y, indexing="ij")
    hs = [0.04, 0.02, 0.01]
    pts = [[0.0, 0.5], [0.0, -0.5], [0.0, -1.0], [0.3, -0.7]]
    gauss = analyticity_indicator(np.exp(-(Y1 ** 2 + Y2 ** 2) / 2), [y, y], pts, hs)
    cut = analyticity_indicator(np.where(Y2 >= 0, 1.0, 0.0), [y, y], pts, hs)
    g_min = min(r.rate for r in gauss)
    cut_ext = [r for r in cut if r.z[1].real < 0]
    cut_ok = all(r.rate <= r.phi3 / 2 < 0 for r in cut_ext)
    ok = weights_err <= 1e-15 and order_ok and gap.ok and g_min >= -1e-2 and cut_ok
    return CriterionResult(9, "FBI weights and indicator", ok,
                           {"weights_err": weights_err, "gap_dev": gap.max_deviation,
                            "gauss_min_rate": g_min,
                            "cut_rate_over_phi3": min(r.rate / r.phi3 for r in cut_ext)})


def criterion_10() -> CriterionResult:
    g = _wide_grid()
    yy = np.linspace(0, 0.3, 301)
    rec = reconstruct_q(_exp_lambda_dot(), [0.0], ReconParams())
    err = float(np.max(np.abs(rec.evaluate(yy)[0] - np.exp(-yy))))
    rec0 = reconstruct_q(linearized_dn(None, zero_profile(), g), [0.0], ReconParams())
    zero = float(np.max(np.abs(rec0.evaluate(yy))))
    return CriterionResult(10, "end-to-end reconstruction", err <= 5e-3 and zero <= 1e-9,
                           {"sup_err": err, "zero_sup": zero})


def criterion_11() -> CriterionResult:
    g = make_grid(64, 4.0, 48)
    pts = [0.0, 2 * np.pi / 3, 4 * np.pi / 3]
    fr = [4.0, 6.0, 8.0, 12.0, 16.0]
    r1 = injectivity_report(build_linear_map(None, BasisSpec(), g, pts, fr))
    r2 = injectivity_report(build_linear_map(None, BasisSpec(), g, pts, fr))
    repro = float(np.max(np.abs(r1.singular_values - r2.singular_values)) / r1.singular_values[0])
    few = injectivity_report(build_linear_map(None, BasisSpec(), g, [0.0], fr[:4]))
    ok = r1.sigma_min > 0 and not r1.rank_deficient and repro <= 1e-10 and few.rank_deficient
    return CriterionResult(11, "injectivity", ok,
                           {"sigma_min": r1.sigma_min, "reproducibility": repro,
                            "few_probes_rank_deficient": few.rank_deficient})


CRITERIA: dict[int, Callable[[], CriterionResult]] = {
    1: criterion_01, 2: criterion_02, 3: criterion_03, 4: criterion_04, 5: criterion_05,
    6: criterion_06, 7: criterion_07, 8: criterion_08, 9: criterion_09, 10: criterion_10,
    11: criterion_11,
}


def run_criterion(number: int) -> CriterionResult:
    if number not in CRITERIA:
        raise ValueError(f"no acceptance criterion {number}")
    t0 = time.perf_counter()
    try:
        res = CRITERIA[number]()
    except Exception as exc:  # a crash counts as a failure with the reason attached
        res = CriterionResult(number, CRITERIA[number].__name__, False, {"error": f"{type(exc).__name__}: {exc}"})
    res.seconds = time.perf_counter() - t0
    return res


def run_all(numbers=None) -> list[CriterionResult]:
    return [run_criterion(n) for n in (numbers or sorted(CRITERIA))]
