"""Wave-packet symbol probing and asymptotic coefficient extraction."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lincalderon.forward import linearized_dn
from lincalderon.grid import exp_cos_profile, exponential_profile, make_grid, zero_profile
from lincalderon.laplace import AsymptoticSeries
from lincalderon.symbols import (AliasingError, NotAsymptoticError, ProbeParams, SymbolTable,
                                 build_symbol_table, extract_coefficients, homogeneity_check, probe_values,
                                 raw_symbol, spectral_weights, validate_clas)

N = 256


def diagonal_operator(fn, n=N):
    j = np.fft.fftfreq(n, 1.0 / n)
    return np.diag([fn(abs(x)) if x >= 1 else 0.0 for x in j])


def test_probe_is_normalized_at_center():
    p = ProbeParams()
    assert probe_values(np.array([1.3]), 1.3, 17.0, p)[0] == pytest.approx(1.0)


def test_identity_operator_has_unit_symbol():
    assert raw_symbol(np.eye(N), 0.7, 20.0) == pytest.approx(1.0, abs=1e-10)


def test_zero_operator_gives_zero_table(small_grid):
    lam = linearized_dn(None, zero_profile(), small_grid)
    table = build_symbol_table(lam, [0.0, 1.0], [2.0, 4.0, 6.0], ProbeParams(gaussian_width=2.0))
    assert not np.any(table.values)
    series = extract_coefficients(SymbolTable([0.0], np.geomspace(2, 40, 8), np.zeros((1, 8))), 3)
    assert not np.any(series[0].coefficients)


def test_single_entry_table_equals_raw_symbol(exp_lambda_dot):
    table = build_symbol_table(exp_lambda_dot, [0.4], [32.0])
    assert table.values.shape == (1, 1)
    assert table.values[0, 0] == raw_symbol(exp_lambda_dot, 0.4, 32.0)


def test_raw_symbol_is_weighted_multiplier_sum():
    # for a Fourier multiplier f, the raw symbol is sum_j w_j f(j)
    f = lambda j: 1.0 / (j + 2.0)
    A = diagonal_operator(f)
    w = spectral_weights(N, 0.3, 24.0, ProbeParams())[0]
    j = np.fft.fftfreq(N, 1.0 / N)
    ref = np.sum(w * np.array([f(abs(x)) if x >= 1 else 0.0 for x in j]))
    assert raw_symbol(A, 0.3, 24.0) == pytest.approx(ref, rel=1e-13)


def test_symbol_laplace_law(exp_lambda_dot):
    # q = e^{-y}: symbol ~ L q(2 tau) = 1/(2 tau + 1) with O(1/tau) relative deviation
    taus = np.geomspace(8, 256, 12)
    dev = np.array([abs(raw_symbol(exp_lambda_dot, 0.0, t) * (2 * t + 1) - 1) for t in taus])
    assert np.all(dev * taus < 0.1)


def test_self_convergence_under_grid_doubling():
    q = exponential_profile()
    a = linearized_dn(None, q, make_grid(256, 4.0, 100))
    b = linearized_dn(None, q, make_grid(512, 4.5, 150))
    taus = [8.0, 16.0, 32.0, 64.0]
    ta = build_symbol_table(a, [0.0, 2.0], taus).values
    tb = build_symbol_table(b, [0.0, 2.0], taus).values
    assert np.max(np.abs(ta - tb) / np.abs(tb)) < 1e-6


def test_conjugate_symmetry_for_real_potential():
    lam = linearized_dn(None, exp_cos_profile(0.7, 1.0, 1), make_grid(128, 4.0, 64))
    fr = [4.0, 8.0, 16.0]
    plus = build_symbol_table(lam, [0.0, 1.0, 2.5], fr)
    minus = build_symbol_table(lam, [0.0, 1.0, 2.5], fr, direction=-1)
    partner = plus.conjugate_partner()
    assert partner.direction == -1
    np.testing.assert_allclose(partner.values, minus.values, atol=1e-14)


def test_aliasing_rejected():
    with pytest.raises(AliasingError, match="Nyquist|alias"):
        raw_symbol(np.eye(64), 0.0, 30.0)


def test_frequency_below_one_rejected():
    with pytest.raises(ValueError, match="at least 1"):
        raw_symbol(np.eye(64), 0.0, 0.5)
    with pytest.raises(ValueError, match="direction"):
        raw_symbol(np.eye(64), 0.0, 4.0, direction=2)


def test_probe_independent_of_cutoff_radius(exp_lambda_dot):
    for tau in (8.0, 32.0, 128.0):
        a = raw_symbol(exp_lambda_dot, 0.0, tau, ProbeParams(cutoff_radius=10.0))
        b = raw_symbol(exp_lambda_dot, 0.0, tau, ProbeParams(cutoff_radius=14.0))
        assert abs(a - b) < 1e-9 * abs(a)


def test_coefficients_independent_of_gaussian_width(exp_lambda_dot):
    fits = []
    for gw in (3.0, 4.0, 6.0):
        table = build_symbol_table(exp_lambda_dot, [0.0], np.geomspace(6, 256, 64), ProbeParams(gaussian_width=gw))
        fits.append(extract_coefficients(table, 16)[0].coefficients[:3])
    np.testing.assert_allclose(fits[0], fits[2], rtol=1e-4)
    np.testing.assert_allclose(fits[1][:2], fits[2][:2], rtol=1e-6)


def test_exponential_coefficients(exp_lambda_dot):
    table = build_symbol_table(exp_lambda_dot, [0.0], np.geomspace(4, 256, 64))
    c = extract_coefficients(table, 20)[0].coefficients
    k = np.arange(1, 5)
    expected = (-1.0) ** (k - 1) * 2.0 ** -k
    for ck, ek, tol in zip(c[:4], expected, (1e-10, 1e-8, 1e-5, 1e-3)):
        assert ck == pytest.approx(ek, rel=tol)


def test_debiased_fit_recovers_multiplier_coefficients():
    # f(j) = sum c_k j^-k exactly: the de-biased basis makes the fit exact
    c_true = np.array([1.0, -0.5, 0.3, 0.2])
    A = diagonal_operator(lambda j: sum(c * j ** -(k + 1) for k, c in enumerate(c_true)))
    table = build_symbol_table(A, [0.0], np.geomspace(4, 64, 24))
    c = extract_coefficients(table, 4)[0].coefficients
    np.testing.assert_allclose(c, c_true, atol=1e-9)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 5))
def test_exact_laplace_of_monomial(m):
    # sigma = L[t^m] = m!/tau^(m+1): coefficient c_(m+1) = m!
    tau = np.geomspace(5, 500, 40)
    table = SymbolTable([0.0], tau, (math.factorial(m) / tau ** (m + 1))[None, :])
    c = extract_coefficients(table, 8)[0].coefficients
    expected = np.zeros(8)
    expected[m] = math.factorial(m)
    np.testing.assert_allclose(c, expected, atol=1e-6 * max(1, math.factorial(m)))


def test_richardson_extraction():
    tau = 4.0 * 2.0 ** np.arange(14)
    sigma = 1.0 / (tau + 1.0)  # coefficients (-1)^(k-1)
    table = SymbolTable([0.0], tau, sigma[None, :])
    c = extract_coefficients(table, 3, method="richardson")[0].coefficients
    np.testing.assert_allclose(c, [1.0, -1.0, 1.0], rtol=1e-3)
    with pytest.raises(ValueError, match="ratio 2"):
        extract_coefficients(SymbolTable([0.0], np.geomspace(4, 400, 14), sigma[None, :]), 3, method="richardson")


def test_extraction_input_checks():
    tau = np.geomspace(4, 400, 10)
    t = SymbolTable([0.0], tau, (1 / tau)[None, :])
    with pytest.raises(ValueError, match="at least 12"):
        extract_coefficients(t, 10)
    with pytest.raises(ValueError, match="decade"):
        extract_coefficients(SymbolTable([0.0], np.linspace(4, 20, 10), (1 / np.linspace(4, 20, 10))[None, :]), 3)
    with pytest.raises(ValueError, match="unknown method"):
        extract_coefficients(t, 3, method="pade")
    with pytest.raises(ValueError, match="\\+1 ray"):
        extract_coefficients(t.conjugate_partner(), 3)


def test_not_asymptotic_rejected():
    tau = np.geomspace(4, 400, 10)
    with pytest.raises(NotAsymptoticError, match="grows"):
        extract_coefficients(SymbolTable([0.0], tau, tau[None, :].astype(complex)), 3)


def test_symbol_table_validation():
    with pytest.raises(ValueError, match="increasing"):
        SymbolTable([0.0], [4.0, 2.0], [[1, 1]])
    with pytest.raises(ValueError, match="at least 1"):
        SymbolTable([0.0], [0.5, 2.0], [[1, 1]])
    with pytest.raises(ValueError, match="shape"):
        SymbolTable([0.0, 1.0], [2.0, 4.0], [[1, 1]])
    with pytest.raises(ValueError, match="finite"):
        SymbolTable([0.0], [2.0, 4.0], [[1, np.nan]])


def test_low_frequency_leak_rejected():
    table = build_symbol_table(np.eye(N), [0.0], [1.5, 3.0, 6.0])
    with pytest.raises(ValueError, match="leaks"):
        table.basis(0, 2)


def test_subset():
    tau = np.geomspace(4, 400, 10)
    t = SymbolTable([0.0], tau, (1 / tau)[None, :]).subset(10, 100)
    assert t.frequencies.min() >= 10 and t.frequencies.max() <= 100


def test_validate_clas_classes():
    k = np.arange(25)
    kk = AsymptoticSeries(np.where(k > 0, k.astype(float) ** k, 1.0))
    rep = validate_clas(kk, 1.0)
    assert rep.min_constant == pytest.approx(1.0) and rep.passes and not rep.gevrey1
    fact = AsymptoticSeries([(-1.0) ** j * math.factorial(j) for j in range(25)])
    assert validate_clas(fact, math.e).passes
    sq = AsymptoticSeries([float(math.factorial(j)) ** 2 for j in range(25)])
    rep = validate_clas(sq, 10.0)
    assert rep.gevrey1 and not rep.passes
    with pytest.raises(ValueError):
        validate_clas(kk, 0.0)


def test_remainder_decays_for_exponential(exp_lambda_dot):
    table = build_symbol_table(exp_lambda_dot, [0.0], np.geomspace(4, 256, 64))
    s = extract_coefficients(table, 20)[0]
    rep = validate_clas(s, 1.0, table)
    assert rep.passes
    assert rep.remainder_slope is not None and rep.remainder_slope < 0


def test_homogeneity(exp_lambda_dot):
    table = build_symbol_table(exp_lambda_dot, [0.0], np.geomspace(8, 256, 40))
    assert np.max(homogeneity_check(table, 4)) < 5e-2
    with pytest.raises(ValueError, match="too short"):
        homogeneity_check(table.subset(8, 64))


def test_probe_params_validation():
    with pytest.raises(ValueError, match="h must lie"):
        ProbeParams(h=2.0)
    with pytest.raises(ValueError, match="gaussian_width"):
        ProbeParams(gaussian_width=0.0)
    with pytest.raises(ValueError, match="cutoff_radius"):
        ProbeParams(cutoff_radius=1.0)
    assert ProbeParams(h=0.01).std(5.0) == pytest.approx(0.4)
    assert ProbeParams().std(16.0) == pytest.approx(1.0)
