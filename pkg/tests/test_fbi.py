"""Gaussian FBI transform, weights and the decay-rate indicator."""

import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lincalderon.fbi import (FBIWeight, SamplingError, analyticity_indicator, classify_rate, fbi,
                             fbi_log_abs, fbi_sample, fit_rate, halfspace_gap_check, weight,
                             weighted_norm_sq, write_indicator_csv)

complex_pair = st.tuples(*[st.floats(-5, 5)] * 4).map(lambda t: [t[0] + 1j * t[1], t[2] + 1j * t[3]])


def test_weight_examples():
    assert weight("phi0", [1j, 1j]) == pytest.approx(1.0)
    assert weight("phi1", [0.0, -0.5]) == pytest.approx(-0.125)
    assert weight("phi1", [0.3, 1.0 + 0.2j]) == pytest.approx(0.02)
    assert weight("phi4", [1 + 2j, 3 - 1j]) == 0.0
    assert weight("phi3", [5j, 2 + 1j]) == pytest.approx(-1.5)
    with pytest.raises(ValueError, match="unknown weight"):
        weight("phi2", [0, 0])
    with pytest.raises(ValueError, match="C\\^2"):
        weight("phi0", [0, 0, 0])


@settings(max_examples=100, deadline=None)
@given(complex_pair)
def test_weight_relations(z):
    z = np.array(z)
    assert weight("phi1", z) <= weight("phi0", z) + 1e-15
    assert weight("phi3", z) <= weight("phi1_ext", z) + 1e-15
    assert weight("phi1_ext", z) - weight("phi3", z) == pytest.approx(0.5 * z[0].imag ** 2, abs=1e-12)
    assert FBIWeight("phi1")(z) == weight("phi1", z)


def test_phi1_continuous_across_interface():
    eps = 1e-9
    z = np.array([[0.2 + 0.3j, eps + 0.7j], [0.2 + 0.3j, -eps + 0.7j]])
    a, b = weight("phi1", z)
    assert abs(a - b) < 1e-17


def test_halfspace_gap_values():
    def gap(re_n):
        z = np.array([0.1 + 0.2j, re_n + 0.4j])
        return weight("phi0", z) - weight("phi1", z)
    assert gap(-1.0) == pytest.approx(0.5)
    assert gap(-0.1) == pytest.approx(0.005)
    assert gap(0.3) == 0.0
    rep = halfspace_gap_check([[0.1j, -1.0 + 0.2j], [1.0, -0.3 - 1j], [0.0, 0.5]])
    assert rep.ok and rep.max_deviation < 1e-15
    np.testing.assert_allclose(rep.gaps, [0.5, 0.5, 0.0])
    with pytest.raises(ValueError, match="interface"):
        halfspace_gap_check([[0.0, 0.0]])


def test_fbi_of_gaussian_matches_closed_form():
    # int exp(-(z-y)^2/2h - y^2/2) dy = sqrt(2 pi h/(1+h)) exp(-z^2/(2(1+h)))
    h = 0.05
    y = np.linspace(-10, 10, 1001)
    u = np.exp(-y ** 2 / 2)
    C = 2 ** -0.5 * math.pi ** -0.75 * h ** -0.75
    for z in (0.0, 0.7 - 0.4j, -1.2 + 0.5j):
        ref = C * math.sqrt(2 * math.pi * h / (1 + h)) * np.exp(-z ** 2 / (2 * (1 + h)))
        assert fbi(u, [y], [z], h) == pytest.approx(ref, rel=1e-10)
        assert fbi_log_abs(u, [y], [z], h) == pytest.approx(math.log(abs(ref)), rel=1e-10)


def test_log_magnitude_consistent_with_transform():
    h = 0.02
    y = np.linspace(-6, 6, 801)
    u = np.exp(-y ** 2 / 2) * np.cos(y)
    for z in (0.3, -0.5 + 0.3j, 1.0 - 0.6j):
        assert fbi_log_abs(u, [y], [z], h) == pytest.approx(math.log(abs(fbi(u, [y], [z], h))), rel=1e-12)


def test_parseval_identity_in_one_dimension():
    h = 0.1
    y = np.linspace(-8, 8, 641)
    u = np.exp(-y ** 2 / 2)
    grid = np.linspace(-6, 6, 121)
    assert weighted_norm_sq(u, [y], grid, grid, h) == pytest.approx(math.sqrt(math.pi), rel=2e-2)
    with pytest.raises(ValueError, match="1-D"):
        weighted_norm_sq(np.zeros((3, 3)), [y[:3], y[:3]], grid, grid, h)


def test_zero_sample():
    y = np.linspace(-1, 1, 201)
    u = np.zeros((201, 201))
    assert fbi(u, [y, y], [0.1, 0.2j], 0.1) == 0
    assert fbi_log_abs(u, [y, y], [0.1, 0.2j], 0.1) == -math.inf
    res = analyticity_indicator(u, [y, y], [[0.0, 0.3]], [0.4, 0.2, 0.1])
    assert res[0].label == "analytic-like" and res[0].rate == -math.inf


def test_sampling_checks():
    y = np.linspace(-3, 3, 50)
    with pytest.raises(SamplingError, match="sqrt\\(h\\)/8"):
        fbi(np.ones(50), [y], [0.0], 0.01)
    with pytest.raises(ValueError, match="h must lie"):
        fbi(np.ones(50), [y], [0.0], 0.0)
    with pytest.raises(ValueError, match="axes"):
        fbi(np.ones((50, 50)), [y], [0.0, 0.0], 0.5)
    with pytest.raises(ValueError, match="increasing"):
        fbi(np.ones(50), [y[::-1]], [0.0], 0.5)


def test_fbi_sample_record():
    y = np.linspace(-4, 4, 401)
    s = fbi_sample(np.exp(-y ** 2), [y], [0.2 + 0.1j], 0.2)
    assert s.h == 0.2 and s.z == (0.2 + 0.1j,)
    assert s.log_abs == pytest.approx(math.log(abs(s.value)))


@settings(max_examples=30, deadline=None)
@given(st.floats(-2, 0), st.floats(-3, 3), st.floats(-3, 3))
def test_fit_rate_exact_on_model(rate, a, b):
    hs = np.array([0.08, 0.04, 0.02, 0.01])
    la = (rate + a * hs * np.log(hs) + b * hs) / hs
    assert fit_rate(hs, la) == pytest.approx(rate, abs=1e-9)


def test_fit_rate_checks():
    with pytest.raises(ValueError, match="three"):
        fit_rate([0.1, 0.05], [1.0, 2.0])
    with pytest.raises(ValueError, match="geometric"):
        fit_rate([0.1, 0.05, 0.01], [1.0, 2.0, 3.0])
    assert fit_rate([0.1, 0.05, 0.025], [1.0, -math.inf, 0.0]) == -math.inf


def test_classify_rate():
    assert classify_rate(-0.01, -0.5) == "analytic-like"
    assert classify_rate(-0.48, -0.5) == "boundary-cut-like"
    assert classify_rate(-0.25, -0.5) == "undetermined"
    assert classify_rate(-math.inf, -0.5) == "analytic-like"


@pytest.fixture(scope="module")
def cut_sample():
    y = np.linspace(-3, 3, 481)
    Y1, Y2 = np.meshgrid(y, y, indexing="ij")
    return y, Y1, Y2


HS = [0.04, 0.02, 0.01]


def test_indicator_separates_gaussian_and_cut(cut_sample):
    y, Y1, Y2 = cut_sample
    pts = [[0.0, -0.5], [0.2, -0.8]]
    gauss = analyticity_indicator(np.exp(-(Y1 ** 2 + Y2 ** 2) / 2), [y, y], pts, HS)
    cut = analyticity_indicator(np.where(Y2 >= 0, 1.0, 0.0), [y, y], pts, HS)
    assert [r.label for r in gauss] == ["analytic-like"] * 2
    assert [r.label for r in cut] == ["boundary-cut-like"] * 2


@pytest.mark.parametrize("re_n", [-0.5, -0.8, 0.5])
def test_rate_tends_to_phi1_at_real_points(cut_sample, re_n):
    y, Y1, Y2 = cut_sample
    u = np.where(Y2 >= 0, np.exp(-np.abs(Y2)), 0.0)
    z = [0.0, re_n]
    rate = analyticity_indicator(u, [y, y], [z], HS)[0].rate
    assert rate == pytest.approx(weight("phi1", z), abs=2e-2)


def test_indicator_csv(tmp_path, cut_sample):
    y, Y1, Y2 = cut_sample
    res = analyticity_indicator(np.where(Y2 >= 0, 1.0, 0.0), [y, y], [[0.0, -0.5]], HS)
    path = tmp_path / "ind.csv"
    write_indicator_csv(path, res)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["re_z1", "im_z1", "re_z2", "im_z2", "h_rate", "class"]
    assert rows[1][-1] == "boundary-cut-like" and float(rows[1][2]) == -0.5
