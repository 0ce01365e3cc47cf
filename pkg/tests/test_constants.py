import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from hartree.constants import (
    SystemParams,
    admissibility,
    bubble_amplitude,
    classification_amplitudes,
    constants_report,
    coupling,
    coupling_profile,
    energy_levels,
    greens_constant,
    hls_constant,
    riesz_identity_constant,
    sobolev_constants,
    sphere_area,
)
from hartree.errors import DimensionError, DomainError, ParameterError

mp.mp.dps = 40


def mp_hls(N, mu):
    N, mu = mp.mpf(N), mp.mpf(mu)
    return mp.pi ** (mu / 2) * mp.gamma(N / 2 - mu / 2) / mp.gamma(N - mu / 2) * (
        mp.gamma(N / 2) / mp.gamma(N)
    ) ** (-1 + mu / N)


def mp_identity(N, s):
    return mp.pi ** (mp.mpf(N) / 2) * mp.gamma((N - 2 * mp.mpf(s)) / 2) / mp.gamma(N - mp.mpf(s))


def mp_sobolev(N):
    # sharp Sobolev constant, a closed form independent of the quadrature
    return mp.pi * N * (N - 2) * (mp.gamma(mp.mpf(N) / 2) / mp.gamma(N)) ** (mp.mpf(2) / N)


@pytest.mark.parametrize("N", [5, 6, 7, 8, 10])
@pytest.mark.parametrize("mu", [1.0, 2.5, 4.0])
def test_hls_matches_arbitrary_precision(N, mu):
    assert_allclose(hls_constant(N, mu), float(mp_hls(N, mu)), rtol=1e-12)


def test_hls_closed_forms():
    assert_allclose(hls_constant(6, 4), math.pi**2 * 60 ** (1 / 3) / 6, rtol=1e-14)
    assert_allclose(hls_constant(8, 4), math.pi**2 * math.sqrt(840) / 120, rtol=1e-14)
    assert_allclose(hls_constant(5, 4), 15.60, rtol=1e-3)


@pytest.mark.parametrize("mu", [0.0, -1.0, 6.0, 7.5])
def test_hls_rejects_exponent(mu):
    with pytest.raises(DomainError):
        hls_constant(6, mu)


@pytest.mark.parametrize("N", [5, 6, 8, 9])
def test_identity_constant_matches_arbitrary_precision(N):
    for s in (1.0, 2.0, (N - 2) / 2):
        assert_allclose(riesz_identity_constant(N, s), float(mp_identity(N, s)), rtol=1e-12)


def test_identity_constant_values():
    assert_allclose(riesz_identity_constant(6, 2), math.pi**3 / 6, rtol=1e-14)
    assert_allclose(riesz_identity_constant(5, 2), math.pi**3 / 2, rtol=1e-14)
    assert_allclose(riesz_identity_constant(8, 2), math.pi**4 / 120, rtol=1e-14)
    with pytest.raises(DomainError):
        riesz_identity_constant(6, 3.0)


@pytest.mark.parametrize("N", [5, 6, 7, 8])
def test_greens_constant_is_newton_normalisation(N):
    assert_allclose(greens_constant(N), 1.0 / ((N - 2) * sphere_area(N)), rtol=1e-14)
    ref = mp.gamma(mp.mpf(N - 2) / 2) / (4 * mp.pi ** (mp.mpf(N) / 2))
    assert_allclose(greens_constant(N), float(ref), rtol=1e-12)


def test_greens_constant_values():
    assert_allclose(greens_constant(6), 1 / (4 * math.pi**3), rtol=1e-14)
    assert_allclose(greens_constant(5), 1 / (8 * math.pi**2), rtol=1e-14)


@pytest.mark.parametrize("N", [5, 6, 7, 8])
def test_sobolev_quadrature_matches_closed_form(N):
    sob = sobolev_constants(N)
    assert_allclose(sob.S, float(mp_sobolev(N)), rtol=1e-11)
    assert_allclose(sob.S_HL * math.sqrt(hls_constant(N, 4)), sob.S, rtol=1e-14)


def test_sobolev_dimension_six():
    sob = sobolev_constants(6)
    assert_allclose(sob.S * hls_constant(6, 4), 4 * math.pi**3, rtol=1e-12)
    assert abs(sob.S_HL**2 - 57.6) < 1e-6
    assert_allclose(sobolev_constants(5).S_HL, 3.75, rtol=1e-3)


@pytest.mark.parametrize("N", [3, 4, 4.5])
def test_dimension_gate(N):
    with pytest.raises(DimensionError):
        sobolev_constants(N)
    with pytest.raises(ParameterError):
        SystemParams(N, 1.0, 1.0, 2.0)


@pytest.mark.parametrize(
    "a1,a2,b", [(1.0, 1.0, 1.0), (1.0, 2.0, 1.5), (0.0, 1.0, 2.0), (-1.0, 1.0, 2.0), (1.0, 1.0, math.nan)]
)
def test_params_regime(a1, a2, b):
    with pytest.raises(ParameterError):
        SystemParams(6, a1, a2, b)


def test_coupling_examples(sym_params, asym_params):
    cp = coupling(sym_params)
    assert_allclose([cp.k0, cp.l0, cp.fmin, cp.tstar], [1 / 3, 1 / 3, 2 / 3, 1.0], rtol=1e-12)
    cp = coupling(asym_params)
    assert_allclose([cp.k0, cp.l0, cp.fmin], [0.2, 0.4, 0.6], rtol=1e-12)


@settings(max_examples=60, deadline=None)
@given(
    a1=st.floats(0.05, 5.0),
    a2=st.floats(0.05, 5.0),
    gap=st.floats(0.01, 5.0),
)
def test_coupling_minimum_property(a1, a2, gap):
    params = SystemParams(6, a1, a2, max(a1, a2) + gap)
    cp = coupling(params)
    assert_allclose(cp.fmin, cp.k0 + cp.l0, rtol=1e-12)
    assert_allclose(coupling_profile(params, cp.tstar), cp.fmin, rtol=1e-10)
    ts = np.geomspace(1e-3, 1e3, 200)
    assert np.all(coupling_profile(params, ts) >= cp.fmin * (1 - 1e-12))
    lv = energy_levels(params)
    assert lv.c_infty < min(lv.c1_infty, lv.c2_infty)


def test_energy_levels(sym_params, asym_params):
    lv = energy_levels(sym_params)
    assert_allclose([lv.c_infty, lv.c1_infty, lv.c2_infty], [9.6, 14.4, 14.4], rtol=1e-12)
    assert_allclose(lv.window, (9.6, 14.4), rtol=1e-12)
    lv = energy_levels(asym_params)
    assert_allclose([lv.c_infty, lv.c1_infty, lv.c2_infty], [8.64, 14.4, 9.6], rtol=1e-12)
    assert_allclose(lv.window, (8.64, 9.6), rtol=1e-12)


def test_admissibility(sym_params):
    assert not admissibility(sym_params, 0.0, 0.0).admissible
    res = admissibility(sym_params, 1.0, 1.0)
    assert res.admissible
    assert_allclose([res.lhs, res.rhs], [0.3941, 1.7057], atol=1e-4)
    res = admissibility(sym_params, 5.0, 5.0)
    assert not res.admissible
    assert_allclose(res.lhs, 1.9704, atol=1e-4)
    with pytest.raises(DomainError):
        admissibility(sym_params, -1.0, 0.0)


@pytest.mark.parametrize("a2", [1.0, 1.5])
def test_classification_amplitudes_match_bubble(a2):
    params = SystemParams(6, 1.0, a2, 2.0)
    C1, C2 = classification_amplitudes(params)
    cp = coupling(params)
    C_N = bubble_amplitude(6)
    assert abs(math.sqrt(cp.k0) * C_N - C1) / C1 <= 1e-8
    assert abs(math.sqrt(cp.l0) * C_N - C2) / C2 <= 1e-8


def test_bubble_amplitude_six():
    # C_N^2 I(2) = 24 in dimension six
    assert_allclose(bubble_amplitude(6) ** 2 * riesz_identity_constant(6, 2), 24.0, rtol=1e-12)


def test_report_round_trip(sym_params):
    rep = constants_report(sym_params).to_dict()
    assert_allclose(rep["s_hl_squared"], 57.6, atol=1e-6)
    assert_allclose(rep["c_infty"], 9.6, rtol=1e-12)
    assert set(rep["formulas"]) >= {"C_Nmu", "I_s", "R_N", "S_HL", "c_infty"}
