import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from nmbloch.dressed import SystemParams, dressed_basis
from nmbloch.exceptions import ConfigError, ModelValidityWarning
from nmbloch.spectral import Lorentzian, Ohmic, Regime, Tabulated, classify, evaluate, regime_params


def test_lorentzian_peak():
    # quarter-normalised peak value, see the normalization test below
    assert evaluate(Lorentzian(0.3, 2.0, 5.0), 5.0) == pytest.approx(0.3 / (4 * math.pi))


def test_lorentzian_normalization():
    m = Lorentzian(0.02, 0.5, 3.0)
    val, _ = integrate.quad(m.scalar(), -math.inf, math.inf, epsabs=1e-14)
    assert val == pytest.approx(0.02 * 0.5 / 4, rel=1e-8)


def test_ohmic_values():
    m = Ohmic(0.05, 2.0)
    assert evaluate(m, 2.0) == pytest.approx(0.05 ** 2 * 2.0 * math.exp(-1))
    assert evaluate(m, 0.0) == 0.0
    assert evaluate(m, -1.0) == 0.0
    grid = np.linspace(0, 20, 20001)
    assert grid[np.argmax(evaluate(m, grid))] == pytest.approx(2.0, abs=1e-3)


def test_ohmic_strong_coupling_warns():
    with pytest.warns(ModelValidityWarning):
        Ohmic(0.2, 1.0)


def test_parameter_validation():
    with pytest.raises(ConfigError):
        Lorentzian(0.0, 1.0, 1.0)
    with pytest.raises(ConfigError):
        Lorentzian(0.1, -1.0, 1.0)
    with pytest.raises(ConfigError):
        Tabulated(np.array([0.0, 1.0, 0.5]), np.array([0, 1, 0.0]))
    with pytest.raises(ConfigError):
        Tabulated(np.array([0.0, 1.0, 2.0]), np.array([0, -1, 0.0]))


def test_scalar_matches_vector():
    rng = np.random.default_rng(3)
    w = rng.uniform(-3, 8, 50)
    tab = Tabulated(np.linspace(0, 5, 11), np.abs(np.sin(np.linspace(0, 5, 11))))
    for m in (Lorentzian(0.1, 0.4, 2.0), Ohmic(0.05, 1.5), tab):
        f = m.scalar()
        np.testing.assert_allclose([f(x) for x in w], evaluate(m, w), rtol=1e-14, atol=1e-300)


def test_regime_fig3():
    params = SystemParams(1.0, 1.0, 100.0)
    r = regime_params(Lorentzian(0.01, 1.0, 1.1), dressed_basis(params), params)
    assert (r.p, r.s, r.regime) == (pytest.approx(100.0), pytest.approx(0.1), Regime.SECULAR)


def test_regime_ohmic(recwarn):
    params = SystemParams(10.0, 10.0, 0.01)
    r = regime_params(Ohmic(0.05, 1.0), dressed_basis(params), params)
    assert (r.p, r.s) == (pytest.approx(0.01), pytest.approx(10.0))
    assert not r.warnings
    params = SystemParams(5.0, 5.0, 5.0)
    with pytest.warns(ModelValidityWarning):
        r = regime_params(Ohmic(0.05, 1.0), dressed_basis(params), params)
    assert r.warnings


def test_classify_thresholds():
    assert classify(10.0) is Regime.SECULAR
    assert classify(0.1) is Regime.NONSECULAR
    assert classify(1.0) is Regime.INTERMEDIATE


def test_tabulated_csv(tmp_path):
    path = tmp_path / "j.csv"
    path.write_text("omega,J\n0,0\n1,0.5\n2,0\n")
    m = Tabulated.from_csv(path)
    assert evaluate(m, 0.5) == pytest.approx(0.25)
    assert evaluate(m, 3.0) == 0.0
    assert m.correlation_time == pytest.approx(2.0)


@settings(max_examples=200, deadline=None)
@given(st.floats(-1e3, 1e3), st.floats(1e-3, 10), st.floats(1e-3, 10), st.floats(1e-3, 5))
def test_non_negative(w, a, width, w0):
    assert evaluate(Lorentzian(a, width, w0), w) >= 0
    assert evaluate(Ohmic(min(a, 0.1), width), w) >= 0
