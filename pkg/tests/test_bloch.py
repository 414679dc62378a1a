import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import lorentzian_cell
from nmbloch import pauli
from nmbloch.bloch import (build_generator, generator_from_master_equation, integrate_bloch,
                           markov_solution, markov_summary, secular_solution, steady_state)
from nmbloch.dressed import SystemParams, dressed_basis
from nmbloch.exceptions import NMBlochError
from nmbloch.rates import RateFunction, RateSample


def rand_case(rng):
    params = SystemParams(1.0, rng.uniform(0.2, 2.0), rng.uniform(1e-3, 2.0))
    return dressed_basis(params), RateSample(0.0, rng.normal(size=3), rng.normal(size=3))


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=3, max_size=3))
def test_density_round_trip(r):
    r = np.array(r)
    rho = pauli.density_matrix(r)
    assert np.trace(rho).real == pytest.approx(1.0, abs=1e-15)
    np.testing.assert_allclose(pauli.bloch_vector(rho), r, atol=1e-14)


def test_zero_rates_pure_rotation():
    b = dressed_basis(SystemParams(1.0, 0.7, 0.4))
    z = RateSample(0.0, np.zeros(3), np.zeros(3))
    for gen in (build_generator(b, z), generator_from_master_equation(b, z)):
        m, d = gen.total()
        np.testing.assert_allclose(m, [[0, -b.omega, 0], [b.omega, 0, 0], [0, 0, 0]], atol=1e-15)
        np.testing.assert_allclose(d, 0.0, atol=1e-15)


def test_resonant_equal_rates():
    b = dressed_basis(SystemParams(1.0, 1.0, 0.3))
    g = 0.8
    gen = build_generator(b, RateSample(0.0, np.full(3, g), np.zeros(3)))
    assert gen.d_sec[0, 0] == pytest.approx(-3 * g / 4)
    assert gen.d_sec[1, 1] == pytest.approx(-3 * g / 4)
    assert gen.d_sec[2, 2] == pytest.approx(-g / 2)
    assert gen.drift_sec[2] == pytest.approx(0.0, abs=1e-16)


def test_secular_structure():
    rng = np.random.default_rng(11)
    for _ in range(50):
        b, s = rand_case(rng)
        gen = build_generator(b, s)
        d = gen.d_sec
        assert d[0, 2] == d[2, 0] == d[1, 2] == d[2, 1] == 0
        assert d[0, 0] == d[1, 1] and d[0, 1] == -b.omega and d[1, 0] == b.omega
        gm, _, gp = s.gamma
        np.testing.assert_allclose(gen.drift_sec, [0, 0, b.c_minus ** 2 * gm - b.c_plus ** 2 * gp])
        sec = build_generator(b, s, secular_only=True)
        assert np.all(sec.d_nonsec == 0) and np.all(sec.drift_nonsec == 0)


def test_generator_matches_operator_algebra():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(1000):
        b, s = rand_case(rng)
        a, o = build_generator(b, s), generator_from_master_equation(b, s)
        for x, y in ((a.d_sec, o.d_sec), (a.d_nonsec, o.d_nonsec),
                     (a.drift_sec, o.drift_sec), (a.drift_nonsec, o.drift_nonsec)):
            worst = max(worst, float(np.max(np.abs(x - y))))
    assert worst < 1e-12


def test_flipped_lamb_signs_disagree_with_operator_algebra():
    # guards the sign of every Lamb term in the nonsecular block
    rng = np.random.default_rng(5)
    b, s = rand_case(rng)
    flipped = build_generator(b, RateSample(0.0, s.gamma, -s.lamb)).d_nonsec
    assert np.max(np.abs(flipped - generator_from_master_equation(b, s).d_nonsec)) > 1e-3


def test_equal_rates_reduce_to_bare_emission():
    # with one common rate and no Lamb terms the dissipator is that of the bare sigma_minus
    b = dressed_basis(SystemParams(1.0, 0.6, 0.5))
    g = 0.37
    gen = build_generator(b, RateSample(0.0, np.full(3, g), np.zeros(3)))
    a = b.c_plus * pauli.SM + b.c_minus * pauli.SP + b.c_zero * pauli.SZ
    ref = pauli.transfer_matrix(pauli.lindblad(a, g))
    m, d = gen.total()
    rot = np.array([[0, -b.omega, 0], [b.omega, 0, 0], [0, 0, 0]])
    np.testing.assert_allclose(m - rot, ref[1:, 1:], atol=1e-14)
    np.testing.assert_allclose(d, ref[1:, 0], atol=1e-14)


def test_free_precession():
    model, basis, params = lorentzian_cell(1.0, 0.0, alpha_sq=1e-300)
    fn = RateFunction(model, basis, params)
    grid = np.linspace(0, 3000, 301)
    traj = integrate_bloch(fn, [1, 0, 0], grid)
    w = basis.omega
    np.testing.assert_allclose(traj.states, np.column_stack([np.cos(w * grid), np.sin(w * grid),
                                                             0 * grid]), atol=1e-8)


def lambda_closed_form(model, basis, params, t):
    """Lambda(t) for Delta = 0, s = 0: both relaxation channels sit at q = -+p."""
    lam = model.width
    q = basis.omega / lam
    T = lam * t
    A = model.alpha_sq / (2 * (1 + q * q))
    damped = (1 - q * q + np.exp(-T) * (2 * q * np.sin(q * T) + (q * q - 1) * np.cos(q * T))) / (1 + q * q)
    return 0.5 * A / lam * (T - damped)


@pytest.mark.parametrize("p", [0.3, 5.0])
def test_resonant_symmetric_relaxation(p):
    model, basis, params = lorentzian_cell(p, 0.0, alpha_sq=0.01)
    fn = RateFunction(model, basis, params)
    grid = np.linspace(0, 50 / model.width, 201)
    lam_ref = lambda_closed_form(model, basis, params, grid)
    traj = integrate_bloch(fn, [0, 0, 1], grid, secular_only=True)
    np.testing.assert_allclose(traj.Lambda, lam_ref, rtol=1e-7, atol=1e-12)
    np.testing.assert_allclose(traj.states[:, 2], np.exp(-lam_ref), rtol=1e-7)
    sol = secular_solution(grid, fn, [0, 0, 1])
    np.testing.assert_allclose(sol.states[:, 2], np.exp(-lam_ref), rtol=1e-9)


def test_secular_solution_initial_value():
    model, basis, params = lorentzian_cell(1.0, 1.0)
    fn = RateFunction(model, basis, params)
    sol = secular_solution(np.linspace(0, 10, 5), fn, [0.3, -0.4, 0.5])
    np.testing.assert_allclose(sol.states[0], [0.3, -0.4, 0.5])


def test_settled_tail_matches_plain_ode():
    model, basis, params = lorentzian_cell(0.01, 10.0)
    fn = RateFunction(model, basis, params)
    grid = np.linspace(0, 200 / model.width, 401)
    fast = integrate_bloch(fn, [0.2, 0.1, 0.9], grid)
    fn.settle_time = None
    slow = integrate_bloch(fn, [0.2, 0.1, 0.9], grid)
    np.testing.assert_allclose(fast.states, slow.states, atol=1e-8)
    np.testing.assert_allclose(fast.Gamma, slow.Gamma, rtol=1e-8)


def test_secular_consistency_at_large_p():
    model, basis, params = lorentzian_cell(100.0, 0.1, alpha_sq=1e-6)
    fn = RateFunction(model, basis, params)
    grid = np.linspace(0, 30 / model.width, 301)
    full = integrate_bloch(fn, [0.5, 0.0, 0.5], grid)
    sec = secular_solution(grid, fn, [0.5, 0.0, 0.5])
    assert np.max(np.abs(full.states - sec.states)) <= 0.02


def test_stiff_guard_runs():
    model, basis, params = lorentzian_cell(1e4, 0.1, alpha_sq=1e-6)
    fn = RateFunction(model, basis, params)
    grid = np.linspace(0, 0.05 / model.width, 11)
    traj = integrate_bloch(fn, [1, 0, 0], grid, secular_only=True)
    assert np.linalg.norm(traj.states, axis=1).max() <= 1 + 1e-9


def test_markov_solution_examples():
    model, basis, params = lorentzian_cell(1.0, 0.0)
    fn = RateFunction(model, basis, params)
    ms = markov_summary(basis, fn.markov_gamma)
    assert ms.z_inf == pytest.approx(0.0, abs=1e-15)  # gamma_+ = gamma_- and C+^2 = C-^2
    assert 2 * ms.tau_R >= ms.tau_D
    far = markov_solution(1e6 * ms.tau_R, ms, basis, [0.6, 0, 0.8])
    np.testing.assert_allclose(far, [0, 0, ms.z_inf], atol=1e-12)
    r = markov_solution(ms.tau_D, ms, basis, [0.6, 0, 0])
    assert math.hypot(r[0], r[1]) == pytest.approx(0.6 / math.e)


def test_markov_no_relaxation_channel():
    b = dressed_basis(SystemParams(1.0, 1.0, 0.1))
    ms = markov_summary(b, np.array([0.0, 1.0, 0.0]))
    assert math.isnan(ms.z_inf) and math.isinf(ms.tau_R)
    with pytest.raises(NMBlochError):
        markov_solution(1.0, ms, b, [0, 0, 1])


def test_steady_state_secular_is_z_inf():
    model, basis, params = lorentzian_cell(2.0, 1.0)
    fn = RateFunction(model, basis, params)
    ms = markov_summary(basis, fn.markov_gamma)
    np.testing.assert_allclose(steady_state(fn, secular_only=True), [0, 0, ms.z_inf], atol=1e-14)


def test_lamb_shift_renormalises_frequency():
    model, basis, params = lorentzian_cell(1.0, 1.0)
    fn = RateFunction(model, basis, params)
    s = fn.sample(50.0)
    off = build_generator(basis, s)
    on = build_generator(basis, s, lamb_shift=True)
    shift = s.lamb[2] * basis.c_plus ** 2 - s.lamb[0] * basis.c_minus ** 2
    assert on.d_sec[1, 0] - off.d_sec[1, 0] == pytest.approx(shift)
    np.testing.assert_array_equal(on.d_nonsec, off.d_nonsec)


def test_bad_initial_state():
    model, basis, params = lorentzian_cell(1.0, 1.0)
    with pytest.raises(ValueError):
        integrate_bloch(RateFunction(model, basis, params), [0, 1], np.linspace(0, 1, 3))
