import cmath
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from nmbloch.exceptions import SpecialFunctionError
from nmbloch.special import chin_shin_real, cin_sin_complex

EULER = 0.5772156649015329


def contour_ci_si(z, n=4000):
    """Si and Cin integrated along the straight segment 0 -> z (w = z u); Ci from Cin."""
    si_re = integrate.quad(lambda u: (cmath.sin(z * u) / u).real if u else z.real, 0, 1, limit=n)[0]
    si_im = integrate.quad(lambda u: (cmath.sin(z * u) / u).imag if u else z.imag, 0, 1, limit=n)[0]
    # Cin(z) = int_0^z (1 - cos w)/w dw ; Ci = gamma + log z - Cin
    cin_re = integrate.quad(lambda u: ((1 - cmath.cos(z * u)) / u).real if u else 0.0, 0, 1, limit=n)[0]
    cin_im = integrate.quad(lambda u: ((1 - cmath.cos(z * u)) / u).imag if u else 0.0, 0, 1, limit=n)[0]
    return EULER + cmath.log(z) - complex(cin_re, cin_im), complex(si_re, si_im)


def test_contour_oracle_one_plus_i():
    ci, si = cin_sin_complex(1 + 1j)
    ci_ref, si_ref = contour_ci_si(1 + 1j)
    assert abs(ci - ci_ref) < 1e-9
    assert abs(si - si_ref) < 1e-9


def test_frozen_mpmath_values():
    # mpmath at 30 digits
    ci, si = cin_sin_complex(1 + 1j)
    assert ci == pytest.approx(0.882172180555936325 + 0.287249133519955940j, abs=1e-14)
    assert si == pytest.approx(1.10422265823558174 + 0.882453805007917743j, abs=1e-14)
    ci, si = cin_sin_complex(3 + 7j)
    assert ci == pytest.approx(-66.4917130043246105 - 48.7258727045093227j, rel=1e-13)
    assert si == pytest.approx(50.2966929949487772 - 66.4918180038471807j, rel=1e-13)


def test_limits():
    assert abs(cin_sin_complex(1e-8 + 0j)[1]) < 1e-7
    assert cin_sin_complex(1e6 + 0j)[1].real == pytest.approx(math.pi / 2, abs=1e-5)
    x = 1e-6
    assert cin_sin_complex(complex(x))[0].real - (EULER + math.log(x)) == pytest.approx(0, abs=1e-10)


def test_branch_cut_rejected():
    with pytest.raises(SpecialFunctionError):
        cin_sin_complex(-2.0 + 0j)
    with pytest.raises(SpecialFunctionError):
        cin_sin_complex(0j)


def test_hyperbolic():
    chi, shi = chin_shin_real(1e-7)
    assert shi == pytest.approx(1e-7, rel=1e-12)
    assert chi - (EULER + math.log(1e-7)) == pytest.approx(0, abs=1e-12)
    chi, shi = chin_shin_real(2.0)
    ei2 = integrate.quad(lambda t: (math.exp(t) - 1) / t, 0, 2)[0] + EULER + math.log(2)
    assert chi + shi == pytest.approx(ei2, abs=1e-10)
    assert chi + shi == pytest.approx(4.95423435600189016, abs=1e-12)
    with pytest.raises(SpecialFunctionError):
        chin_shin_real(701.0)
    with pytest.raises(SpecialFunctionError):
        chin_shin_real(0.0)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.01, 40), st.floats(0.01, 40))
def test_upper_half_plane_against_mpmath(x, y):
    # the ohmic closed form only needs Im z > 0
    z = complex(x, y)
    ci, si = cin_sin_complex(z)
    ci_ref, si_ref = complex(mp.ci(z)), complex(mp.si(z))
    scale = max(1.0, abs(ci_ref), abs(si_ref))
    assert abs(ci - ci_ref) <= 1e-11 * scale
    assert abs(si - si_ref) <= 1e-11 * scale
