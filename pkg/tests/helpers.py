"""Shared scenario builders (omega_A = 1, resonant drive)."""

import math

from nmbloch.dressed import SystemParams, dressed_basis
from nmbloch.spectral import Lorentzian, Ohmic

FIG1_P = (0.01, 1.0, 100.0)
FIG1_S = (0.1, 1.0, 10.0)
FIG2_P = (0.01, 1.0, 5.0)


def lorentzian_cell(p, s, alpha_sq=0.01, Omega=0.01, Delta=0.0):
    params = SystemParams(1.0, 1.0 - Delta, Omega)
    basis = dressed_basis(params)
    width = basis.omega / p
    return Lorentzian(alpha_sq, width, params.omega_L + s * width), basis, params


def ohmic_cell(p, s=10.0, alpha=0.01, Delta=0.0):
    omega_L = 1.0
    omega_C = omega_L / s
    Omega = math.sqrt((p * omega_C) ** 2 - Delta ** 2)
    params = SystemParams(omega_L + Delta, omega_L, Omega)
    return Ohmic(alpha, omega_C), dressed_basis(params), params
