"""
Checking complete positivity
============================

A second-order master equation is not guaranteed to give a completely
positive map. In the secular regime the accumulated exponents ``Gamma`` and
``Lambda`` decide; in the nonsecular regime we build the Choi matrix from the
generator and compare its spectrum with the closed form.
"""

import numpy as np

from nmbloch import (Lorentzian, RateFunction, SystemParams, choi_for_rates, dressed_basis,
                     integrate_bloch, nonsecular_cp_check, secular_cp_check)

params = SystemParams(omega_A=1.0, omega_L=1.0, Omega=0.01)
basis = dressed_basis(params)


def cavity(p, s, alpha_sq):
    width = basis.omega / p
    return Lorentzian(alpha_sq, width, params.omega_L + s * width)


###############################################################################
# Secular check: Hall's conditions and the single integral of ``gamma_0``
# give the same verdict.
model = cavity(10.0, 1.0, 0.01)
rates = RateFunction(model, basis, params)
traj = integrate_bloch(rates, [0, 0, 1], np.linspace(0, 30 / model.width, 301), secular_only=True)
report = secular_cp_check(traj)
print(report.verdict, "| verdicts agree:", report.verdicts_agree)

###############################################################################
# Nonsecular check: the numerical Choi eigenvalues approach
# ``1 +- sqrt(1 - Lambda - 2 Gamma)`` and the error shrinks quickly with the
# coupling.
for alpha in (0.02, 0.01, 0.005):
    model = cavity(0.01, 10.0, alpha ** 2)
    rates = RateFunction(model, basis, params)
    grid = np.linspace(0, 30 / model.width, 31)
    report = nonsecular_cp_check(integrate_bloch(rates, [0, 0, 1], grid))
    choi = choi_for_rates(rates, grid)
    err = max(np.abs(choi.eigenvalues[:, 3] - report.eps3).max(),
              np.abs(choi.eigenvalues[:, 2] - report.eps4).max())
    print(f"alpha={alpha:<6} max eigenvalue error {err:.3e}  {report.verdict}")
