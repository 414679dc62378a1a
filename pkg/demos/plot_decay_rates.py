"""
Time-dependent decay rates of a dressed atom
=============================================

A driven two-level atom decays through three dressed channels, at the
frequencies ``omega_L - omega``, ``omega_L`` and ``omega_L + omega``. Each
channel sees the reservoir through a rate that switches on over the
correlation time and then settles to its golden-rule value.

"""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from nmbloch import Lorentzian, RateFunction, SystemParams, dressed_basis, generic_rate_oracle

out = os.environ.get("NMBLOCH_DEMO_DIR", ".")

###############################################################################
# A resonant drive with Rabi frequency 0.01 (atomic frequency = 1). The cavity
# spectrum is placed with two numbers: ``p`` is the ratio of the correlation
# time to the dressed period and ``s`` the detuning of the cavity peak in
# widths.
params = SystemParams(omega_A=1.0, omega_L=1.0, Omega=0.01)
basis = dressed_basis(params)
p, s = 1.0, 1.0
width = basis.omega / p
cavity = Lorentzian(alpha_sq=0.01, width=width, omega_0=params.omega_L + s * width)
rates = RateFunction(cavity, basis, params)

T = np.linspace(0, 30, 400)
gamma, lamb = rates(T / width)

###############################################################################
# The closed forms can be checked against direct quadrature over the
# spectrum at a handful of times.
for Ti in (0.5, 3.0, 20.0):
    g_or = [generic_rate_oracle(cavity, Ti / width, w)[0] for w in rates.omega_eff]
    g_cf = rates(Ti / width)[0]
    print(f"T={Ti:5.1f}  closed form {np.array2string(g_cf, precision=6)}"
          f"  quadrature {np.array2string(np.array(g_or), precision=6)}")

###############################################################################
# Wherever a rate dips below zero the reservoir hands energy back for a
# while. All three curves end on the golden-rule values.
fig, ax = plt.subplots(figsize=(5, 3.4))
for k, (label, ls) in enumerate(((r"$\gamma_-$", "--"), (r"$\gamma_0$", "-"), (r"$\gamma_+$", "-."))):
    ax.plot(T, gamma[k] / cavity.alpha_sq, ls, label=label)
    ax.axhline(rates.markov_gamma[k] / cavity.alpha_sq, color="grey", lw=0.5)
ax.set_xlabel(r"$T = \lambda t$")
ax.set_ylabel(r"$\gamma_\xi / \alpha^2$")
ax.legend()
fig.tight_layout()
fig.savefig(os.path.join(out, "decay_rates.svg"))
print("golden-rule limits:", rates.markov_gamma)
