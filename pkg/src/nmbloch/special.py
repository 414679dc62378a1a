"""Cosine/sine integrals of complex argument and hyperbolic integrals of real argument.

Both wrap :func:`scipy.special.sici` / :func:`scipy.special.shichi` and add the
domain checks the rate formulas rely on.
"""

import numpy as np
from scipy import special as sc

from .exceptions import SpecialFunctionError

EXP_OVERFLOW = 700.0


def cin_sin_complex(z):
    """Principal-branch ``(Ci(z), Si(z))`` for complex ``z`` off the cut ``(-inf, 0]``."""
    z = np.asarray(z, dtype=complex)
    bad = (z == 0) | ((z.imag == 0) & (z.real < 0))
    if np.any(bad):
        raise SpecialFunctionError("Ci/Si argument on the branch cut", argument=z[bad].ravel()[0])
    si, ci = sc.sici(z)
    if not (np.all(np.isfinite(si)) and np.all(np.isfinite(ci))):
        bad = ~(np.isfinite(si) & np.isfinite(ci))
        raise SpecialFunctionError("Ci/Si evaluation did not converge", argument=z[bad].ravel()[0])
    return ci, si


def chin_shin_real(x):
    """``(Chi(x), Shi(x))`` for real ``0 < x <= 700``."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise SpecialFunctionError("Chi/Shi need x > 0", argument=x[x <= 0].ravel()[0])
    if np.any(x > EXP_OVERFLOW):
        raise SpecialFunctionError("Chi/Shi overflow", argument=x[x > EXP_OVERFLOW].ravel()[0])
    shi, chi = sc.shichi(x)
    return chi, shi
