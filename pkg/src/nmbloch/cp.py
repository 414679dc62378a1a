"""Complete-positivity certification of the reduced dynamical map.

Secular trajectories are checked with Hall's inequalities on the accumulated
exponents; nonsecular ones with the Choi matrix, both as the closed-form
eigenvalues and as a numerical construction from the generator.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate
from scipy.linalg import expm

from . import pauli
from .bloch import BlochTrajectory, build_generator
from .exceptions import QuadratureError, RegimeMismatchWarning
from .rates import RateFunction, RateSample, _check_grid

MARGIN_TOL = -1e-10
HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class CPAuxiliaries:
    phi: np.ndarray
    chi: np.ndarray
    psi: np.ndarray


def auxiliaries(traj: BlochTrajectory) -> CPAuxiliaries:
    z0 = traj.r0[2]
    return CPAuxiliaries(np.exp(-traj.Lambda), np.exp(-2 * traj.Gamma),
                         traj.states[:, 2] - np.exp(-traj.Gamma) * z0)


def hall_b3(aux: CPAuxiliaries) -> np.ndarray:
    """Left side of ``1 + phi^2 - chi - 2|phi - chi| - psi^2 >= 0``, absolute value by case split."""
    phi, chi, psi = aux.phi, aux.chi, aux.psi
    upper = 1 + phi ** 2 - chi - 2 * (phi - chi) - psi ** 2
    lower = 1 + phi ** 2 - chi - 2 * (chi - phi) - psi ** 2
    return np.where(phi >= chi, upper, lower)


def hall_b8(aux: CPAuxiliaries) -> np.ndarray:
    """Simplified form ``(1 - phi)^2 + chi - psi^2``, meaningful where ``2 Gamma >= Lambda``."""
    return (1 - aux.phi) ** 2 + aux.chi - aux.psi ** 2


@dataclass(frozen=True)
class CPReport:
    """Per-sample CP margins and the overall verdict.

    ``violated_at`` is the first time a necessary margin drops below
    ``MARGIN_TOL`` (``None`` when CP holds on the whole grid). ``equivalent_at``
    is the same test applied to ``m4`` alone; the two must coincide.
    ``hall_sufficient`` is Hall's second inequality alone; the first one is
    ``m2 >= 0`` and the two are never merged.
    """

    grid: np.ndarray
    m1: np.ndarray
    m2: np.ndarray
    m3: np.ndarray
    m4: np.ndarray
    eps3: np.ndarray
    eps4: np.ndarray
    hall_sufficient: np.ndarray
    secular: bool
    violated_at: Optional[float]
    equivalent_at: Optional[float]
    weak_coupling: Optional[np.ndarray] = None
    hall_simplified: Optional[np.ndarray] = None
    horizon_too_long_at: Optional[float] = None

    @property
    def holds(self) -> bool:
        return self.violated_at is None

    @property
    def verdict(self) -> str:
        return "CP_holds" if self.holds else f"CP_violated_at({self.violated_at:.17g})"

    @property
    def verdicts_agree(self) -> bool:
        return self.violated_at == self.equivalent_at

    def verdict_flags(self) -> np.ndarray:
        """1 at samples up to which CP holds on ``[0, t]``, 0 afterwards."""
        if self.violated_at is None:
            return np.ones(self.grid.size, dtype=int)
        return (self.grid < self.violated_at).astype(int)

    def columns(self) -> dict:
        return {"t": self.grid, "m1": self.m1, "m2": self.m2, "m3": self.m3, "m4": self.m4,
                "eps3": self.eps3, "eps4": self.eps4,
                "hall_sufficient": self.hall_sufficient.astype(int),
                "verdict_flag": self.verdict_flags()}


def _first_violation(grid, *margins) -> Optional[float]:
    bad = np.zeros(grid.size, dtype=bool)
    for m in margins:
        bad |= m < MARGIN_TOL
    return float(grid[np.argmax(bad)]) if bad.any() else None


def choi_eigenvalues(m3):
    """Closed-form ``eps_{3,4} = 1 +- sqrt(1 - (Lambda + 2 Gamma))``; NaN where complex."""
    m3 = np.asarray(m3, dtype=float)
    disc = 1.0 - m3
    root = np.sqrt(np.where(disc >= 0, disc, np.nan))
    return 1 + root, 1 - root


def secular_cp_check(traj: BlochTrajectory, rates=None) -> CPReport:
    """Hall conditions ``2 Gamma >= Lambda >= 0`` cross-checked against ``int g0 >= 0``.

    ``rates`` is accepted for interface symmetry; the exponents are carried by
    the trajectory itself.
    """
    if not traj.secular_only:
        warnings.warn("secular CP check applied to a nonsecular trajectory",
                      RegimeMismatchWarning, stacklevel=2)
    m1 = traj.Lambda
    m2 = 2 * traj.Gamma - traj.Lambda
    m3 = traj.Lambda + 2 * traj.Gamma
    m4 = traj.int_gamma0
    aux = auxiliaries(traj)
    eps3, eps4 = choi_eigenvalues(m3)
    return CPReport(traj.grid, m1, m2, m3, m4, eps3, eps4, hall_b3(aux) >= MARGIN_TOL,
                    True, _first_violation(traj.grid, m1, m2),
                    _first_violation(traj.grid, m4),
                    weak_coupling=1 - 2 * traj.Gamma >= MARGIN_TOL,
                    hall_simplified=hall_b8(aux) >= MARGIN_TOL)


def nonsecular_cp_check(traj: BlochTrajectory) -> CPReport:
    """Choi-positivity margin ``Lambda + 2 Gamma >= 0`` with the closed-form eigenvalues.

    The equivalent margin ``m4`` is the time integral of the common rate, taken
    as ``g0``; with coinciding rates ``m3 = 2 m4`` because
    ``C+^2 + C-^2 + 2 C0^2 = 1``.
    """
    m1 = traj.Lambda
    m2 = 2 * traj.Gamma - traj.Lambda
    m3 = traj.Lambda + 2 * traj.Gamma
    m4 = traj.int_gamma0
    eps3, eps4 = choi_eigenvalues(m3)
    complex_at = _first_violation(traj.grid, 1.0 - m3)
    aux = auxiliaries(traj)
    return CPReport(traj.grid, m1, m2, m3, m4, eps3, eps4, hall_b3(aux) >= MARGIN_TOL,
                    False, _first_violation(traj.grid, m3), _first_violation(traj.grid, m4),
                    horizon_too_long_at=complex_at)


# --- numerical Choi construction --------------------------------------------

@dataclass(frozen=True)
class ChoiData:
    grid: np.ndarray
    L_tilde: np.ndarray  # (N, 4, 4)
    L0_tilde: np.ndarray
    F: np.ndarray
    S: np.ndarray
    eigenvalues: np.ndarray  # (N, 4), ascending
    hermiticity: np.ndarray

    @property
    def L2_scaled(self):
        """``alpha^2 L2``: everything in ``L_tilde`` beyond the coupling-free rotation."""
        return self.L_tilde - self.L0_tilde

    def verdict(self, tol: float) -> Optional[float]:
        """First time the smallest eigenvalue is below ``-tol``, or ``None``."""
        return _first_violation(self.grid, self.eigenvalues[:, 0] + tol)


def _rotation_generator(omega):
    out = np.zeros((4, 4))
    out[1, 2] = -omega
    out[2, 1] = omega
    return out


def choi_numeric(generator: Callable[[float], np.ndarray], grid, omega: float,
                 epsabs: float = 1e-14, epsrel: float = 1e-12) -> ChoiData:
    """Choi matrix of ``F = exp(L0~) (I + alpha^2 L2~)`` on ``grid``.

    ``generator(t)`` returns the full 4x4 Pauli transfer generator (rotation and
    dissipation). ``L~`` is accumulated interval by interval with adaptive
    vector quadrature; its coupling-free part is the rotation at ``omega``.
    Time ordering is dropped, which is exact to second order in the coupling.
    """
    grid = _check_grid(grid)
    n = grid.size
    acc = np.zeros((n, 4, 4))
    for k in range(1, n):
        val, err = integrate.quad_vec(lambda s: generator(s).ravel(), grid[k - 1], grid[k],
                                      epsabs=epsabs, epsrel=epsrel, limit=2000)
        if not np.all(np.isfinite(val)):
            raise QuadratureError(f"non-finite generator integral on [{grid[k - 1]}, {grid[k]}]")
        acc[k] = acc[k - 1] + val.reshape(4, 4)
    rot = _rotation_generator(omega)
    l0 = grid[:, None, None] * rot
    F = np.empty_like(acc)
    S = np.empty((n, 4, 4), dtype=complex)
    eig = np.empty((n, 4))
    herm = np.empty(n)
    eye = np.eye(4)
    for k in range(n):
        F[k] = expm(l0[k]) @ (eye + acc[k] - l0[k])
        s = pauli.choi_from_transfer(F[k])
        herm[k] = float(np.max(np.abs(s - s.conj().T)))
        S[k] = s
        eig[k] = np.linalg.eigvalsh(0.5 * (s + s.conj().T))
    return ChoiData(grid, acc, l0, F, S, eig, herm)


def rate_generator(rates: RateFunction, secular_only: bool = False):
    """Full Pauli transfer generator ``t -> L(t)`` built from the rate functions."""
    def gen(t):
        g, lam = rates(t)
        return build_generator(rates.basis, RateSample(t, g, lam), secular_only).affine()
    return gen


def choi_for_rates(rates: RateFunction, grid, secular_only: bool = False) -> ChoiData:
    return choi_numeric(rate_generator(rates, secular_only), grid, rates.basis.omega)
