"""Laser-atom parameters, dressed-state coefficients and the dressed/bare rotation."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import ConfigError, DegenerateSystemError, ModelValidityWarning

VALIDITY_THRESHOLD = 0.1


@dataclass(frozen=True)
class SystemParams:
    """Driven two-level atom in the frame rotating at the laser frequency.

    All frequencies are angular (rad per time unit). ``Delta`` is derived as
    ``omega_A - omega_L`` and never stored on its own.
    """

    omega_A: float
    omega_L: float
    Omega: float

    def __post_init__(self):
        if not (self.omega_A > 0 and self.omega_L > 0):
            raise ConfigError("omega_A and omega_L must be positive")
        if not self.Omega >= 0:
            raise ConfigError("Omega must be non-negative")

    @property
    def Delta(self) -> float:
        return self.omega_A - self.omega_L

    @classmethod
    def resolve(cls, Omega: float, Delta: Optional[float] = None,
                omega_A: Optional[float] = None, omega_L: Optional[float] = None,
                rtol: float = 1e-9) -> "SystemParams":
        """Build parameters from any two of ``(Delta, omega_A, omega_L)``.

        If all three are given they must satisfy ``Delta = omega_A - omega_L``
        to relative tolerance ``rtol``.
        """
        given = [v is not None for v in (Delta, omega_A, omega_L)]
        if sum(given) < 2:
            raise ConfigError("need two of Delta, omega_A, omega_L")
        if omega_A is None:
            omega_A = omega_L + Delta
        elif omega_L is None:
            omega_L = omega_A - Delta
        elif Delta is not None:
            derived = omega_A - omega_L
            scale = max(abs(omega_A), abs(omega_L))
            if abs(derived - Delta) > rtol * scale:
                raise ConfigError(
                    f"Delta={Delta!r} inconsistent with omega_A - omega_L = {derived!r}",
                    path="system.Delta")
        return cls(float(omega_A), float(omega_L), float(Omega))

    def validity_warnings(self, threshold: float = VALIDITY_THRESHOLD) -> list:
        out = []
        if abs(self.Delta) / self.omega_A > threshold:
            out.append(f"|Delta|/omega_A = {abs(self.Delta) / self.omega_A:.3g} exceeds {threshold}")
        if self.Omega / self.omega_A > threshold:
            out.append(f"Omega/omega_A = {self.Omega / self.omega_A:.3g} exceeds {threshold}")
        return out

    def warn_validity(self, threshold: float = VALIDITY_THRESHOLD) -> list:
        msgs = self.validity_warnings(threshold)
        for m in msgs:
            warnings.warn(m, ModelValidityWarning, stacklevel=2)
        return msgs


@dataclass(frozen=True)
class DressedBasis:
    omega: float
    c_plus: float
    c_minus: float
    c_zero: float
    theta: float

    def rotation(self) -> np.ndarray:
        """Matrix taking a dressed-basis Bloch vector to the bare basis."""
        c, s = math.cos(self.theta), math.sin(self.theta)
        return np.array([[c, 0.0, -s], [0.0, 1.0, 0.0], [s, 0.0, c]])


def dressed_basis(params: SystemParams) -> DressedBasis:
    """Dressed splitting and coefficients ``C_+``, ``C_-``, ``C_0``.

    ``c_minus`` keeps its algebraic sign, ``(Delta - omega) / (2 omega)``.
    ``theta`` uses ``atan2`` so that resonance (``Delta = 0``) gives pi/2.
    """
    delta, rabi = params.Delta, params.Omega
    omega = math.hypot(delta, rabi)
    if omega == 0.0:
        raise DegenerateSystemError("Delta = Omega = 0: dressed splitting vanishes")
    return DressedBasis(
        omega=omega,
        c_plus=(delta + omega) / (2 * omega),
        c_minus=(delta - omega) / (2 * omega),
        c_zero=rabi / (2 * omega),
        theta=math.atan2(rabi, delta),
    )


def to_bare_frame(r, basis: DressedBasis) -> np.ndarray:
    """Rotate dressed-basis Bloch vector(s) ``r`` (shape ``(3,)`` or ``(N, 3)``) to the bare basis."""
    return np.asarray(r, dtype=float) @ basis.rotation().T


def from_bare_frame(r, basis: DressedBasis) -> np.ndarray:
    return np.asarray(r, dtype=float) @ basis.rotation()
