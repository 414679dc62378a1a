"""Reservoir spectral densities and the (p, s) regime parameters."""

from __future__ import annotations

import bisect
import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dressed import DressedBasis, SystemParams
from .exceptions import ConfigError, ModelValidityWarning

SECULAR_P = 10.0
NONSECULAR_P = 0.1
OHMIC_ALPHA_WARN = 0.1
OHMIC_PS_MARGIN = 0.1  # p << s is taken to mean p <= s / 10


class Regime(enum.Enum):
    SECULAR = "secular"
    INTERMEDIATE = "intermediate"
    NONSECULAR = "nonsecular"


@dataclass(frozen=True)
class Lorentzian:
    """Cavity-like density ``alpha_sq/(4 pi) * width**2 / ((w - omega_0)**2 + width**2)``.

    Defined on the whole real line. ``alpha_sq`` has frequency units and is
    normalised so that the Markovian rate at the peak is ``alpha_sq / 2``.
    """

    alpha_sq: float
    width: float
    omega_0: float

    def __post_init__(self):
        if not (self.alpha_sq > 0 and self.width > 0 and self.omega_0 > 0):
            raise ConfigError("Lorentzian needs alpha_sq, width, omega_0 > 0")

    def __call__(self, w):
        w = np.asarray(w, dtype=float)
        lam = self.width
        return self.alpha_sq / (4 * np.pi) * lam * lam / ((w - self.omega_0) ** 2 + lam * lam)

    def scalar(self):
        """Plain-float version of ``__call__`` for quadrature callbacks."""
        c = self.alpha_sq / (4 * math.pi) * self.width ** 2
        w0, l2 = self.omega_0, self.width ** 2
        return lambda w: c / ((w - w0) * (w - w0) + l2)

    @property
    def correlation_time(self) -> float:
        return 1.0 / self.width

    @property
    def scale(self) -> float:
        return self.width

    support = (-math.inf, math.inf)
    breakpoints = ()


@dataclass(frozen=True)
class Ohmic:
    """Ohmic density ``alpha**2 * w * exp(-w / omega_C)`` for ``w >= 0``, zero below."""

    alpha: float
    omega_C: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.omega_C > 0):
            raise ConfigError("Ohmic needs alpha > 0 and omega_C > 0")
        if self.alpha > OHMIC_ALPHA_WARN:
            warnings.warn(f"Ohmic alpha={self.alpha} is not small (> {OHMIC_ALPHA_WARN})",
                          ModelValidityWarning, stacklevel=3)

    def __call__(self, w):
        w = np.asarray(w, dtype=float)
        wp = np.maximum(w, 0.0)
        return np.where(w >= 0, self.alpha ** 2 * wp * np.exp(-wp / self.omega_C), 0.0)

    def scalar(self):
        a, wc = self.alpha ** 2, self.omega_C
        return lambda w: a * w * math.exp(-w / wc) if w >= 0 else 0.0

    @property
    def correlation_time(self) -> float:
        return 1.0 / self.omega_C

    @property
    def scale(self) -> float:
        return self.omega_C

    support = (0.0, math.inf)
    breakpoints = (0.0,)


@dataclass(frozen=True, eq=False)
class Tabulated:
    """Piecewise-linear density through ``(frequency, density)`` samples, zero off-grid."""

    frequencies: np.ndarray
    densities: np.ndarray
    _hwhm: float = field(init=False, repr=False)

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        d = np.asarray(self.densities, dtype=float)
        if f.ndim != 1 or f.shape != d.shape or f.size < 2:
            raise ConfigError("tabulated spectrum needs two equal-length columns of >= 2 rows")
        if np.any(np.diff(f) <= 0):
            raise ConfigError("tabulated frequencies must be strictly increasing")
        if np.any(f < 0) or np.any(d < 0):
            raise ConfigError("tabulated frequencies and densities must be non-negative")
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "densities", d)
        object.__setattr__(self, "_hwhm", _hwhm(f, d))

    @classmethod
    def from_csv(cls, path) -> "Tabulated":
        with open(path) as fh:
            first = fh.readline()
        try:
            [float(x) for x in first.replace(",", " ").split()]
            skip = 0
        except ValueError:
            skip = 1
        data = np.loadtxt(path, delimiter=",", skiprows=skip, ndmin=2)
        if data.shape[1] != 2:
            raise ConfigError(f"{path}: expected two columns, got {data.shape[1]}")
        return cls(data[:, 0], data[:, 1])

    def __call__(self, w):
        return np.interp(w, self.frequencies, self.densities, left=0.0, right=0.0)

    def scalar(self):
        f, d = self.frequencies.tolist(), self.densities.tolist()

        def j(w):
            if w < f[0] or w > f[-1]:
                return 0.0
            k = min(bisect.bisect_right(f, w), len(f) - 1)
            x0, x1 = f[k - 1], f[k]
            return d[k - 1] + (d[k] - d[k - 1]) * (w - x0) / (x1 - x0)
        return j

    @property
    def correlation_time(self) -> float:
        return 1.0 / self._hwhm

    @property
    def scale(self) -> float:
        return self._hwhm

    @property
    def support(self):
        return (float(self.frequencies[0]), float(self.frequencies[-1]))

    @property
    def breakpoints(self):
        return tuple(self.frequencies)


def _hwhm(f, d):
    """Half width at half maximum of the tallest peak (one-sided if the grid clips it)."""
    k = int(np.argmax(d))
    half = d[k] / 2
    if half <= 0:
        return float(f[-1] - f[0])
    sides = []
    i = k
    while i > 0 and d[i - 1] > half:
        i -= 1
    if i > 0:
        x = np.interp(half, [d[i - 1], d[i]], [f[i - 1], f[i]])
        sides.append(f[k] - x)
    i = k
    while i < len(d) - 1 and d[i + 1] > half:
        i += 1
    if i < len(d) - 1:
        x = np.interp(half, [d[i + 1], d[i]], [f[i + 1], f[i]])
        sides.append(x - f[k])
    if not sides:
        return float(f[-1] - f[0]) / 2
    return float(np.mean(sides)) or float(f[1] - f[0])


def evaluate(model, omega_tilde):
    """Spectral density ``J(omega_tilde)``."""
    return model(omega_tilde)


@dataclass(frozen=True)
class RegimeParams:
    p: float
    s: Optional[float]
    regime: Regime
    warnings: tuple = ()


def classify(p: float, secular_p: float = SECULAR_P, nonsecular_p: float = NONSECULAR_P) -> Regime:
    if p >= secular_p:
        return Regime.SECULAR
    if p <= nonsecular_p:
        return Regime.NONSECULAR
    return Regime.INTERMEDIATE


def regime_params(model, basis: DressedBasis, params: SystemParams,
                  secular_p: float = SECULAR_P, nonsecular_p: float = NONSECULAR_P) -> RegimeParams:
    """Ratio ``p = tau_C / tau_S`` and spectral detuning ``s`` for ``model``.

    Ohmic models warn (``ModelValidityWarning``) when ``p > s / 10``; tabulated
    models have no ``s`` and use the inverse half width as correlation time.
    """
    p = basis.omega * model.correlation_time
    msgs = []
    if isinstance(model, Lorentzian):
        s = (model.omega_0 - params.omega_L) / model.width
    elif isinstance(model, Ohmic):
        s = params.omega_L / model.omega_C
        if p > OHMIC_PS_MARGIN * s:
            msgs.append(f"Ohmic model validity requires p << s, got p={p:.3g}, s={s:.3g}")
    else:
        s = None
    for m in msgs:
        warnings.warn(m, ModelValidityWarning, stacklevel=2)
    return RegimeParams(p=p, s=s, regime=classify(p, secular_p, nonsecular_p), warnings=tuple(msgs))
