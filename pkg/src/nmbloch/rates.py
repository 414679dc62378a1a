"""Time-dependent decay rates gamma_xi(t) and Lamb coefficients lambda_xi(t).

Channels are indexed by ``xi in (-1, 0, +1)``; every array returned here has the
channel on its first axis in that order. The effective frequency of channel
``xi`` is ``omega_L + xi * omega``.

For a spectral density ``J`` the coefficients are

    gamma_xi(t) = 2 int dw J(w) sin((w_xi - w) t) / (w_xi - w)
    lamb_xi(t)  =   int dw J(w) (1 - cos((w_xi - w) t)) / (w_xi - w)

Lorentzian and Ohmic densities have closed forms; anything else goes through
:func:`generic_rate_oracle`.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline
from scipy import special as sc

from .dressed import DressedBasis, SystemParams
from .exceptions import QuadratureError, SpecialFunctionError
from .spectral import Lorentzian, Ohmic, Tabulated
from .special import chin_shin_real, cin_sin_complex

CHANNELS = (-1, 0, 1)

# e**-40 < 1e-17: Lorentzian transients are below double precision after this.
LORENTZIAN_SETTLE_T = 40.0
ORACLE_EPSABS = 1e-10
ORACLE_LIMIT = 500
IMAG_RESIDUE_TOL = 1e-10


# --- closed forms -----------------------------------------------------------

def lorentzian_rate(T, q, alpha_sq):
    """Closed-form Lorentzian ``(gamma, lamb)`` at dimensionless time ``T = width * t``.

    ``q = (omega_0 - omega_eff) / width``. Values carry the units of ``alpha_sq``.
    """
    T = np.asarray(T, dtype=float)
    q = np.asarray(q, dtype=float)
    e = np.exp(-T)
    c = np.cos(q * T)
    s = np.sin(q * T)
    den = 1.0 + q * q
    gamma = alpha_sq / (2 * den) * (1.0 - e * c + e * q * s)
    lamb = alpha_sq / (4 * den) * (-q + e * q * c + e * s)
    return gamma, lamb


def ohmic_rate(T, q, alpha, omega_C):
    """Closed-form Ohmic ``(gamma, lamb)`` at ``T = omega_C * t`` and ``q = omega_eff / omega_C``.

    Uses ``z = q (T + i)``::

        gamma = a [2 (T cos qT - sin qT) / (1 + T^2)
                   + q e^-q (pi - i Ci(z*) + i Ci(z) + Si(z*) + Si(z))]
        lamb  = a/2 [2 (cos qT + T sin qT) / (1 + T^2) - 2
                     + q e^-q (2 Chi(q) + 2 Shi(q) - Ci(z*) - Ci(z) + i Si(z) - i Si(z*))]

    with ``a = alpha**2 * omega_C``. Both vanish at ``T = 0``.
    """
    T = np.asarray(T, dtype=float)
    q = np.asarray(q, dtype=float)
    if np.any(q <= 0):
        raise SpecialFunctionError("Ohmic closed form needs q > 0", argument=float(np.min(q)))
    T, q = np.broadcast_arrays(T, q)
    z = q * (T + 1j)
    ci, si = cin_sin_complex(z)
    cib, sib = cin_sin_complex(np.conj(z))
    chi, shi = chin_shin_real(q)
    a = alpha * alpha * omega_C
    pref = q * np.exp(-q)
    qT = q * T
    cos, sin = np.cos(qT), np.sin(qT)
    g = a * (2 * (T * cos - sin) / (1 + T * T)
             + pref * (np.pi - 1j * cib + 1j * ci + sib + si))
    lam = 0.5 * a * (2 * (cos + T * sin) / (1 + T * T) - 2
                     + pref * (2 * chi + 2 * shi - cib - ci + 1j * si - 1j * sib))
    for name, v in (("gamma", g), ("lamb", lam)):
        resid = np.abs(v.imag)
        if np.any(resid > IMAG_RESIDUE_TOL * (np.abs(v.real) + a)):
            k = np.unravel_index(np.argmax(resid), resid.shape)
            raise SpecialFunctionError(f"Ohmic {name} has non-negligible imaginary part",
                                       argument=complex(z[k]))
    return g.real, lam.real


# --- generic quadrature oracle ----------------------------------------------

def _peak(model) -> float:
    if isinstance(model, Lorentzian):
        return model.alpha_sq / (4 * math.pi)
    if isinstance(model, Ohmic):
        return model.alpha ** 2 * model.omega_C / math.e
    return float(np.max(model.densities))


def _quad(f, a, b, epsabs, limit, **kw):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        val, err = integrate.quad(f, a, b, epsabs=epsabs, epsrel=0.0, limit=limit, **kw)
    if caught and err > 100 * epsabs:
        raise QuadratureError(f"quadrature on [{a}, {b}] did not converge "
                              f"(error estimate {err:.3g}): {caught[0].message}")
    return val


def _folded(model, omega_eff):
    """``G(u) = J(w + u) + J(w - u)``, ``H(u) = J(w + u) - J(w - u)`` and both over ``u``.

    Lorentzian densities get single-closure versions; QUADPACK calls these
    hundreds of thousands of times and nested Python calls dominate the cost.
    """
    if isinstance(model, Lorentzian):
        c = model.alpha_sq / (4 * math.pi) * model.width ** 2
        d, l2 = model.omega_0 - omega_eff, model.width ** 2

        def G(u):
            return c / ((u - d) * (u - d) + l2) + c / ((u + d) * (u + d) + l2)

        def H(u):
            return c / ((u - d) * (u - d) + l2) - c / ((u + d) * (u + d) + l2)

        def G_u(u):
            return (c / ((u - d) * (u - d) + l2) + c / ((u + d) * (u + d) + l2)) / u

        def H_u(u):
            return (c / ((u - d) * (u - d) + l2) - c / ((u + d) * (u + d) + l2)) / u

        return G, H, G_u, H_u
    J = model.scalar()

    def G(u):
        return J(omega_eff + u) + J(omega_eff - u)

    def H(u):
        return J(omega_eff + u) - J(omega_eff - u)

    return G, H, lambda u: G(u) / u, lambda u: H(u) / u


_PLAIN_CACHE: dict = {}
_PLAIN_CACHE_SIZE = 4096


def _plain_integral(model, H_u, omega_eff, a, b, tol, limit):
    """``int_a^b H(u) / u du``; independent of ``t``, so memoised per model and segment."""
    try:
        key = (hash(model), omega_eff, a, b, tol, limit)
    except TypeError:  # tabulated models hold arrays
        key = (id(model), omega_eff, a, b, tol, limit)
    hit = _PLAIN_CACHE.get(key)
    if hit is not None and (hit[0] is model or hit[0] == model):
        return hit[1]
    val = _quad(H_u, a, b, tol, limit)
    if len(_PLAIN_CACHE) >= _PLAIN_CACHE_SIZE:
        _PLAIN_CACHE.clear()
    _PLAIN_CACHE[key] = (model, val)
    return val


def generic_rate_oracle(model, t: float, omega_eff: float, epsabs: Optional[float] = None,
                        limit: int = ORACLE_LIMIT):
    """``(gamma, lamb)`` at time ``t`` by adaptive quadrature over frequency.

    The time integral is done analytically; with ``u = w - omega_eff`` the
    frequency integrals are folded onto ``u >= 0``::

        gamma = 2 int_0^inf [J(w_eff + u) + J(w_eff - u)] sin(u t) / u du
        lamb  = - int_0^inf [J(w_eff + u) - J(w_eff - u)] (1 - cos(u t)) / u du

    Oscillatory pieces away from ``u = 0`` use QUADPACK's Fourier-weighted
    rules. ``epsabs`` defaults to ``1e-10 * 2 pi max J``.
    """
    t = float(t)
    if t < 0:
        raise ValueError("t must be non-negative")
    if t == 0.0:
        return 0.0, 0.0
    if epsabs is None:
        epsabs = ORACLE_EPSABS * 2 * math.pi * _peak(model)
    # pieces per integral; budget the tolerance so the sum stays inside epsabs
    tol = epsabs / 16

    G, H, G_u, H_u = _folded(model, omega_eff)

    lo, hi = model.support
    knots = {abs(b - omega_eff) for b in model.breakpoints}
    knots |= {abs(x - omega_eff) for x in (lo, hi) if math.isfinite(x)}
    if isinstance(model, Lorentzian):
        d = abs(model.omega_0 - omega_eff)
        knots |= {d, d + model.width, max(d - model.width, 0.0)}
    # knots that are zero up to rounding would put a 1/u singularity on a segment edge
    knots = sorted(k for k in knots if k > 1e-9 * model.scale)
    infinite = not (math.isfinite(lo) and math.isfinite(hi))
    if not infinite and not knots:
        return 0.0, 0.0
    u_end = knots[-1] if knots else 0.0
    first = min(knots[0] if knots else model.scale, model.scale)
    if u_end and first > u_end:
        first = u_end

    def sinc_part(u):
        return G(u) * (t if u == 0 else math.sin(u * t) / u)

    def cosc_part(u):
        return H(u) * (0.0 if u == 0 else (1 - math.cos(u * t)) / u)

    gamma = _quad(sinc_part, 0.0, first, tol, limit)
    lamb = -_quad(cosc_part, 0.0, first, tol, limit)
    edges = [first] + [k for k in knots if k > first]
    for a, b in zip(edges[:-1], edges[1:]):
        gamma += _quad(G_u, a, b, tol, limit, weight="sin", wvar=t)
        lamb -= _plain_integral(model, H_u, omega_eff, a, b, tol, limit)
        lamb += _quad(H_u, a, b, tol, limit, weight="cos", wvar=t)
    if infinite:
        a = edges[-1]
        gamma += _quad(G_u, a, np.inf, tol, limit, weight="sin", wvar=t)
        lamb -= _plain_integral(model, H_u, omega_eff, a, np.inf, tol, limit)
        lamb += _quad(H_u, a, np.inf, tol, limit, weight="cos", wvar=t)
    return 2.0 * gamma, lamb


# --- Markovian limits -------------------------------------------------------

def markov_limits(model, omega_eff: float):
    """Stationary ``(gamma_M, lamb_M)``: ``2 pi J(omega_eff)`` and the principal value
    ``P int J(w) / (omega_eff - w) dw``."""
    if isinstance(model, Lorentzian):
        q = (model.omega_0 - omega_eff) / model.width
        den = 1 + q * q
        return model.alpha_sq / (2 * den), -model.alpha_sq * q / (4 * den)
    gamma_m = 2 * math.pi * float(model(omega_eff))
    if isinstance(model, Ohmic):
        a = model.alpha ** 2 * model.omega_C
        q = omega_eff / model.omega_C
        if q == 0:
            return gamma_m, -a
        return gamma_m, a * (-1 + q * math.exp(-q) * sc.expi(q))
    return gamma_m, _tabulated_principal_value(model, omega_eff)


def _tabulated_principal_value(model: Tabulated, c: float) -> float:
    """``P int J(w) / (c - w) dw`` in closed form for the piecewise-linear table.

    On a segment ``J = J_c + m (w - c)`` with ``J_c`` the linear extension at
    ``c``, so each segment contributes ``m (x1 - x0) + J_c log|x1 - c| / |x0 - c|``.
    A node at ``c`` contributes log terms that cancel between neighbours.
    """
    f, d = model.frequencies, model.densities
    slope = np.diff(d) / np.diff(f)
    jc = d[:-1] + slope * (c - f[:-1])
    if c in (f[0], f[-1]):
        jend = d[0] if c == f[0] else d[-1]
        if jend != 0.0:
            return math.copysign(math.inf, 1.0 if c == f[0] else -1.0)
    total = float(np.sum(slope * np.diff(f)))
    with np.errstate(divide="ignore"):
        upper = np.log(np.abs(f[1:] - c))
        lower = np.log(np.abs(f[:-1] - c))
    # zero-distance logs belong to a node at c; their coefficients match and cancel
    upper[~np.isfinite(upper)] = 0.0
    lower[~np.isfinite(lower)] = 0.0
    total += float(np.sum(jc * (upper - lower)))
    return -total


# --- per-system rate functions ----------------------------------------------

def effective_frequencies(basis: DressedBasis, params: SystemParams) -> np.ndarray:
    return np.array([params.omega_L + xi * basis.omega for xi in CHANNELS])


def effective_detunings(model, basis: DressedBasis, params: SystemParams) -> dict:
    """Dimensionless detunings ``q_xi`` used by the closed forms.

    Lorentzian: ``q = s - xi p``; Ohmic: ``q = s + xi p``. ``q[0] == s`` in both.
    """
    w = effective_frequencies(basis, params)
    if isinstance(model, Lorentzian):
        q = (model.omega_0 - w) / model.width
    elif isinstance(model, Ohmic):
        q = w / model.omega_C
    else:
        raise TypeError("effective detunings are defined for Lorentzian and Ohmic models only")
    return dict(zip(CHANNELS, q))


@dataclass(frozen=True)
class RateSample:
    t: float
    gamma: np.ndarray  # (3,) ordered as CHANNELS
    lamb: np.ndarray

    def gamma_of(self, xi: int) -> float:
        return float(self.gamma[xi + 1])

    def lamb_of(self, xi: int) -> float:
        return float(self.lamb[xi + 1])


class RateFunction:
    """All six coefficients as a vectorised function of physical time.

    Closed forms are used for Lorentzian and Ohmic models unless ``oracle`` is
    set; tabulated models always use the quadrature oracle.
    """

    def __init__(self, model, basis: DressedBasis, params: SystemParams, oracle: bool = False):
        self.model = model
        self.basis = basis
        self.params = params
        self.omega_eff = effective_frequencies(basis, params)
        self.oracle = oracle or isinstance(model, Tabulated)
        self.time_scale = model.scale
        markov = [markov_limits(model, w) for w in self.omega_eff]
        self.markov_gamma = np.array([m[0] for m in markov])
        self.markov_lamb = np.array([m[1] for m in markov])
        if isinstance(model, Tabulated):
            self.q = None
            self.bandwidth = float(np.max(np.abs(model.frequencies[[0, -1]][:, None]
                                                 - self.omega_eff[None, :])))
        else:
            self.q = np.array(list(effective_detunings(model, basis, params).values()))
            self.bandwidth = model.scale * (float(np.max(np.abs(self.q))) + 1.0)
        self.settle_time = (LORENTZIAN_SETTLE_T / model.width
                            if isinstance(model, Lorentzian) and not self.oracle else None)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.oracle:
            flat = t.ravel()
            g = np.empty((3, flat.size))
            lam = np.empty((3, flat.size))
            for j, tj in enumerate(flat):
                for k, w in enumerate(self.omega_eff):
                    g[k, j], lam[k, j] = generic_rate_oracle(self.model, tj, w)
            return g.reshape((3,) + t.shape), lam.reshape((3,) + t.shape)
        T = self.time_scale * t
        q = self.q.reshape((3,) + (1,) * t.ndim)
        if isinstance(self.model, Lorentzian):
            return lorentzian_rate(T, q, self.model.alpha_sq)
        return ohmic_rate(T, q, self.model.alpha, self.model.omega_C)

    def sample(self, t: float) -> RateSample:
        g, lam = self(float(t))
        return RateSample(float(t), np.asarray(g, dtype=float), np.asarray(lam, dtype=float))


@dataclass(frozen=True)
class RateTrajectory:
    grid: np.ndarray
    gamma: np.ndarray  # (3, N)
    lamb: np.ndarray   # (3, N)
    markov_gamma: np.ndarray  # (3,)
    markov_lamb: np.ndarray
    time_scale: float

    @property
    def T(self) -> np.ndarray:
        return self.time_scale * self.grid

    @property
    def markov(self) -> dict:
        return {xi: (float(self.markov_gamma[k]), float(self.markov_lamb[k]))
                for k, xi in enumerate(CHANNELS)}

    def __len__(self):
        return self.grid.size

    def sample(self, i: int) -> RateSample:
        return RateSample(float(self.grid[i]), self.gamma[:, i].copy(), self.lamb[:, i].copy())

    def columns(self) -> dict:
        return {
            "t": self.grid, "T_dimensionless": self.T,
            "gamma_minus": self.gamma[0], "gamma_0": self.gamma[1], "gamma_plus": self.gamma[2],
            "lamb_minus": self.lamb[0], "lamb_0": self.lamb[1], "lamb_plus": self.lamb[2],
        }


def _check_grid(grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 1 or grid[0] != 0.0 or np.any(np.diff(grid) <= 0):
        raise ValueError("time grid must be 1-D, start at 0 and be strictly increasing")
    return grid


def _oracle_chunk(args):
    model, omega_eff, times, offset = args
    out = np.empty((2, 3, len(times)))
    for j, t in enumerate(times):
        for k, w in enumerate(omega_eff):
            try:
                out[0, k, j], out[1, k, j] = generic_rate_oracle(model, t, w)
            except (QuadratureError, SpecialFunctionError) as exc:
                raise type(exc)(f"grid index {offset + j} (t={t!r}): {exc}") from exc
    return out


def sample_trajectory(model, basis: DressedBasis, params: SystemParams, grid,
                      oracle: bool = False, workers: Optional[int] = None) -> RateTrajectory:
    """Evaluate all coefficient channels on ``grid`` and attach the Markov limits.

    Oracle evaluations are independent per grid point and may be spread over
    ``workers`` processes; results are reassembled in grid order.
    """
    grid = _check_grid(grid)
    fn = RateFunction(model, basis, params, oracle=oracle)
    if not fn.oracle:
        try:
            g, lam = fn(grid)
        except SpecialFunctionError as exc:
            bad = [i for i, t in enumerate(grid) if not _closed_form_ok(fn, t)]
            raise SpecialFunctionError(f"grid index {bad[0] if bad else '?'}: {exc}") from exc
    else:
        n = workers or 1
        chunks = [(model, fn.omega_eff, c, int(c0))
                  for c0, c in zip(np.cumsum([0] + [len(x) for x in np.array_split(grid, n)][:-1]),
                                   np.array_split(grid, n)) if len(c)]
        if n > 1:
            with ProcessPoolExecutor(max_workers=n) as pool:
                parts = list(pool.map(_oracle_chunk, chunks))
        else:
            parts = [_oracle_chunk(c) for c in chunks]
        both = np.concatenate(parts, axis=2)
        g, lam = both[0], both[1]
    return RateTrajectory(grid, np.asarray(g), np.asarray(lam), fn.markov_gamma.copy(),
                          fn.markov_lamb.copy(), fn.time_scale)


def _closed_form_ok(fn, t):
    try:
        fn(t)
        return True
    except SpecialFunctionError:
        return False


class SplinedRates:
    """Cubic-spline surrogate of a :class:`RateFunction` on ``[0, t_max]``.

    Intended for oracle-backed (tabulated) models inside the ODE right-hand
    side, where direct quadrature per stage would dominate the run time.
    Nodes are spaced at most ``phase / bandwidth`` apart.
    """

    def __init__(self, rates: RateFunction, t_max: float, phase: float = 0.25,
                 min_nodes: int = 65, max_nodes: int = 4001, workers: Optional[int] = None):
        n = int(np.clip(math.ceil(t_max * rates.bandwidth / phase) + 1, min_nodes, max_nodes))
        self.nodes = np.linspace(0.0, t_max, n)
        traj = sample_trajectory(rates.model, rates.basis, rates.params, self.nodes,
                                 oracle=rates.oracle, workers=workers)
        self._spline = CubicSpline(self.nodes, np.concatenate([traj.gamma, traj.lamb]), axis=1)
        self.t_max = t_max
        for attr in ("model", "basis", "params", "omega_eff", "time_scale", "markov_gamma",
                     "markov_lamb", "q", "bandwidth"):
            setattr(self, attr, getattr(rates, attr))
        self.oracle = False
        self.settle_time = None

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        v = self._spline(np.clip(t, 0.0, self.t_max))
        return v[:3], v[3:]
